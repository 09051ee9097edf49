#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

#include "polypcount/clustering.hpp"
#include "polypcount/errors.hpp"

// HDBSCAN on a precomputed distance matrix:
//   core distances -> mutual reachability -> single-linkage hierarchy
//   -> condensed tree at min_cluster_size -> excess-of-mass extraction.
//
// Conventions, shared with the naive reference used by the tests:
//   - core distance of a point is its min_samples-th smallest distance to
//     the OTHER points (capped at n - 1 neighbours);
//   - lambda = 1 / distance, clamped to 1e12 so zero distances stay finite;
//   - the hierarchy merges the pair of components whose cheapest crossing
//     edge (weight, i, j) is smallest, which makes equal-weight merges
//     deterministic;
//   - the root cluster is eligible for selection, so an instance with no
//     internal structure comes back as one cluster rather than all noise;
//   - ties in the excess-of-mass rule (stability == sum of children) keep
//     the parent.

namespace polypcount {

namespace {

constexpr double kLambdaMax = 1e12;

double to_lambda(double distance) {
    if (distance <= 0.0) return kLambdaMax;
    return std::min(1.0 / distance, kLambdaMax);
}

std::vector<double> core_distances(const Matrix& D, int min_samples) {
    const std::size_t n = D.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(min_samples), n - 1);
    std::vector<double> core(n);
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row.push_back(D.at(i, j));
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

struct DendroNode {
    int left = -1;   // dendrogram node id (leaf ids are 0..n-1)
    int right = -1;
    double weight = 0.0;
    int size = 0;
};

// Single-linkage hierarchy over the mutual reachability graph, built as a
// Kruskal pass over all edges sorted by (weight, i, j).
std::vector<DendroNode> build_hierarchy(const Matrix& mreach) {
    const std::size_t n = mreach.size();
    std::vector<std::tuple<double, int, int>> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            edges.emplace_back(mreach.at(i, j), static_cast<int>(i), static_cast<int>(j));
    std::sort(edges.begin(), edges.end());

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    std::vector<DendroNode> nodes(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) nodes[i].size = 1;
    std::vector<int> comp_node(n); // UF root -> current dendrogram node
    std::iota(comp_node.begin(), comp_node.end(), 0);

    int next = static_cast<int>(n);
    for (const auto& [w, i, j] : edges) {
        const int ri = find(i), rj = find(j);
        if (ri == rj) continue;
        DendroNode& node = nodes[static_cast<std::size_t>(next)];
        node.left = comp_node[static_cast<std::size_t>(ri)];
        node.right = comp_node[static_cast<std::size_t>(rj)];
        node.weight = w;
        node.size = nodes[static_cast<std::size_t>(node.left)].size +
                    nodes[static_cast<std::size_t>(node.right)].size;
        parent[rj] = ri;
        comp_node[static_cast<std::size_t>(find(ri))] = next;
        ++next;
    }
    return nodes;
}

void collect_leaves(const std::vector<DendroNode>& nodes, int node, int n,
                    std::vector<int>& out) {
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v < n) {
            out.push_back(v);
        } else {
            stack.push_back(nodes[static_cast<std::size_t>(v)].left);
            stack.push_back(nodes[static_cast<std::size_t>(v)].right);
        }
    }
}

struct CondensedCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    int size_at_birth = 0;
    double sum_lambda_out = 0.0; // over all points that ever belonged to it
    std::vector<int> children;

    double stability() const {
        return sum_lambda_out - static_cast<double>(size_at_birth) * birth_lambda;
    }
};

struct CondensedTree {
    std::vector<CondensedCluster> clusters;
    std::vector<int> home; // per point: cluster it fell out of, -1 = none
};

CondensedTree condense(const std::vector<DendroNode>& nodes, int n, int min_cluster_size) {
    CondensedTree tree;
    tree.home.assign(static_cast<std::size_t>(n), -1);
    if (n < min_cluster_size) return tree; // no cluster can ever form

    tree.clusters.push_back(CondensedCluster{-1, 0.0, n, 0.0, {}});
    const int root = 2 * n - 2;
    std::vector<std::pair<int, int>> stack{{root, 0}}; // (dendrogram node, cluster)
    std::vector<int> leaves;
    while (!stack.empty()) {
        const auto [node_id, c] = stack.back();
        stack.pop_back();
        const DendroNode& node = nodes[static_cast<std::size_t>(node_id)];
        const double lambda = to_lambda(node.weight);
        const int sl = node.left < n ? 1 : nodes[static_cast<std::size_t>(node.left)].size;
        const int sr = node.right < n ? 1 : nodes[static_cast<std::size_t>(node.right)].size;
        auto& cluster = tree.clusters[static_cast<std::size_t>(c)];

        const bool left_big = sl >= min_cluster_size;
        const bool right_big = sr >= min_cluster_size;
        if (left_big && right_big) {
            // True split: every current point leaves c here.
            cluster.sum_lambda_out += static_cast<double>(sl + sr) * lambda;
            const int cl = static_cast<int>(tree.clusters.size());
            tree.clusters.push_back(CondensedCluster{c, lambda, sl, 0.0, {}});
            const int cr = static_cast<int>(tree.clusters.size());
            tree.clusters.push_back(CondensedCluster{c, lambda, sr, 0.0, {}});
            tree.clusters[static_cast<std::size_t>(c)].children = {cl, cr};
            stack.emplace_back(node.left, cl);
            stack.emplace_back(node.right, cr);
        } else if (left_big || right_big) {
            // The cluster lives on through the big child; the small side sheds.
            const int shed = left_big ? node.right : node.left;
            const int keep = left_big ? node.left : node.right;
            leaves.clear();
            collect_leaves(nodes, shed, n, leaves);
            cluster.sum_lambda_out += static_cast<double>(leaves.size()) * lambda;
            for (int p : leaves) tree.home[static_cast<std::size_t>(p)] = c;
            stack.emplace_back(keep, c);
        } else {
            // Both sides too small: the cluster dissolves here.
            cluster.sum_lambda_out += static_cast<double>(sl + sr) * lambda;
            leaves.clear();
            collect_leaves(nodes, node_id, n, leaves);
            for (int p : leaves) tree.home[static_cast<std::size_t>(p)] = c;
        }
    }
    return tree;
}

// Excess-of-mass: a cluster is kept when its stability reaches the summed
// stability of its selected descendants.
std::vector<bool> extract_eom(const CondensedTree& tree) {
    const std::size_t k = tree.clusters.size();
    std::vector<bool> selected(k, false);
    std::vector<double> subtree(k, 0.0);
    for (std::size_t idx = k; idx-- > 0;) { // children have larger ids
        const auto& c = tree.clusters[idx];
        double child_sum = 0.0;
        for (int ch : c.children) child_sum += subtree[static_cast<std::size_t>(ch)];
        if (c.children.empty() || c.stability() >= child_sum) {
            selected[idx] = true;
            subtree[idx] = c.stability();
        } else {
            subtree[idx] = child_sum;
        }
    }
    // A selected ancestor absorbs its descendants.
    for (std::size_t idx = 0; idx < k; ++idx) {
        if (!selected[idx]) continue;
        std::vector<int> stack(tree.clusters[idx].children);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            selected[static_cast<std::size_t>(v)] = false;
            for (int ch : tree.clusters[static_cast<std::size_t>(v)].children) stack.push_back(ch);
        }
    }
    return selected;
}

} // namespace

ClusterAssignment cluster_hdbscan(const SimilarityMatrix& m, int min_cluster_size,
                                  int min_samples) {
    if (!m.has_distances) throw DataError("cluster_hdbscan: distances not filled");
    const std::size_t n = m.size();

    ClusterAssignment out;
    if (n == 1) {
        out.assignment.emplace(m.tracklet_ids[0], 0);
        return out;
    }

    const std::vector<double> core = core_distances(m.D, min_samples);
    Matrix mreach(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = std::max({core[i], core[j], m.D.at(i, j)});
            mreach.at(i, j) = w;
            mreach.at(j, i) = w;
        }

    const auto nodes = build_hierarchy(mreach);
    const auto tree = condense(nodes, static_cast<int>(n), min_cluster_size);
    const auto selected = extract_eom(tree);

    std::vector<int> raw(n);
    for (std::size_t p = 0; p < n; ++p) {
        int c = tree.home[p];
        while (c != -1 && !selected[static_cast<std::size_t>(c)])
            c = tree.clusters[static_cast<std::size_t>(c)].parent;
        // Noise points stand alone so every tracklet still gets counted.
        raw[p] = c != -1 ? c : static_cast<int>(tree.clusters.size() + p);
    }

    std::map<int, int> relabel;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, _] = relabel.emplace(raw[i], static_cast<int>(relabel.size()));
        out.assignment.emplace(m.tracklet_ids[i], it->second);
    }
    return out;
}

} // namespace polypcount
