#include "naive_hdbscan.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <set>

namespace polypcount::reference {

namespace {

constexpr double kLambdaMax = 1e12;

double to_lambda(double distance) {
    if (distance <= 0.0) return kLambdaMax;
    return std::min(1.0 / distance, kLambdaMax);
}

struct TreeNode {
    std::set<int> points;
    double weight = 0.0; // merge distance; 0 for leaves
    std::unique_ptr<TreeNode> left, right;

    bool leaf() const { return !left; }
};

Matrix mutual_reachability(const Matrix& D, int min_samples) {
    const std::size_t n = D.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(min_samples), n - 1);
    std::vector<double> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> others;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(D.at(i, j));
        std::sort(others.begin(), others.end());
        core[i] = others[k - 1];
    }
    Matrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) out.at(i, j) = std::max({core[i], core[j], D.at(i, j)});
    return out;
}

// Naive single linkage: at every round pick the cluster pair whose cheapest
// crossing edge (weight, i, j) is smallest.
std::unique_ptr<TreeNode> build_tree(const Matrix& mreach) {
    const std::size_t n = mreach.size();
    std::vector<std::unique_ptr<TreeNode>> forest;
    for (std::size_t i = 0; i < n; ++i) {
        auto node = std::make_unique<TreeNode>();
        node->points.insert(static_cast<int>(i));
        forest.push_back(std::move(node));
    }

    while (forest.size() > 1) {
        double best_w = std::numeric_limits<double>::infinity();
        int best_i = -1, best_j = -1;
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t a = 0; a < forest.size(); ++a) {
            for (std::size_t b = a + 1; b < forest.size(); ++b) {
                for (int p : forest[a]->points) {
                    for (int q : forest[b]->points) {
                        const int i = std::min(p, q), j = std::max(p, q);
                        const double w = mreach.at(static_cast<std::size_t>(i),
                                                   static_cast<std::size_t>(j));
                        const bool better =
                            w < best_w ||
                            (w == best_w && (i < best_i || (i == best_i && j < best_j)));
                        if (better) {
                            best_w = w;
                            best_i = i;
                            best_j = j;
                            best_a = a;
                            best_b = b;
                        }
                    }
                }
            }
        }
        auto node = std::make_unique<TreeNode>();
        node->weight = best_w;
        // left = side of the smaller endpoint of the winning edge
        const bool a_has_i = forest[best_a]->points.count(best_i) > 0;
        node->left = std::move(a_has_i ? forest[best_a] : forest[best_b]);
        node->right = std::move(a_has_i ? forest[best_b] : forest[best_a]);
        node->points = node->left->points;
        node->points.insert(node->right->points.begin(), node->right->points.end());
        forest.erase(forest.begin() + static_cast<std::ptrdiff_t>(best_b));
        forest[best_a] = std::move(node);
    }
    return std::move(forest.front());
}

struct RefCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    std::set<int> points_at_birth;
    std::map<int, double> leave_lambda; // every point leaves exactly once
    std::vector<int> children;

    double stability() const {
        double s = 0.0;
        for (const auto& [_, l] : leave_lambda) s += l - birth_lambda;
        return s;
    }
};

void condense(const TreeNode* node, int cluster, int min_cluster_size,
              std::vector<RefCluster>& clusters) {
    const double lambda = to_lambda(node->weight);
    const TreeNode* l = node->left.get();
    const TreeNode* r = node->right.get();
    const bool left_big = l->points.size() >= static_cast<std::size_t>(min_cluster_size);
    const bool right_big = r->points.size() >= static_cast<std::size_t>(min_cluster_size);

    if (left_big && right_big) {
        for (int p : node->points) clusters[static_cast<std::size_t>(cluster)].leave_lambda[p] = lambda;
        for (const TreeNode* child : {l, r}) {
            RefCluster next;
            next.parent = cluster;
            next.birth_lambda = lambda;
            next.points_at_birth = child->points;
            clusters.push_back(std::move(next));
            const int id = static_cast<int>(clusters.size()) - 1;
            clusters[static_cast<std::size_t>(cluster)].children.push_back(id);
            condense(child, id, min_cluster_size, clusters);
        }
    } else if (left_big || right_big) {
        const TreeNode* keep = left_big ? l : r;
        const TreeNode* shed = left_big ? r : l;
        for (int p : shed->points) clusters[static_cast<std::size_t>(cluster)].leave_lambda[p] = lambda;
        condense(keep, cluster, min_cluster_size, clusters);
    } else {
        for (int p : node->points) clusters[static_cast<std::size_t>(cluster)].leave_lambda[p] = lambda;
    }
}

double eom_select(const std::vector<RefCluster>& clusters, int id, std::set<int>& selected) {
    const RefCluster& c = clusters[static_cast<std::size_t>(id)];
    if (c.children.empty()) {
        selected.insert(id);
        return c.stability();
    }
    std::set<int> child_selected;
    double child_sum = 0.0;
    for (int ch : c.children) child_sum += eom_select(clusters, ch, child_selected);
    if (c.stability() >= child_sum) {
        selected.insert(id);
        return c.stability();
    }
    selected.insert(child_selected.begin(), child_selected.end());
    return child_sum;
}

} // namespace

std::vector<std::vector<int>> naive_hdbscan(const Matrix& D, int min_cluster_size,
                                            int min_samples) {
    const std::size_t n = D.size();
    if (n == 1) return {{0}};

    std::vector<std::vector<int>> partition;
    if (n < static_cast<std::size_t>(min_cluster_size)) {
        for (std::size_t p = 0; p < n; ++p) partition.push_back({static_cast<int>(p)});
        return partition;
    }

    const Matrix mreach = mutual_reachability(D, min_samples);
    const auto tree = build_tree(mreach);

    std::vector<RefCluster> clusters;
    RefCluster root;
    root.birth_lambda = 0.0;
    root.points_at_birth = tree->points;
    clusters.push_back(std::move(root));
    condense(tree.get(), 0, min_cluster_size, clusters);

    std::set<int> selected;
    eom_select(clusters, 0, selected);

    // A point is labeled by the unique selected cluster whose birth set
    // contains it (the selected set is an antichain); otherwise noise.
    std::map<int, std::vector<int>> groups;
    std::vector<int> noise;
    for (std::size_t p = 0; p < n; ++p) {
        int label = -1;
        for (int c : selected)
            if (clusters[static_cast<std::size_t>(c)].points_at_birth.count(static_cast<int>(p))) {
                label = c;
                break;
            }
        if (label >= 0) groups[label].push_back(static_cast<int>(p));
        else noise.push_back(static_cast<int>(p));
    }
    for (auto& [_, members] : groups) partition.push_back(members);
    for (int p : noise) partition.push_back({p});
    std::sort(partition.begin(), partition.end());
    return partition;
}

} // namespace polypcount::reference
