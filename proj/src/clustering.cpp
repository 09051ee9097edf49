#include "polypcount/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "polypcount/errors.hpp"

namespace polypcount {

using nlohmann::json;

Algorithm parse_algorithm(const std::string& name) {
    if (name == "threshold") return Algorithm::threshold;
    if (name == "agglomerative") return Algorithm::agglomerative;
    if (name == "hdbscan") return Algorithm::hdbscan;
    if (name == "affinity_propagation") return Algorithm::affinity_propagation;
    throw ConfigError("unknown clustering algorithm: " + name);
}

Linkage parse_linkage(const std::string& name) {
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    throw ConfigError("unknown linkage: " + name);
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::threshold: return "threshold";
        case Algorithm::agglomerative: return "agglomerative";
        case Algorithm::hdbscan: return "hdbscan";
        case Algorithm::affinity_propagation: return "affinity_propagation";
    }
    return "?";
}

std::string linkage_name(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "?";
}

void ClusteringConfig::validate() const {
    switch (algorithm) {
        case Algorithm::threshold:
            if (!(lambda >= 0.0 && lambda <= 1.0))
                throw ConfigError("threshold: lambda must be in [0, 1]");
            break;
        case Algorithm::agglomerative:
            if (!std::isfinite(distance_cutoff) || distance_cutoff < 0.0)
                throw ConfigError("agglomerative: distance_cutoff must be finite and >= 0");
            break;
        case Algorithm::hdbscan:
            if (min_cluster_size < 2) throw ConfigError("hdbscan: min_cluster_size must be >= 2");
            if (min_samples < 1) throw ConfigError("hdbscan: min_samples must be >= 1");
            break;
        case Algorithm::affinity_propagation:
            if (!(preference_quantile >= 0.0 && preference_quantile <= 1.0))
                throw ConfigError("affinity_propagation: preference_quantile must be in [0, 1]");
            if (!(damping >= 0.5 && damping < 1.0))
                throw ConfigError("affinity_propagation: damping must be in [0.5, 1)");
            if (max_iter < 1) throw ConfigError("affinity_propagation: max_iter must be >= 1");
            if (convergence_iter < 1)
                throw ConfigError("affinity_propagation: convergence_iter must be >= 1");
            break;
    }
}

int ClusterAssignment::cluster_count() const {
    std::set<int> ids;
    for (const auto& [_, c] : assignment) ids.insert(c);
    return static_cast<int>(ids.size());
}

namespace {

// Relabels raw per-index labels to contiguous ids (0, 1, ...) in order of
// first appearance over the lexicographically sorted tracklet ids.
ClusterAssignment make_assignment(const SimilarityMatrix& m, const std::vector<int>& raw,
                                  bool converged = true) {
    ClusterAssignment out;
    out.converged = converged;
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto [it, inserted] = relabel.emplace(raw[i], static_cast<int>(relabel.size()));
        out.assignment.emplace(m.tracklet_ids[i], it->second);
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b); // keep the smaller index as root
        parent[b] = a;
        return true;
    }
};

} // namespace

ClusterAssignment cluster_threshold(const SimilarityMatrix& m, double lambda) {
    if (!m.has_similarities) throw DataError("cluster_threshold: similarities not filled");
    const std::size_t n = m.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (m.S.at(i, j) >= lambda) uf.unite(static_cast<int>(i), static_cast<int>(j));
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = uf.find(static_cast<int>(i));
    return make_assignment(m, raw);
}

namespace {

// Linkage distance between two member lists, recomputed from D. Members are
// in ascending order so the average-linkage accumulation order is fixed.
double linkage_distance(const Matrix& D, const std::vector<int>& a,
                        const std::vector<int>& b, Linkage linkage) {
    double best = linkage == Linkage::complete ? -std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int x : a) {
        for (int y : b) {
            const double d = D.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            switch (linkage) {
                case Linkage::single: best = std::min(best, d); break;
                case Linkage::complete: best = std::max(best, d); break;
                case Linkage::average: sum += d; break;
            }
        }
    }
    if (linkage == Linkage::average)
        return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    return best;
}

} // namespace

ClusterAssignment cluster_agglomerative(const SimilarityMatrix& m, Linkage linkage,
                                        double distance_cutoff) {
    if (!m.has_distances) throw DataError("cluster_agglomerative: distances not filled");
    const std::size_t n = m.size();

    std::vector<std::vector<int>> members(n);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

    // Cached pairwise linkage distances between alive clusters (slot-indexed).
    std::vector<std::vector<double>> link(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            link[i][j] = m.D.at(i, j);

    std::size_t alive_count = n;
    while (alive_count > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                const double d = link[i][j];
                // Slots are ordered by representative (smallest member), so the
                // first minimum encountered is the tie-broken (i, j) pair.
                if (!found || d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found || best > distance_cutoff) break;

        // Merge into the slot with the smaller representative.
        std::vector<int> merged;
        merged.reserve(members[bi].size() + members[bj].size());
        std::merge(members[bi].begin(), members[bi].end(), members[bj].begin(),
                   members[bj].end(), std::back_inserter(merged));
        members[bi] = std::move(merged);
        alive[bj] = false;
        --alive_count;
        for (std::size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi) continue;
            const double d = linkage_distance(m.D, members[std::min(bi, k)],
                                              members[std::max(bi, k)], linkage);
            link[std::min(bi, k)][std::max(bi, k)] = d;
        }
    }

    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i])
            for (int member : members[i]) raw[static_cast<std::size_t>(member)] = static_cast<int>(i);
    return make_assignment(m, raw);
}

ClusterAssignment cluster(const SimilarityMatrix& m, const ClusteringConfig& cfg) {
    cfg.validate();
    if (m.size() == 0) return ClusterAssignment{};
    switch (cfg.algorithm) {
        case Algorithm::threshold:
            return cluster_threshold(m, cfg.lambda);
        case Algorithm::agglomerative:
            return cluster_agglomerative(m, cfg.linkage, cfg.distance_cutoff);
        case Algorithm::hdbscan:
            return cluster_hdbscan(m, cfg.min_cluster_size, cfg.min_samples);
        case Algorithm::affinity_propagation:
            return cluster_affinity_propagation(m, cfg.preference_quantile, cfg.damping,
                                                cfg.max_iter, cfg.convergence_iter,
                                                cfg.jitter_seed);
    }
    throw ConfigError("cluster: unknown algorithm");
}

json clustering_config_to_json(const ClusteringConfig& cfg) {
    json j;
    j["algorithm"] = algorithm_name(cfg.algorithm);
    switch (cfg.algorithm) {
        case Algorithm::threshold:
            j["lambda"] = cfg.lambda;
            break;
        case Algorithm::agglomerative:
            j["linkage"] = linkage_name(cfg.linkage);
            j["distance_cutoff"] = cfg.distance_cutoff;
            break;
        case Algorithm::hdbscan:
            j["min_cluster_size"] = cfg.min_cluster_size;
            j["min_samples"] = cfg.min_samples;
            break;
        case Algorithm::affinity_propagation:
            j["preference_quantile"] = cfg.preference_quantile;
            j["damping"] = cfg.damping;
            j["max_iter"] = cfg.max_iter;
            j["convergence_iter"] = cfg.convergence_iter;
            j["jitter_seed"] = cfg.jitter_seed;
            break;
    }
    return j;
}

ClusteringConfig clustering_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("clustering config must be a JSON object");
    if (!j.contains("algorithm") || !j["algorithm"].is_string())
        throw ConfigError("clustering config needs an \"algorithm\" string");

    ClusteringConfig cfg;
    cfg.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    static const std::set<std::string> known = {
        "algorithm",       "lambda",        "linkage",          "distance_cutoff",
        "min_cluster_size", "min_samples",  "preference_quantile", "damping",
        "max_iter",        "convergence_iter", "jitter_seed"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("clustering config: unknown field \"" + key + "\"");

    auto num = [&](const char* key, double& dst) {
        if (j.contains(key)) {
            if (!j[key].is_number()) throw ConfigError(std::string("clustering config: \"") + key + "\" must be a number");
            dst = j[key].get<double>();
        }
    };
    auto integer = [&](const char* key, int& dst) {
        if (j.contains(key)) {
            if (!j[key].is_number_integer()) throw ConfigError(std::string("clustering config: \"") + key + "\" must be an integer");
            dst = j[key].get<int>();
        }
    };
    num("lambda", cfg.lambda);
    if (j.contains("linkage")) {
        if (!j["linkage"].is_string()) throw ConfigError("clustering config: \"linkage\" must be a string");
        cfg.linkage = parse_linkage(j["linkage"].get<std::string>());
    }
    num("distance_cutoff", cfg.distance_cutoff);
    integer("min_cluster_size", cfg.min_cluster_size);
    integer("min_samples", cfg.min_samples);
    num("preference_quantile", cfg.preference_quantile);
    num("damping", cfg.damping);
    integer("max_iter", cfg.max_iter);
    integer("convergence_iter", cfg.convergence_iter);
    if (j.contains("jitter_seed")) {
        if (!j["jitter_seed"].is_number_integer())
            throw ConfigError("clustering config: \"jitter_seed\" must be an integer");
        cfg.jitter_seed = j["jitter_seed"].get<std::uint64_t>();
    }
    cfg.validate();
    return cfg;
}

json assignment_to_json(const ClusterAssignment& a) {
    json clusters = json::object();
    for (const auto& [tid, cid] : a.assignment) clusters[tid] = cid;
    return json{{"video_id", a.video_id}, {"clusters", clusters}, {"converged", a.converged}};
}

ClusterAssignment assignment_from_json(const json& j) {
    if (!j.is_object() || !j.contains("video_id") || !j.contains("clusters"))
        throw DataError("assignment JSON needs \"video_id\" and \"clusters\"");
    ClusterAssignment a;
    a.video_id = j["video_id"].get<std::string>();
    a.converged = j.value("converged", true);
    for (const auto& [tid, cid] : j["clusters"].items()) {
        if (!cid.is_number_integer() || cid.get<int>() < 0)
            throw DataError("assignment JSON: cluster ids must be non-negative integers");
        a.assignment.emplace(tid, cid.get<int>());
    }
    return a;
}

} // namespace polypcount
