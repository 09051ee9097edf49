#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

#include "polypcount/similarity.hpp"

namespace polypcount {

enum class Algorithm { threshold, agglomerative, hdbscan, affinity_propagation };
enum class Linkage { single, complete, average };

Algorithm parse_algorithm(const std::string& name);
Linkage parse_linkage(const std::string& name);
std::string algorithm_name(Algorithm a);
std::string linkage_name(Linkage l);

// One config struct for all four algorithms; only the fields of the selected
// algorithm are consulted.
struct ClusteringConfig {
    Algorithm algorithm = Algorithm::threshold;

    // threshold
    double lambda = 0.5;

    // agglomerative
    Linkage linkage = Linkage::average;
    double distance_cutoff = 0.0;

    // hdbscan
    int min_cluster_size = 2;
    int min_samples = 1;

    // affinity propagation
    double preference_quantile = 0.5;
    double damping = 0.9;
    int max_iter = 1000;
    int convergence_iter = 50;
    std::uint64_t jitter_seed = 0;

    void validate() const; // throws ConfigError on out-of-bounds fields
};

// Partition of one video's tracklets; cluster ids are contiguous from 0 in
// order of first appearance over the lexicographically sorted tracklet ids.
struct ClusterAssignment {
    std::string video_id;
    std::map<std::string, int> assignment;
    bool converged = true; // affinity propagation sets this

    int cluster_count() const;
};

// Connected components of the graph {(i,j) : i != j, S_ij >= lambda}.
ClusterAssignment cluster_threshold(const SimilarityMatrix& m, double lambda);

// Bottom-up merging on D; stops when the minimal inter-cluster linkage
// distance exceeds the cutoff. Ties go to the smallest (i, j) pair of
// cluster representatives (representative = smallest member index).
ClusterAssignment cluster_agglomerative(const SimilarityMatrix& m, Linkage linkage,
                                        double distance_cutoff);

// Core distances -> mutual reachability -> single-linkage hierarchy ->
// condensed tree at min_cluster_size -> excess-of-mass extraction. Noise
// points come back as singleton clusters so every tracklet is counted.
ClusterAssignment cluster_hdbscan(const SimilarityMatrix& m, int min_cluster_size,
                                  int min_samples);

// Affinity propagation on S. The diagonal (preference) is set to the given
// quantile of the off-diagonal similarities; a deterministic 1e-9 jitter
// breaks degeneracies. Non-convergence is flagged, not an error.
ClusterAssignment cluster_affinity_propagation(const SimilarityMatrix& m,
                                               double preference_quantile,
                                               double damping, int max_iter,
                                               int convergence_iter,
                                               std::uint64_t jitter_seed);

// Low-level affinity propagation result: per-point exemplar indices into the
// matrix order (exemplars point at themselves) plus the preference used.
struct APResult {
    std::vector<int> exemplar_of;
    double preference = 0.0;
    bool converged = false;
};

APResult affinity_propagation_raw(const SimilarityMatrix& m, double preference_quantile,
                                  double damping, int max_iter, int convergence_iter,
                                  std::uint64_t jitter_seed);

// Dispatch on cfg.algorithm. An empty matrix yields an empty assignment.
ClusterAssignment cluster(const SimilarityMatrix& m, const ClusteringConfig& cfg);

// JSON round-trip of the config (only the selected algorithm's fields are
// serialized) and of assignments.
nlohmann::json clustering_config_to_json(const ClusteringConfig& cfg);
ClusteringConfig clustering_config_from_json(const nlohmann::json& j);
nlohmann::json assignment_to_json(const ClusterAssignment& a);
ClusterAssignment assignment_from_json(const nlohmann::json& j);

} // namespace polypcount
