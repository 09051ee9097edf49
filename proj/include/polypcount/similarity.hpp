#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "polypcount/embeddings.hpp"

namespace polypcount {

// Dense symmetric matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    std::size_t size() const { return n_; }
    double& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    bool empty() const { return n_ == 0; }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

// Per-video pairwise distances D and min-max normalized similarities S over
// tracklets, ids in lexicographic order.
struct SimilarityMatrix {
    std::vector<std::string> tracklet_ids;
    Matrix D;
    Matrix S;
    bool has_distances = false;
    bool has_similarities = false;

    std::size_t size() const { return tracklet_ids.size(); }
};

enum class Metric { euclidean, cosine };

// Whether the min/max of the normalization are taken over off-diagonal
// entries only (the default) or over the full matrix including the zero
// diagonal.
enum class NormalizationVariant { off_diagonal, full_matrix };

SimilarityMatrix distance_matrix(const std::map<std::string, Vec>& embeddings,
                                 Metric metric = Metric::euclidean);

// S_ij = 1 - (D_ij - d_min) / (d_max - d_min) off-diagonal, S_ii = 1.
// Degenerate inputs (n = 1, or d_max = d_min) map to all-ones.
void normalize_similarity(SimilarityMatrix& m,
                          NormalizationVariant variant = NormalizationVariant::off_diagonal);

Metric parse_metric(const std::string& name);
NormalizationVariant parse_normalization(const std::string& name);
std::string metric_name(Metric m);
std::string normalization_name(NormalizationVariant v);

// Debug dump: header row of tracklet ids, then one row per tracklet.
std::string matrix_csv(const SimilarityMatrix& m, bool similarities);

} // namespace polypcount
