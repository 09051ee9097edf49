#include "polypcount/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "polypcount/errors.hpp"

namespace polypcount {

namespace {

double euclidean(const Vec& a, const Vec& b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        d2 += diff * diff;
    }
    return std::sqrt(d2);
}

double cosine_distance(const Vec& a, const Vec& b, const std::string& id_a,
                       const std::string& id_b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0)
        throw DataError("cosine distance undefined for zero vector (" +
                        (na == 0.0 ? id_a : id_b) + ")");
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return 1.0 - std::clamp(c, -1.0, 1.0);
}

} // namespace

SimilarityMatrix distance_matrix(const std::map<std::string, Vec>& embeddings, Metric metric) {
    if (embeddings.empty()) throw DataError("distance_matrix: no embeddings");

    SimilarityMatrix m;
    m.tracklet_ids.reserve(embeddings.size());
    for (const auto& [id, _] : embeddings) m.tracklet_ids.push_back(id);

    const std::size_t dim = embeddings.begin()->second.size();
    for (const auto& [id, v] : embeddings) {
        if (v.size() != dim)
            throw DataError("distance_matrix: dimension mismatch for \"" + id + "\" (" +
                            std::to_string(v.size()) + " vs " + std::to_string(dim) + ")");
        for (double x : v)
            if (!std::isfinite(x))
                throw DataError("distance_matrix: non-finite embedding for \"" + id + "\"");
    }

    const std::size_t n = m.tracklet_ids.size();
    m.D = Matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& vi = embeddings.at(m.tracklet_ids[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec& vj = embeddings.at(m.tracklet_ids[j]);
            const double d = metric == Metric::euclidean
                                 ? euclidean(vi, vj)
                                 : cosine_distance(vi, vj, m.tracklet_ids[i], m.tracklet_ids[j]);
            m.D.at(i, j) = d;
            m.D.at(j, i) = d;
        }
    }
    m.has_distances = true;
    return m;
}

void normalize_similarity(SimilarityMatrix& m, NormalizationVariant variant) {
    if (!m.has_distances) throw DataError("normalize_similarity: distances not filled");
    const std::size_t n = m.size();
    m.S = Matrix(n, 1.0);
    m.has_similarities = true;
    if (n <= 1) return;

    double d_min = std::numeric_limits<double>::infinity();
    double d_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (variant == NormalizationVariant::off_diagonal && i == j) continue;
            d_min = std::min(d_min, m.D.at(i, j));
            d_max = std::max(d_max, m.D.at(i, j));
        }
    }
    if (d_max == d_min) return; // no discriminative signal; S stays all-ones

    const double range = d_max - d_min;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) m.S.at(i, j) = 1.0 - (m.D.at(i, j) - d_min) / range;
}

Metric parse_metric(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    throw ConfigError("unknown metric: " + name);
}

NormalizationVariant parse_normalization(const std::string& name) {
    if (name == "off_diagonal") return NormalizationVariant::off_diagonal;
    if (name == "full_matrix") return NormalizationVariant::full_matrix;
    throw ConfigError("unknown normalization variant: " + name);
}

std::string metric_name(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "cosine";
}

std::string normalization_name(NormalizationVariant v) {
    return v == NormalizationVariant::off_diagonal ? "off_diagonal" : "full_matrix";
}

std::string matrix_csv(const SimilarityMatrix& m, bool similarities) {
    if (similarities && !m.has_similarities)
        throw DataError("matrix_csv: similarities not filled");
    if (!similarities && !m.has_distances)
        throw DataError("matrix_csv: distances not filled");
    const Matrix& mat = similarities ? m.S : m.D;
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t i = 0; i < m.size(); ++i)
        out << ',' << m.tracklet_ids[i];
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.tracklet_ids[i];
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << mat.at(i, j);
        out << '\n';
    }
    return out.str();
}

} // namespace polypcount
