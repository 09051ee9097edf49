#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "polypcount/clustering.hpp"
#include "polypcount/errors.hpp"
#include "polypcount/rng.hpp"

namespace polypcount {

namespace {

// Type-7 quantile (linear interpolation) of a copy of the values.
double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

} // namespace

APResult affinity_propagation_raw(const SimilarityMatrix& m, double preference_quantile,
                                  double damping, int max_iter, int convergence_iter,
                                  std::uint64_t jitter_seed) {
    if (!m.has_similarities)
        throw DataError("affinity_propagation: similarities not filled");
    const std::size_t n = m.size();

    APResult result;
    if (n == 1) {
        result.exemplar_of = {0};
        result.converged = true;
        result.preference = 1.0;
        return result;
    }

    // Preference from the upper-triangle similarities, then a deterministic
    // tiny jitter on the whole matrix to break symmetric degeneracies.
    std::vector<double> off_diag;
    off_diag.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) off_diag.push_back(m.S.at(i, j));
    result.preference = quantile(off_diag, preference_quantile);

    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            s[i * n + j] = i == j ? result.preference : m.S.at(i, j);
    Rng rng(jitter_seed);
    for (double& v : s) v += 1e-9 * rng.uniform01();

    std::vector<double> r(n * n, 0.0), a(n * n, 0.0);
    std::vector<bool> exemplar(n, false);
    int stable = 0;
    bool converged = false;

    // A stable exemplar set alone is not enough: under heavy damping the set
    // can sit unchanged through a long transient while the messages are still
    // drifting toward a different fixed point. Convergence additionally
    // requires the message updates to have settled.
    constexpr double kSettleTol = 1e-9;

    for (int iter = 0; iter < max_iter; ++iter) {
        double max_delta = 0.0;

        // r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        for (std::size_t i = 0; i < n; ++i) {
            double max1 = -std::numeric_limits<double>::infinity();
            double max2 = max1;
            std::size_t arg1 = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const double v = a[i * n + k] + s[i * n + k];
                if (v > max1) {
                    max2 = max1;
                    max1 = v;
                    arg1 = k;
                } else if (v > max2) {
                    max2 = v;
                }
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double target = s[i * n + k] - (k == arg1 ? max2 : max1);
                const double next = damping * r[i * n + k] + (1.0 - damping) * target;
                max_delta = std::max(max_delta, std::abs(next - r[i * n + k]));
                r[i * n + k] = next;
            }
        }

        // a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)));
        // a(k,k) <- sum_{i' != k} max(0, r(i',k))
        for (std::size_t k = 0; k < n; ++k) {
            double pos_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (i != k) pos_sum += std::max(0.0, r[i * n + k]);
            for (std::size_t i = 0; i < n; ++i) {
                const double target =
                    i == k ? pos_sum
                           : std::min(0.0, r[k * n + k] + pos_sum - std::max(0.0, r[i * n + k]));
                const double next = damping * a[i * n + k] + (1.0 - damping) * target;
                max_delta = std::max(max_delta, std::abs(next - a[i * n + k]));
                a[i * n + k] = next;
            }
        }

        bool any = false, changed = false;
        for (std::size_t k = 0; k < n; ++k) {
            const bool e = a[k * n + k] + r[k * n + k] > 0.0;
            if (e != exemplar[k]) changed = true;
            exemplar[k] = e;
            any = any || e;
        }
        stable = changed ? 1 : stable + 1;
        if (!changed && any && stable >= convergence_iter && max_delta <= kSettleTol) {
            converged = true;
            break;
        }
    }

    std::vector<std::size_t> exemplars;
    for (std::size_t k = 0; k < n; ++k)
        if (exemplar[k]) exemplars.push_back(k);
    if (exemplars.empty()) {
        // No exemplar emerged; take the best self-affinity so the result is
        // still a partition.
        std::size_t best = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (a[k * n + k] + r[k * n + k] > a[best * n + best] + r[best * n + best]) best = k;
        exemplars.push_back(best);
    }

    auto assign_all = [&](std::vector<int>& out) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = exemplars[0];
            for (std::size_t k : exemplars)
                if (s[i * n + k] > s[i * n + best]) best = k;
            out[i] = static_cast<int>(best);
        }
        for (std::size_t k : exemplars) out[k] = static_cast<int>(k);
    };
    assign_all(result.exemplar_of);

    // Refinement pass (as in the reference implementation): within each
    // cluster re-pick the member that maximizes the summed similarity to the
    // cluster, then reassign everybody once.
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i)
        clusters[result.exemplar_of[i]].push_back(i);
    exemplars.clear();
    for (const auto& [_, members] : clusters) {
        std::size_t best = members.front();
        double best_sum = -std::numeric_limits<double>::infinity();
        for (std::size_t e : members) {
            double sum = 0.0;
            for (std::size_t i : members) sum += s[i * n + e];
            if (sum > best_sum) {
                best_sum = sum;
                best = e;
            }
        }
        exemplars.push_back(best);
    }
    std::sort(exemplars.begin(), exemplars.end());
    assign_all(result.exemplar_of);

    result.converged = converged;
    return result;
}

ClusterAssignment cluster_affinity_propagation(const SimilarityMatrix& m,
                                               double preference_quantile, double damping,
                                               int max_iter, int convergence_iter,
                                               std::uint64_t jitter_seed) {
    const APResult raw = affinity_propagation_raw(m, preference_quantile, damping, max_iter,
                                                  convergence_iter, jitter_seed);
    ClusterAssignment out;
    out.converged = raw.converged;
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto [it, _] = relabel.emplace(raw.exemplar_of[i], static_cast<int>(relabel.size()));
        out.assignment.emplace(m.tracklet_ids[i], it->second);
    }
    return out;
}

} // namespace polypcount
