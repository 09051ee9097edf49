#include "polypcount/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polypcount/errors.hpp"
#include "parallel.hpp"

namespace polypcount {

using nlohmann::json;

FprConvention parse_fpr_convention(const std::string& name) {
    if (name == "pooled") return FprConvention::pooled;
    if (name == "per_video_mean") return FprConvention::per_video_mean;
    throw ConfigError("unknown fpr convention: " + name);
}

StdConvention parse_std_convention(const std::string& name) {
    if (name == "population") return StdConvention::population;
    if (name == "sample") return StdConvention::sample;
    throw ConfigError("unknown std convention: " + name);
}

SweepMode parse_sweep_mode(const std::string& name) {
    if (name == "closest_to_rho") return SweepMode::closest_to_rho;
    if (name == "max_merge_under_cap") return SweepMode::max_merge_under_cap;
    throw ConfigError("unknown sweep mode: " + name);
}

std::string fpr_convention_name(FprConvention c) {
    return c == FprConvention::pooled ? "pooled" : "per_video_mean";
}

std::string std_convention_name(StdConvention c) {
    return c == StdConvention::population ? "population" : "sample";
}

std::string sweep_mode_name(SweepMode m) {
    return m == SweepMode::closest_to_rho ? "closest_to_rho" : "max_merge_under_cap";
}

double EvalReport::fpr_selected() const {
    return fpr_convention == FprConvention::pooled ? fpr_pooled : fpr_video_mean;
}

namespace {

void check_coverage(const ClusterAssignment& assignment, const VideoRecord& video) {
    if (assignment.assignment.size() != video.tracklets.size()) {
        std::ostringstream msg;
        msg << "assignment for video " << video.video_id << " covers "
            << assignment.assignment.size() << " tracklets, video has "
            << video.tracklets.size();
        throw DataError(msg.str());
    }
    for (const auto& t : video.tracklets)
        if (!assignment.assignment.count(t.tracklet_id))
            throw DataError("assignment for video " + video.video_id +
                            " is missing tracklet \"" + t.tracklet_id + "\"");
}

struct FpCount {
    std::size_t false_positives = 0;
    std::size_t total = 0;
};

// Majority entity per cluster: most member tracklets, ties by larger total
// frame count, then lexicographically smallest entity id.
FpCount count_false_positives(const ClusterAssignment& assignment, const VideoRecord& video) {
    check_coverage(assignment, video);

    struct EntityStats {
        std::size_t tracklets = 0;
        std::size_t frames = 0;
    };
    std::map<int, std::map<std::string, EntityStats>> clusters;
    for (const auto& t : video.tracklets) {
        auto& stats = clusters[assignment.assignment.at(t.tracklet_id)][t.entity_id];
        stats.tracklets += 1;
        stats.frames += t.length();
    }

    FpCount out;
    out.total = video.tracklets.size();
    std::map<int, std::string> majority;
    for (const auto& [cid, entities] : clusters) {
        const std::string* best = nullptr;
        EntityStats best_stats;
        for (const auto& [entity, stats] : entities) {
            const bool wins =
                best == nullptr || stats.tracklets > best_stats.tracklets ||
                (stats.tracklets == best_stats.tracklets && stats.frames > best_stats.frames);
            // entities iterate in ascending order, so on full ties the
            // lexicographically smallest entity is kept.
            if (wins) {
                best = &entity;
                best_stats = stats;
            }
        }
        majority[cid] = *best;
    }
    for (const auto& t : video.tracklets)
        if (t.entity_id != majority[assignment.assignment.at(t.tracklet_id)])
            ++out.false_positives;
    return out;
}

const VideoRecord& find_video(const std::vector<VideoRecord>& videos, const std::string& id) {
    for (const auto& v : videos)
        if (v.video_id == id) return v;
    throw DataError("no video record for assignment video \"" + id + "\"");
}

} // namespace

double fragmentation_rate(const ClusterAssignment& assignment, const VideoRecord& video) {
    check_coverage(assignment, video);
    if (video.entity_ids.empty())
        throw DataError("video " + video.video_id + " has no entities");
    return static_cast<double>(assignment.cluster_count()) /
           static_cast<double>(video.entity_ids.size());
}

double false_positive_rate(const std::vector<ClusterAssignment>& assignments,
                           const std::vector<VideoRecord>& videos) {
    if (assignments.size() != videos.size())
        throw DataError("false_positive_rate: one assignment per video required");
    FpCount pooled;
    for (const auto& a : assignments) {
        const FpCount c = count_false_positives(a, find_video(videos, a.video_id));
        pooled.false_positives += c.false_positives;
        pooled.total += c.total;
    }
    if (pooled.total == 0) throw DataError("false_positive_rate: no tracklets");
    return static_cast<double>(pooled.false_positives) / static_cast<double>(pooled.total);
}

EvalReport evaluate(const std::vector<ClusterAssignment>& assignments,
                    const std::vector<VideoRecord>& videos, double rho,
                    FprConvention fpr_convention, StdConvention std_convention,
                    const ClusteringConfig& config) {
    if (videos.empty()) throw DataError("evaluate: empty video list");
    if (assignments.size() != videos.size())
        throw DataError("evaluate: one assignment per video required");

    EvalReport report;
    report.rho = rho;
    report.fpr_convention = fpr_convention;
    report.std_convention = std_convention;
    report.config = config;

    FpCount pooled;
    double fr_sum = 0.0, fpr_sum = 0.0;
    for (const auto& a : assignments) {
        const VideoRecord& video = find_video(videos, a.video_id);
        if (report.per_video.count(video.video_id))
            throw DataError("evaluate: duplicate assignment for video " + video.video_id);
        VideoEval ve;
        ve.fr = fragmentation_rate(a, video);
        ve.n_clusters = a.cluster_count();
        ve.n_entities = static_cast<int>(video.entity_ids.size());
        const FpCount c = count_false_positives(a, video);
        ve.fpr = c.total > 0 ? static_cast<double>(c.false_positives) / static_cast<double>(c.total)
                             : 0.0;
        ve.converged = a.converged;
        report.all_converged = report.all_converged && a.converged;
        pooled.false_positives += c.false_positives;
        pooled.total += c.total;
        fr_sum += ve.fr;
        fpr_sum += ve.fpr;
        report.per_video.emplace(video.video_id, ve);
    }

    const double n = static_cast<double>(videos.size());
    report.fr_macro = fr_sum / n;
    double var = 0.0;
    for (const auto& [_, ve] : report.per_video) {
        const double d = ve.fr - report.fr_macro;
        var += d * d;
    }
    if (std_convention == StdConvention::population) {
        report.fr_std = std::sqrt(var / n);
    } else {
        report.fr_std = videos.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    }
    if (pooled.total == 0) throw DataError("evaluate: no tracklets in any video");
    report.fpr_pooled = static_cast<double>(pooled.false_positives) /
                        static_cast<double>(pooled.total);
    report.fpr_video_mean = fpr_sum / n;
    return report;
}

std::vector<ClusterAssignment> cluster_videos(const std::vector<VideoRecord>& videos,
                                              const EmbeddingTable& embeddings,
                                              const ClusteringConfig& config,
                                              const PipelineParams& params) {
    std::vector<ClusterAssignment> out(videos.size());
    parallel_for(videos.size(), params.parallelism, [&](std::size_t i) {
        const VideoRecord& video = videos[i];
        ClusterAssignment a;
        if (!video.tracklets.empty()) {
            const auto embs = tracklet_embeddings(video, embeddings, params.stride);
            SimilarityMatrix m = distance_matrix(embs, params.metric);
            normalize_similarity(m, params.normalization);
            a = cluster(m, config);
        }
        a.video_id = video.video_id;
        out[i] = std::move(a);
    });
    return out;
}

std::vector<ClusteringConfig> SweepGrid::materialize() const {
    if (axes.empty()) throw ConfigError("sweep grid has no axes");
    for (const auto& [name, values] : axes)
        if (values.empty()) throw ConfigError("sweep axis \"" + name + "\" has no values");

    auto apply = [](ClusteringConfig& cfg, const std::string& name, const json& value) {
        auto number = [&]() -> double {
            if (!value.is_number())
                throw ConfigError("sweep axis \"" + name + "\" needs numeric values");
            return value.get<double>();
        };
        auto integer = [&]() -> int {
            if (!value.is_number_integer())
                throw ConfigError("sweep axis \"" + name + "\" needs integer values");
            return value.get<int>();
        };
        if (name == "lambda") cfg.lambda = number();
        else if (name == "linkage") {
            if (!value.is_string()) throw ConfigError("sweep axis \"linkage\" needs string values");
            cfg.linkage = parse_linkage(value.get<std::string>());
        } else if (name == "distance_cutoff") cfg.distance_cutoff = number();
        else if (name == "min_cluster_size") cfg.min_cluster_size = integer();
        else if (name == "min_samples") cfg.min_samples = integer();
        else if (name == "preference_quantile") cfg.preference_quantile = number();
        else if (name == "damping") cfg.damping = number();
        else if (name == "max_iter") cfg.max_iter = integer();
        else if (name == "convergence_iter") cfg.convergence_iter = integer();
        else if (name == "jitter_seed") cfg.jitter_seed = value.get<std::uint64_t>();
        else throw ConfigError("unknown sweep axis \"" + name + "\"");
    };

    std::size_t total = 1;
    for (const auto& [_, values] : axes) total *= values.size();

    std::vector<ClusteringConfig> configs;
    configs.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t g = 0; g < total; ++g) {
        ClusteringConfig cfg;
        cfg.algorithm = algorithm;
        for (std::size_t ax = 0; ax < axes.size(); ++ax)
            apply(cfg, axes[ax].first, axes[ax].second[idx[ax]]);
        cfg.validate();
        configs.push_back(cfg);
        // odometer, last axis fastest
        for (std::size_t ax = axes.size(); ax-- > 0;) {
            if (++idx[ax] < axes[ax].second.size()) break;
            idx[ax] = 0;
        }
    }
    return configs;
}

SweepResult sweep(const SweepGrid& grid, const std::vector<VideoRecord>& videos_val,
                  const EmbeddingTable& embeddings, double rho, SweepMode mode,
                  const PipelineParams& params, FprConvention fpr_convention,
                  StdConvention std_convention) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("sweep: rho must be in (0, 1)");
    if (videos_val.empty()) throw DataError("sweep: no validation videos");
    const std::vector<ClusteringConfig> configs = grid.materialize();

    std::vector<SweepEntry> ledger(configs.size());
    parallel_for(configs.size(), params.parallelism, [&](std::size_t g) {
        PipelineParams inner = params;
        inner.parallelism = 1; // grid points already run in parallel
        const auto assignments = cluster_videos(videos_val, embeddings, configs[g], inner);
        ledger[g] = SweepEntry{g, configs[g],
                               evaluate(assignments, videos_val, rho, fpr_convention,
                                        std_convention, configs[g])};
    });

    // closest_to_rho: min |fpr - rho|, ties by smaller fr_macro, then grid order.
    auto closest = [&]() -> std::size_t {
        std::size_t best = 0;
        for (std::size_t g = 1; g < ledger.size(); ++g) {
            const double db = std::abs(ledger[best].report.fpr_selected() - rho);
            const double dg = std::abs(ledger[g].report.fpr_selected() - rho);
            if (dg < db || (dg == db && ledger[g].report.fr_macro < ledger[best].report.fr_macro))
                best = g;
        }
        return best;
    };

    std::size_t winner;
    if (mode == SweepMode::max_merge_under_cap) {
        bool found = false;
        std::size_t best = 0;
        for (std::size_t g = 0; g < ledger.size(); ++g) {
            if (ledger[g].report.fpr_selected() > rho) continue;
            if (!found || ledger[g].report.fr_macro < ledger[best].report.fr_macro) {
                best = g;
                found = true;
            }
        }
        winner = found ? best : closest();
    } else {
        winner = closest();
    }

    return SweepResult{ledger[winner].config, ledger[winner].report, std::move(ledger)};
}

double top1_accuracy(const std::vector<std::pair<Vec, Vec>>& pairs) {
    if (pairs.size() < 2) throw DataError("top1_accuracy: need at least 2 pairs");
    const std::size_t dim = pairs.front().first.size();

    std::vector<const Vec*> pool;
    pool.reserve(pairs.size() * 2);
    for (const auto& [a, b] : pairs) {
        pool.push_back(&a);
        pool.push_back(&b);
    }
    std::vector<double> norms(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i]->size() != dim) throw DataError("top1_accuracy: dimension mismatch");
        double n2 = 0.0;
        for (double x : *pool[i]) n2 += x * x;
        if (n2 == 0.0) throw DataError("top1_accuracy: zero vector (cosine undefined)");
        norms[i] = std::sqrt(n2);
    }

    std::size_t hits = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (j == i) continue;
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += (*pool[i])[d] * (*pool[j])[d];
            const double sim = dot / (norms[i] * norms[j]);
            if (sim > best) { // strict: ties keep the lowest index
                best = sim;
                best_j = j;
            }
        }
        const std::size_t partner = i ^ 1;
        if (best_j == partner) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pool.size());
}

} // namespace polypcount
