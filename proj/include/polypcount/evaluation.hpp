#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "polypcount/clustering.hpp"
#include "polypcount/tracklets.hpp"

namespace polypcount {

enum class FprConvention { pooled, per_video_mean };
enum class StdConvention { population, sample };
enum class SweepMode { closest_to_rho, max_merge_under_cap };

FprConvention parse_fpr_convention(const std::string& name);
StdConvention parse_std_convention(const std::string& name);
SweepMode parse_sweep_mode(const std::string& name);
std::string fpr_convention_name(FprConvention c);
std::string std_convention_name(StdConvention c);
std::string sweep_mode_name(SweepMode m);

struct VideoEval {
    double fr = 0.0;
    int n_clusters = 0;
    int n_entities = 0;
    double fpr = 0.0;
    bool converged = true;
};

struct EvalReport {
    std::map<std::string, VideoEval> per_video;
    double fr_macro = 0.0;
    double fr_std = 0.0;
    double fpr_pooled = 0.0;     // tracklet-pooled over the whole split
    double fpr_video_mean = 0.0; // macro over per-video FPRs
    double rho = 0.05;
    FprConvention fpr_convention = FprConvention::pooled;
    StdConvention std_convention = StdConvention::population;
    ClusteringConfig config;
    bool all_converged = true;

    // The FPR the selection criterion looks at under the configured convention.
    double fpr_selected() const;
};

// |distinct cluster ids| / |entity ids| for one video.
double fragmentation_rate(const ClusterAssignment& assignment, const VideoRecord& video);

// Pooled over videos: a tracklet is a false positive iff its entity differs
// from its cluster's majority entity (most member tracklets; ties by larger
// total frame count, then lexicographically smallest entity_id).
double false_positive_rate(const std::vector<ClusterAssignment>& assignments,
                           const std::vector<VideoRecord>& videos);

EvalReport evaluate(const std::vector<ClusterAssignment>& assignments,
                    const std::vector<VideoRecord>& videos, double rho,
                    FprConvention fpr_convention = FprConvention::pooled,
                    StdConvention std_convention = StdConvention::population,
                    const ClusteringConfig& config = {});

// Hyperparameter grid: ordered axes of JSON values (numbers, or strings for
// categorical fields such as the linkage). Grid order is the odometer over
// the axes in listed order with the last axis fastest.
struct SweepGrid {
    Algorithm algorithm = Algorithm::affinity_propagation;
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

    std::vector<ClusteringConfig> materialize() const; // throws ConfigError
};

// Per-video pipeline knobs shared by sweep and the commands.
struct PipelineParams {
    Metric metric = Metric::euclidean;
    int stride = 4;
    NormalizationVariant normalization = NormalizationVariant::off_diagonal;
    int parallelism = 0; // 0 = hardware concurrency
};

struct SweepEntry {
    std::size_t grid_index = 0;
    ClusteringConfig config;
    EvalReport report;
};

struct SweepResult {
    ClusteringConfig best_config;
    EvalReport best_report;
    std::vector<SweepEntry> ledger; // in grid order
};

// Evaluates every grid point on the validation videos. closest_to_rho picks
// the config minimizing |FPR - rho| (ties: smaller fr_macro, then grid
// order); max_merge_under_cap picks the smallest fr_macro among configs with
// FPR <= rho and falls back to closest_to_rho when none qualify.
SweepResult sweep(const SweepGrid& grid, const std::vector<VideoRecord>& videos_val,
                  const EmbeddingTable& embeddings, double rho,
                  SweepMode mode = SweepMode::closest_to_rho,
                  const PipelineParams& params = {},
                  FprConvention fpr_convention = FprConvention::pooled,
                  StdConvention std_convention = StdConvention::population);

// Pools all 2N vectors of the pairs; scores 1 when a vector's cosine
// nearest neighbour (lowest index wins ties) is its pair partner.
double top1_accuracy(const std::vector<std::pair<Vec, Vec>>& pairs);

// Runs one clustering config over a set of videos (the per-video pipeline:
// aggregate -> distances -> normalize -> cluster).
std::vector<ClusterAssignment> cluster_videos(const std::vector<VideoRecord>& videos,
                                              const EmbeddingTable& embeddings,
                                              const ClusteringConfig& config,
                                              const PipelineParams& params);

} // namespace polypcount
