#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "polypcount/embeddings.hpp"
#include "polypcount/evaluation.hpp"
#include "polypcount/sampling.hpp"

namespace polypcount {

// Resolved run configuration; mirrors the JSON config file. Flags from the
// CLI override individual fields before resolution.
struct RunConfig {
    std::string annotations_path;
    std::string embeddings_path;
    std::string manifest_path;
    std::string output_dir;
    std::string split = "test"; // train | val | test | all

    Metric metric = Metric::euclidean;
    int stride = 4;
    NormalizationVariant normalization = NormalizationVariant::off_diagonal;
    double iou_min = 0.1;
    double rho = 0.05;
    FprConvention fpr_convention = FprConvention::pooled;
    StdConvention std_convention = StdConvention::population;
    SweepMode sweep_mode = SweepMode::closest_to_rho;
    int parallelism = 0; // 0 = all cores
    std::uint64_t seed = 0;
    bool strict = false; // CLI exits 4 when a result is non-converged

    std::optional<ClusteringConfig> clustering;
    std::optional<SweepGrid> grid;
    std::optional<SynthConfig> synth;
    SamplingConfig sampling;
    // Video counts per split written by cmd_synth; -1 = derive from n_videos.
    int synth_train = 0;
    int synth_val = -1;
    int synth_test = -1;

    std::string report_path;      // input of cmd_eval / cmd_report
    std::string assignments_path; // input of cmd_eval

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

// Exit status shared by the commands and the C API.
enum class Status : int {
    ok = 0,
    config_error = 2,
    data_error = 3,
    non_convergence = 4,
};

// Per-video tracklet listings plus the identity-clustering (No ReID)
// fragmentation table.
Status cmd_tracklets(const RunConfig& run);

// Writes annotations + embeddings + manifest for a synthetic dataset.
Status cmd_synth(const RunConfig& run);

// Full pipeline with a fixed clustering config; writes assignments and the
// evaluation report.
Status cmd_cluster(const RunConfig& run);

// Sweeps the grid on the validation split, freezes the winner, evaluates it
// once on the test split. Test videos never influence selection.
Status cmd_sweep(const RunConfig& run);

// Re-evaluates stored assignments against the annotations.
Status cmd_eval(const RunConfig& run);

// Renders a stored report (or sweep ledger) as a text table; returns it via
// out_text and also writes it next to the input when output_dir is set.
Status cmd_report(const RunConfig& run, std::string& out_text);

// Dumps sampled index pairs as CSV (inspection aid for the samplers).
Status cmd_sample_dump(const RunConfig& run, std::string& out_text);

} // namespace polypcount
