#include "polypcount/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "polypcount/errors.hpp"

namespace polypcount {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json sampling_to_json(const SamplingConfig& s) {
    return json{{"sigma", s.sigma},
                {"fragment_len", s.fragment_len},
                {"strides", s.strides},
                {"alpha_start", s.alpha_start},
                {"alpha_end", s.alpha_end},
                {"alpha_horizon", s.alpha_horizon},
                {"seed", s.seed},
                {"alpha_is_cross_probability", s.alpha_is_cross_probability}};
}

SamplingConfig sampling_from_json(const json& j, std::uint64_t default_seed) {
    SamplingConfig s;
    s.seed = default_seed;
    if (!j.is_object()) throw ConfigError("\"sampling\" must be an object");
    static const std::set<std::string> known = {"sigma", "fragment_len", "strides",
                                                "alpha_start", "alpha_end", "alpha_horizon",
                                                "seed", "alpha_is_cross_probability"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("sampling: unknown field \"" + key + "\"");
    s.sigma = j.value("sigma", s.sigma);
    s.fragment_len = j.value("fragment_len", s.fragment_len);
    if (j.contains("strides")) s.strides = j["strides"].get<std::vector<int>>();
    s.alpha_start = j.value("alpha_start", s.alpha_start);
    s.alpha_end = j.value("alpha_end", s.alpha_end);
    s.alpha_horizon = j.value("alpha_horizon", s.alpha_horizon);
    s.seed = j.value("seed", s.seed);
    s.alpha_is_cross_probability =
        j.value("alpha_is_cross_probability", s.alpha_is_cross_probability);
    s.validate();
    return s;
}

json synth_to_json(const SynthConfig& s) {
    return json{{"dim", s.dim},
                {"n_videos", s.n_videos},
                {"entities_per_video", s.entities_per_video},
                {"tracklets_per_entity", s.tracklets_per_entity},
                {"frames_per_tracklet", s.frames_per_tracklet},
                {"intra_sigma", s.intra_sigma},
                {"inter_sep", s.inter_sep},
                {"seed", s.seed}};
}

SynthConfig synth_from_json(const json& j, std::uint64_t default_seed) {
    SynthConfig s;
    s.seed = default_seed;
    if (!j.is_object()) throw ConfigError("\"synth\" must be an object");
    static const std::set<std::string> known = {
        "dim",         "n_videos",  "entities_per_video", "tracklets_per_entity",
        "frames_per_tracklet", "intra_sigma", "inter_sep", "seed",
        "train",       "val",       "test"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("synth: unknown field \"" + key + "\"");
    s.dim = j.value("dim", s.dim);
    s.n_videos = j.value("n_videos", s.n_videos);
    s.entities_per_video = j.value("entities_per_video", s.entities_per_video);
    s.tracklets_per_entity = j.value("tracklets_per_entity", s.tracklets_per_entity);
    s.frames_per_tracklet = j.value("frames_per_tracklet", s.frames_per_tracklet);
    s.intra_sigma = j.value("intra_sigma", s.intra_sigma);
    s.inter_sep = j.value("inter_sep", s.inter_sep);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
}

SweepGrid grid_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("\"sweep\" must be an object");
    static const std::set<std::string> known = {"algorithm", "axes"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("sweep: unknown field \"" + key + "\"");
    if (!j.contains("algorithm") || !j["algorithm"].is_string())
        throw ConfigError("sweep: needs an \"algorithm\" string");
    SweepGrid grid;
    grid.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    if (!j.contains("axes") || !j["axes"].is_array() || j["axes"].empty())
        throw ConfigError("sweep: \"axes\" must be a non-empty array");
    for (const auto& axis : j["axes"]) {
        if (!axis.is_object() || !axis.contains("name") || !axis.contains("values") ||
            !axis["name"].is_string() || !axis["values"].is_array())
            throw ConfigError("sweep: each axis needs \"name\" and \"values\"");
        grid.axes.emplace_back(axis["name"].get<std::string>(),
                               std::vector<json>(axis["values"].begin(), axis["values"].end()));
    }
    return grid;
}

json grid_to_json(const SweepGrid& grid) {
    json axes = json::array();
    for (const auto& [name, values] : grid.axes)
        axes.push_back(json{{"name", name}, {"values", values}});
    return json{{"algorithm", algorithm_name(grid.algorithm)}, {"axes", axes}};
}

} // namespace

json RunConfig::to_json() const {
    json j;
    j["annotations"] = annotations_path;
    j["embeddings"] = embeddings_path;
    j["manifest"] = manifest_path;
    j["output_dir"] = output_dir;
    j["split"] = split;
    j["metric"] = metric_name(metric);
    j["stride"] = stride;
    j["normalization"] = normalization_name(normalization);
    j["iou_min"] = iou_min;
    j["rho"] = rho;
    j["fpr_convention"] = fpr_convention_name(fpr_convention);
    j["std_convention"] = std_convention_name(std_convention);
    j["sweep_mode"] = sweep_mode_name(sweep_mode);
    j["parallelism"] = parallelism;
    j["seed"] = seed;
    j["strict"] = strict;
    if (clustering) j["clustering"] = clustering_config_to_json(*clustering);
    if (grid) j["sweep"] = grid_to_json(*grid);
    if (synth) {
        j["synth"] = synth_to_json(*synth);
        j["synth"]["train"] = synth_train;
        j["synth"]["val"] = synth_val;
        j["synth"]["test"] = synth_test;
    }
    j["sampling"] = sampling_to_json(sampling);
    if (!report_path.empty()) j["report"] = report_path;
    if (!assignments_path.empty()) j["assignments"] = assignments_path;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::set<std::string> known = {
        "annotations", "embeddings", "manifest",   "output_dir",     "split",
        "metric",      "stride",     "normalization", "iou_min",     "rho",
        "fpr_convention", "std_convention", "sweep_mode", "parallelism", "seed",
        "strict",      "clustering", "sweep",      "synth",          "sampling",
        "report",      "assignments"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("run config: unknown field \"" + key + "\"");

    RunConfig run;
    run.annotations_path = j.value("annotations", "");
    run.embeddings_path = j.value("embeddings", "");
    run.manifest_path = j.value("manifest", "");
    run.output_dir = j.value("output_dir", "");
    run.split = j.value("split", run.split);
    if (run.split != "train" && run.split != "val" && run.split != "test" && run.split != "all")
        throw ConfigError("run config: split must be train, val, test or all");
    if (j.contains("metric")) run.metric = parse_metric(j["metric"].get<std::string>());
    run.stride = j.value("stride", run.stride);
    if (run.stride < 1) throw ConfigError("run config: stride must be >= 1");
    if (j.contains("normalization"))
        run.normalization = parse_normalization(j["normalization"].get<std::string>());
    run.iou_min = j.value("iou_min", run.iou_min);
    if (!(run.iou_min >= 0.0 && run.iou_min <= 1.0))
        throw ConfigError("run config: iou_min must be in [0, 1]");
    run.rho = j.value("rho", run.rho);
    if (!(run.rho > 0.0 && run.rho < 1.0)) throw ConfigError("run config: rho must be in (0, 1)");
    if (j.contains("fpr_convention"))
        run.fpr_convention = parse_fpr_convention(j["fpr_convention"].get<std::string>());
    if (j.contains("std_convention"))
        run.std_convention = parse_std_convention(j["std_convention"].get<std::string>());
    if (j.contains("sweep_mode"))
        run.sweep_mode = parse_sweep_mode(j["sweep_mode"].get<std::string>());
    run.parallelism = j.value("parallelism", run.parallelism);
    if (run.parallelism < 0) throw ConfigError("run config: parallelism must be >= 0");
    run.seed = j.value("seed", run.seed);
    run.strict = j.value("strict", run.strict);
    if (j.contains("clustering")) run.clustering = clustering_config_from_json(j["clustering"]);
    if (j.contains("sweep")) run.grid = grid_from_json(j["sweep"]);
    if (j.contains("synth")) {
        run.synth = synth_from_json(j["synth"], run.seed);
        run.synth_train = j["synth"].value("train", run.synth_train);
        run.synth_val = j["synth"].value("val", run.synth_val);
        run.synth_test = j["synth"].value("test", run.synth_test);
    }
    run.sampling.seed = run.seed;
    if (j.contains("sampling")) run.sampling = sampling_from_json(j["sampling"], run.seed);
    run.report_path = j.value("report", "");
    run.assignments_path = j.value("assignments", "");
    return run;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

fs::path prepare_output_dir(const RunConfig& run) {
    require(!run.output_dir.empty(), "output_dir is required");
    fs::path dir(run.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output dir " + run.output_dir + ": " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

void snapshot_config(const fs::path& dir, const RunConfig& run) {
    write_json(dir / "run_config.json", run.to_json());
}

std::vector<VideoRecord> select_split(std::vector<VideoRecord>& videos,
                                      const SplitManifest& manifest, const std::string& split) {
    std::vector<VideoRecord> selected;
    for (const auto& id : manifest.split(split)) {
        auto it = std::find_if(videos.begin(), videos.end(),
                               [&](const VideoRecord& v) { return v.video_id == id; });
        if (it == videos.end())
            throw DataError("manifest video \"" + id + "\" not found in annotations");
        selected.push_back(std::move(*it));
        videos.erase(it);
    }
    return selected;
}

std::vector<VideoRecord> load_videos(const RunConfig& run) {
    require(!run.annotations_path.empty(), "annotations path is required");
    auto videos = group_videos(build_tracklets(load_annotations(run.annotations_path), run.iou_min));
    if (run.split == "all") {
        if (!run.manifest_path.empty()) load_manifest(run.manifest_path); // still validated
        return videos;
    }
    require(!run.manifest_path.empty(),
            "a manifest is required to select split \"" + run.split +
                "\" (pass split = \"all\" to use every video)");
    const SplitManifest manifest = load_manifest(run.manifest_path);
    return select_split(videos, manifest, run.split);
}

ClusterAssignment identity_assignment(const VideoRecord& video) {
    ClusterAssignment a;
    a.video_id = video.video_id;
    int next = 0;
    for (const auto& t : video.tracklets) a.assignment.emplace(t.tracklet_id, next++);
    return a;
}

json report_to_json(const EvalReport& report) {
    json per_video = json::object();
    for (const auto& [vid, ve] : report.per_video)
        per_video[vid] = json{{"fr", ve.fr},
                              {"n_clusters", ve.n_clusters},
                              {"n_entities", ve.n_entities},
                              {"fpr", ve.fpr},
                              {"converged", ve.converged}};
    return json{{"per_video", per_video},
                {"fr_macro", report.fr_macro},
                {"fr_std", report.fr_std},
                {"fpr_pooled", report.fpr_pooled},
                {"fpr_video_mean", report.fpr_video_mean},
                {"rho", report.rho},
                {"fpr_convention", fpr_convention_name(report.fpr_convention)},
                {"std_convention", std_convention_name(report.std_convention)},
                {"config", clustering_config_to_json(report.config)},
                {"all_converged", report.all_converged}};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// CSV-stable number formatting: shortest round-trip via the JSON writer.
std::string csv_number(const json& v) { return v.dump(); }

PipelineParams params_of(const RunConfig& run) {
    PipelineParams p;
    p.metric = run.metric;
    p.stride = run.stride;
    p.normalization = run.normalization;
    p.parallelism = run.parallelism;
    return p;
}

} // namespace

Status cmd_tracklets(const RunConfig& run) {
    const fs::path dir = prepare_output_dir(run);
    const auto videos = load_videos(run);
    if (videos.empty()) throw DataError("no videos selected");

    std::vector<ClusterAssignment> identity;
    identity.reserve(videos.size());
    for (const auto& v : videos) identity.push_back(identity_assignment(v));
    const EvalReport report = evaluate(identity, videos, run.rho, run.fpr_convention,
                                       run.std_convention);

    json out;
    out["run_config"] = run.to_json();
    json per_video = json::object();
    for (const auto& v : videos) {
        json tracklets = json::array();
        for (const auto& t : v.tracklets)
            tracklets.push_back(json{{"tracklet_id", t.tracklet_id},
                                     {"entity_id", t.entity_id},
                                     {"start_frame", t.start_frame()},
                                     {"end_frame", t.end_frame()},
                                     {"length", t.length()}});
        per_video[v.video_id] = json{{"n_tracklets", v.tracklets.size()},
                                     {"n_entities", v.entity_ids.size()},
                                     {"no_reid_fr", report.per_video.at(v.video_id).fr},
                                     {"tracklets", tracklets}};
    }
    out["videos"] = per_video;
    out["no_reid_fr_macro"] = report.fr_macro;
    out["no_reid_fr_std"] = report.fr_std;

    write_json(dir / "tracklets.json", out);
    snapshot_config(dir, run);
    return Status::ok;
}

Status cmd_synth(const RunConfig& run) {
    require(run.synth.has_value(), "cmd_synth needs a \"synth\" section");
    const fs::path dir = prepare_output_dir(run);
    const SynthResult result = synthesize(*run.synth);

    // Split counts: explicit values must add up; -1 derives val/test from the
    // remainder (val gets the floor half).
    const int n = run.synth->n_videos;
    int train = run.synth_train, val = run.synth_val, test = run.synth_test;
    if (train < 0) train = 0;
    if (val < 0 && test < 0) {
        val = (n - train) / 2;
        test = n - train - val;
    } else if (val < 0) {
        val = n - train - test;
    } else if (test < 0) {
        test = n - train - val;
    }
    if (train < 0 || val < 0 || test < 0 || train + val + test != n)
        throw ConfigError("synth: train + val + test must equal n_videos");

    SplitManifest manifest;
    for (int i = 0; i < n; ++i) {
        const std::string& id = result.videos[static_cast<std::size_t>(i)].video_id;
        if (i < train) manifest.train.push_back(id);
        else if (i < train + val) manifest.val.push_back(id);
        else manifest.test.push_back(id);
    }

    save_annotations(result.annotations, (dir / "annotations.jsonl").string());
    save_embeddings(result.table, (dir / "embeddings.pem").string());
    save_manifest(manifest, (dir / "manifest.json").string());

    json summary;
    summary["run_config"] = run.to_json();
    summary["n_videos"] = result.videos.size();
    summary["n_annotations"] = result.annotations.size();
    summary["n_embeddings"] = result.table.entries.size();
    summary["dim"] = result.table.dim;
    std::size_t n_tracklets = 0;
    for (const auto& v : result.videos) n_tracklets += v.tracklets.size();
    summary["n_tracklets"] = n_tracklets;
    write_json(dir / "summary.json", summary);
    snapshot_config(dir, run);
    return Status::ok;
}

Status cmd_cluster(const RunConfig& run) {
    require(run.clustering.has_value(), "cmd_cluster needs a \"clustering\" section");
    require(!run.embeddings_path.empty(), "embeddings path is required");
    const fs::path dir = prepare_output_dir(run);

    const auto videos = load_videos(run);
    if (videos.empty()) throw DataError("no videos selected");
    const EmbeddingTable table = load_embeddings(run.embeddings_path);

    const auto assignments = cluster_videos(videos, table, *run.clustering, params_of(run));
    const EvalReport report = evaluate(assignments, videos, run.rho, run.fpr_convention,
                                       run.std_convention, *run.clustering);

    json assignments_json = json::array();
    for (const auto& a : assignments) assignments_json.push_back(assignment_to_json(a));
    write_json(dir / "assignments.json",
               json{{"run_config", run.to_json()}, {"assignments", assignments_json}});
    json report_json = report_to_json(report);
    report_json["run_config"] = run.to_json();
    write_json(dir / "report.json", report_json);
    snapshot_config(dir, run);

    return run.strict && !report.all_converged ? Status::non_convergence : Status::ok;
}

Status cmd_sweep(const RunConfig& run) {
    require(run.grid.has_value(), "cmd_sweep needs a \"sweep\" section");
    require(!run.embeddings_path.empty(), "embeddings path is required");
    require(!run.manifest_path.empty(), "cmd_sweep needs a manifest with val and test splits");
    const fs::path dir = prepare_output_dir(run);

    require(!run.annotations_path.empty(), "annotations path is required");
    auto all_videos =
        group_videos(build_tracklets(load_annotations(run.annotations_path), run.iou_min));
    const SplitManifest manifest = load_manifest(run.manifest_path); // rejects any overlap
    const auto videos_val = select_split(all_videos, manifest, "val");
    const auto videos_test = select_split(all_videos, manifest, "test");
    if (videos_val.empty()) throw DataError("cmd_sweep: empty val split");
    if (videos_test.empty()) throw DataError("cmd_sweep: empty test split");

    const EmbeddingTable table = load_embeddings(run.embeddings_path);

    // Selection sees validation videos only; the frozen winner is evaluated
    // exactly once on test.
    const SweepResult result = sweep(*run.grid, videos_val, table, run.rho, run.sweep_mode,
                                     params_of(run), run.fpr_convention, run.std_convention);
    const auto test_assignments =
        cluster_videos(videos_test, table, result.best_config, params_of(run));
    const EvalReport test_report = evaluate(test_assignments, videos_test, run.rho,
                                            run.fpr_convention, run.std_convention,
                                            result.best_config);

    // Ledger: one row per grid point, axes in grid order.
    std::ostringstream csv;
    csv << "grid_index";
    for (const auto& [name, _] : run.grid->axes) csv << ',' << name;
    csv << ",fr_macro,fr_std,fpr_pooled,fpr_video_mean,all_converged\n";
    {
        std::vector<std::size_t> idx(run.grid->axes.size(), 0);
        for (const auto& entry : result.ledger) {
            csv << entry.grid_index;
            for (std::size_t ax = 0; ax < run.grid->axes.size(); ++ax)
                csv << ',' << csv_number(run.grid->axes[ax].second[idx[ax]]);
            csv << ',' << csv_number(entry.report.fr_macro) << ','
                << csv_number(entry.report.fr_std) << ','
                << csv_number(entry.report.fpr_pooled) << ','
                << csv_number(entry.report.fpr_video_mean) << ','
                << (entry.report.all_converged ? "true" : "false") << '\n';
            for (std::size_t ax = run.grid->axes.size(); ax-- > 0;) {
                if (++idx[ax] < run.grid->axes[ax].second.size()) break;
                idx[ax] = 0;
            }
        }
    }
    write_text(dir / "sweep_ledger.csv", csv.str());

    write_json(dir / "best_config.json",
               json{{"run_config", run.to_json()},
                    {"clustering", clustering_config_to_json(result.best_config)}});
    json val_json = report_to_json(result.best_report);
    val_json["run_config"] = run.to_json();
    write_json(dir / "val_report.json", val_json);
    json test_json = report_to_json(test_report);
    test_json["run_config"] = run.to_json();
    write_json(dir / "test_report.json", test_json);
    snapshot_config(dir, run);

    const bool converged = result.best_report.all_converged && test_report.all_converged;
    return run.strict && !converged ? Status::non_convergence : Status::ok;
}

Status cmd_eval(const RunConfig& run) {
    require(!run.assignments_path.empty(), "cmd_eval needs \"assignments\"");
    const fs::path dir = prepare_output_dir(run);

    std::ifstream in(run.assignments_path);
    if (!in) throw DataError("cannot open assignments file: " + run.assignments_path);
    json stored;
    try {
        stored = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(run.assignments_path + ": " + e.what());
    }
    const json& rows = stored.is_array() ? stored : stored.at("assignments");
    if (!rows.is_array()) throw DataError("assignments file: expected an array");
    std::vector<ClusterAssignment> assignments;
    for (const auto& row : rows) assignments.push_back(assignment_from_json(row));

    RunConfig eff = run;
    eff.split = "all";
    auto videos = load_videos(eff);
    // Keep exactly the videos that have stored assignments.
    std::vector<VideoRecord> selected;
    for (const auto& a : assignments) {
        auto it = std::find_if(videos.begin(), videos.end(),
                               [&](const VideoRecord& v) { return v.video_id == a.video_id; });
        if (it == videos.end())
            throw DataError("assignments reference unknown video \"" + a.video_id + "\"");
        selected.push_back(std::move(*it));
        videos.erase(it);
    }

    const EvalReport report =
        evaluate(assignments, selected, run.rho, run.fpr_convention, run.std_convention,
                 run.clustering.value_or(ClusteringConfig{}));
    json report_json = report_to_json(report);
    report_json["run_config"] = run.to_json();
    write_json(dir / "report.json", report_json);
    snapshot_config(dir, run);
    return run.strict && !report.all_converged ? Status::non_convergence : Status::ok;
}

Status cmd_report(const RunConfig& run, std::string& out_text) {
    require(!run.report_path.empty(), "cmd_report needs \"report\"");
    std::ifstream in(run.report_path);
    if (!in) throw DataError("cannot open report file: " + run.report_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(run.report_path + ": " + e.what());
    }

    std::ostringstream text;
    text << "video                          FR      FPR  clusters  entities  converged\n";
    for (const auto& [vid, ve] : j.at("per_video").items()) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-26s %7s %8s %9d %9d  %s\n", vid.c_str(),
                      format_double(ve.at("fr").get<double>()).c_str(),
                      format_double(ve.at("fpr").get<double>()).c_str(),
                      ve.at("n_clusters").get<int>(), ve.at("n_entities").get<int>(),
                      ve.at("converged").get<bool>() ? "yes" : "no");
        text << line;
    }
    text << "\nFR " << format_double(j.at("fr_macro").get<double>()) << " +/- "
         << format_double(j.at("fr_std").get<double>()) << "  FPR(pooled) "
         << format_double(j.at("fpr_pooled").get<double>()) << "  rho "
         << format_double(j.at("rho").get<double>()) << "  algorithm "
         << j.at("config").at("algorithm").get<std::string>() << "\n";
    out_text = text.str();

    if (!run.output_dir.empty()) {
        const fs::path dir = prepare_output_dir(run);
        write_text(dir / "report.txt", out_text);
        snapshot_config(dir, run);
    }
    return Status::ok;
}

Status cmd_sample_dump(const RunConfig& run, std::string& out_text) {
    // Inspection aid: dump frame-pair draws for a few tracklet lengths.
    Rng rng(run.sampling.seed);
    std::ostringstream csv;
    csv << "tracklet_length,draw,i,j\n";
    for (int l : {16, 64, 256}) {
        for (int d = 0; d < 32; ++d) {
            const auto [i, j] = sample_frame_pair(l, run.sampling, rng);
            csv << l << ',' << d << ',' << i << ',' << j << '\n';
        }
    }
    out_text = csv.str();
    if (!run.output_dir.empty()) {
        const fs::path dir = prepare_output_dir(run);
        write_text(dir / "samples.csv", out_text);
        snapshot_config(dir, run);
    }
    return Status::ok;
}

} // namespace polypcount
