#include "polypcount.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "json.hpp"

#include "polypcount/errors.hpp"
#include "polypcount/pipeline.hpp"

using nlohmann::json;

// Opaque handle bodies. The structs wrap the C++ values so the C surface
// never exposes layouts.
struct pc_dataset {
    std::vector<polypcount::VideoRecord> videos;
};

struct pc_embeddings {
    polypcount::EmbeddingTable table;
};

namespace {

thread_local std::string g_last_error;

pc_status fail(pc_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
pc_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const polypcount::ConfigError& e) {
        return fail(PC_ERROR_CONFIG, e.what());
    } catch (const polypcount::DataError& e) {
        return fail(PC_ERROR_DATA, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PC_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PC_ERROR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

pc_status out_string(const std::string& s, char** dst) {
    if (!dst) return PC_OK;
    *dst = dup_string(s);
    if (!*dst) return fail(PC_ERROR_INTERNAL, "out of memory");
    return PC_OK;
}

json parse_json_arg(const char* text, const char* what) {
    if (!text || !*text) return json::object();
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw polypcount::ConfigError(std::string(what) + ": malformed JSON");
    return j;
}

// Options shared by pc_cluster_video / pc_evaluate: a run config subset.
struct Options {
    polypcount::PipelineParams params;
    polypcount::ClusteringConfig clustering;
    double rho = 0.05;
    polypcount::FprConvention fpr_convention = polypcount::FprConvention::pooled;
    polypcount::StdConvention std_convention = polypcount::StdConvention::population;
};

Options parse_options(const char* options_json) {
    const json j = parse_json_arg(options_json, "options");
    Options opt;
    if (j.contains("metric"))
        opt.params.metric = polypcount::parse_metric(j["metric"].get<std::string>());
    if (j.contains("stride")) opt.params.stride = j["stride"].get<int>();
    if (opt.params.stride < 1) throw polypcount::ConfigError("options: stride must be >= 1");
    if (j.contains("normalization"))
        opt.params.normalization =
            polypcount::parse_normalization(j["normalization"].get<std::string>());
    if (j.contains("parallelism")) opt.params.parallelism = j["parallelism"].get<int>();
    if (j.contains("clustering"))
        opt.clustering = polypcount::clustering_config_from_json(j["clustering"]);
    if (j.contains("rho")) opt.rho = j["rho"].get<double>();
    if (!(opt.rho > 0.0 && opt.rho < 1.0))
        throw polypcount::ConfigError("options: rho must be in (0, 1)");
    if (j.contains("fpr_convention"))
        opt.fpr_convention =
            polypcount::parse_fpr_convention(j["fpr_convention"].get<std::string>());
    if (j.contains("std_convention"))
        opt.std_convention =
            polypcount::parse_std_convention(j["std_convention"].get<std::string>());
    return opt;
}

json report_json(const polypcount::EvalReport& report) {
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
                {"config", polypcount::clustering_config_to_json(report.config)},
                {"all_converged", report.all_converged}};
}

} // namespace

extern "C" {

const char* pc_version(void) { return "1.0.0"; }

const char* pc_last_error(void) { return g_last_error.c_str(); }

void pc_string_free(char* s) { ::free(s); }

pc_status pc_dataset_load(const char* annotations_path, double iou_min, pc_dataset** out) {
    if (!annotations_path || !out)
        return fail(PC_ERROR_CONFIG, "pc_dataset_load: null argument");
    return guarded([&] {
        if (!(iou_min >= 0.0 && iou_min <= 1.0))
            throw polypcount::ConfigError("iou_min must be in [0, 1]");
        auto videos = polypcount::group_videos(
            polypcount::build_tracklets(polypcount::load_annotations(annotations_path), iou_min));
        *out = new pc_dataset{std::move(videos)};
        return PC_OK;
    });
}

pc_status pc_dataset_synthesize(const char* synth_config_json, pc_dataset** out_dataset,
                                pc_embeddings** out_embeddings) {
    return guarded([&] {
        const json j = parse_json_arg(synth_config_json, "synth config");
        polypcount::SynthConfig cfg;
        cfg.dim = j.value("dim", cfg.dim);
        cfg.n_videos = j.value("n_videos", cfg.n_videos);
        cfg.entities_per_video = j.value("entities_per_video", cfg.entities_per_video);
        cfg.tracklets_per_entity = j.value("tracklets_per_entity", cfg.tracklets_per_entity);
        cfg.frames_per_tracklet = j.value("frames_per_tracklet", cfg.frames_per_tracklet);
        cfg.intra_sigma = j.value("intra_sigma", cfg.intra_sigma);
        cfg.inter_sep = j.value("inter_sep", cfg.inter_sep);
        cfg.seed = j.value("seed", cfg.seed);
        auto result = polypcount::synthesize(cfg);
        if (out_dataset) *out_dataset = new pc_dataset{std::move(result.videos)};
        if (out_embeddings) *out_embeddings = new pc_embeddings{std::move(result.table)};
        return PC_OK;
    });
}

void pc_dataset_free(pc_dataset* dataset) { delete dataset; }

size_t pc_dataset_video_count(const pc_dataset* dataset) {
    return dataset ? dataset->videos.size() : 0;
}

pc_status pc_dataset_summary_json(const pc_dataset* dataset, char** out_json) {
    if (!dataset || !out_json)
        return fail(PC_ERROR_CONFIG, "pc_dataset_summary_json: null argument");
    return guarded([&] {
        json videos = json::object();
        for (const auto& v : dataset->videos) {
            videos[v.video_id] = json{
                {"n_tracklets", v.tracklets.size()},
                {"n_entities", v.entity_ids.size()},
                {"no_reid_fr", static_cast<double>(v.tracklets.size()) /
                                   static_cast<double>(v.entity_ids.size())}};
        }
        return out_string(json{{"videos", videos}}.dump(2), out_json);
    });
}

pc_status pc_embeddings_load(const char* path, pc_embeddings** out) {
    if (!path || !out) return fail(PC_ERROR_CONFIG, "pc_embeddings_load: null argument");
    return guarded([&] {
        *out = new pc_embeddings{polypcount::load_embeddings(path)};
        return PC_OK;
    });
}

pc_status pc_embeddings_save(const pc_embeddings* embeddings, const char* path) {
    if (!embeddings || !path)
        return fail(PC_ERROR_CONFIG, "pc_embeddings_save: null argument");
    return guarded([&] {
        polypcount::save_embeddings(embeddings->table, path);
        return PC_OK;
    });
}

void pc_embeddings_free(pc_embeddings* embeddings) { delete embeddings; }

pc_status pc_cluster_video(const pc_dataset* dataset, const pc_embeddings* embeddings,
                           const char* video_id, const char* options_json,
                           char** out_assignment_json) {
    if (!dataset || !embeddings || !video_id || !out_assignment_json)
        return fail(PC_ERROR_CONFIG, "pc_cluster_video: null argument");
    return guarded([&] {
        const Options opt = parse_options(options_json);
        const polypcount::VideoRecord* video = nullptr;
        for (const auto& v : dataset->videos)
            if (v.video_id == video_id) video = &v;
        if (!video)
            throw polypcount::DataError("unknown video \"" + std::string(video_id) + "\"");
        const auto assignments = polypcount::cluster_videos({*video}, embeddings->table,
                                                            opt.clustering, opt.params);
        return out_string(polypcount::assignment_to_json(assignments.front()).dump(2),
                          out_assignment_json);
    });
}

pc_status pc_evaluate(const pc_dataset* dataset, const pc_embeddings* embeddings,
                      const char* options_json, char** out_report_json) {
    if (!dataset || !embeddings || !out_report_json)
        return fail(PC_ERROR_CONFIG, "pc_evaluate: null argument");
    return guarded([&] {
        const Options opt = parse_options(options_json);
        const auto assignments = polypcount::cluster_videos(dataset->videos, embeddings->table,
                                                            opt.clustering, opt.params);
        const auto report =
            polypcount::evaluate(assignments, dataset->videos, opt.rho, opt.fpr_convention,
                                 opt.std_convention, opt.clustering);
        return out_string(report_json(report).dump(2), out_report_json);
    });
}

pc_status pc_run_command(const char* command, const char* config_json, char** out_text) {
    if (!command) return fail(PC_ERROR_CONFIG, "pc_run_command: null command");
    return guarded([&] {
        const polypcount::RunConfig run =
            polypcount::RunConfig::from_json(parse_json_arg(config_json, "run config"));
        const std::string cmd(command);
        polypcount::Status status;
        std::string text;
        if (cmd == "tracklets") status = polypcount::cmd_tracklets(run);
        else if (cmd == "synth") status = polypcount::cmd_synth(run);
        else if (cmd == "cluster") status = polypcount::cmd_cluster(run);
        else if (cmd == "sweep") status = polypcount::cmd_sweep(run);
        else if (cmd == "eval") status = polypcount::cmd_eval(run);
        else if (cmd == "report") status = polypcount::cmd_report(run, text);
        else if (cmd == "sample") status = polypcount::cmd_sample_dump(run, text);
        else throw polypcount::ConfigError("unknown command \"" + cmd + "\"");

        if (out_text) {
            const pc_status rc = out_string(text, out_text);
            if (rc != PC_OK) return rc;
        }
        if (status == polypcount::Status::non_convergence)
            return fail(PC_ERROR_NONCONVERGENCE, "clustering did not converge (strict mode)");
        return PC_OK;
    });
}

pc_status pc_iou(const double a[4], const double b[4], double* out) {
    if (!a || !b || !out) return fail(PC_ERROR_CONFIG, "pc_iou: null argument");
    return guarded([&] {
        const polypcount::BBox box_a{a[0], a[1], a[2], a[3]};
        const polypcount::BBox box_b{b[0], b[1], b[2], b[3]};
        *out = polypcount::iou(box_a, box_b);
        return PC_OK;
    });
}

pc_status pc_alpha_schedule(int64_t step, int64_t total_steps,
                            const char* sampling_config_json, double* out) {
    if (!out) return fail(PC_ERROR_CONFIG, "pc_alpha_schedule: null argument");
    return guarded([&] {
        polypcount::SamplingConfig cfg;
        if (sampling_config_json && *sampling_config_json) {
            const json j = parse_json_arg(sampling_config_json, "sampling config");
            cfg.sigma = j.value("sigma", cfg.sigma);
            cfg.alpha_start = j.value("alpha_start", cfg.alpha_start);
            cfg.alpha_end = j.value("alpha_end", cfg.alpha_end);
            cfg.alpha_horizon = j.value("alpha_horizon", cfg.alpha_horizon);
        }
        if (step < 0 || step > total_steps)
            throw polypcount::ConfigError("step must be in [0, total_steps]");
        *out = polypcount::alpha_schedule(step, total_steps, cfg);
        return PC_OK;
    });
}

} // extern "C"
