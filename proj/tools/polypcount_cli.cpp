// Command-line front end. Everything goes through the C API of the shared
// library; the run config is assembled from an optional JSON file plus
// flag overrides and handed to pc_run_command.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "polypcount.h"

using nlohmann::json;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> annotations, embeddings, manifest, output_dir, split, metric,
        normalization;
    std::optional<int> stride, parallelism;
    std::optional<double> rho;
    std::optional<std::uint64_t> seed;
    bool strict = false;
};

int run(const std::string& command, const Overrides& o) {
    json config = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) {
            std::cerr << "polypcount: cannot open config file: " << o.config_path << "\n";
            return 2;
        }
        config = json::parse(in, nullptr, false);
        if (config.is_discarded()) {
            std::cerr << "polypcount: malformed config file: " << o.config_path << "\n";
            return 2;
        }
    }

    auto set = [&](const char* key, const auto& value) {
        if (value) config[key] = *value;
    };
    set("annotations", o.annotations);
    set("embeddings", o.embeddings);
    set("manifest", o.manifest);
    set("output_dir", o.output_dir);
    set("split", o.split);
    set("metric", o.metric);
    set("normalization", o.normalization);
    set("stride", o.stride);
    set("parallelism", o.parallelism);
    set("rho", o.rho);
    set("seed", o.seed);
    if (o.strict) config["strict"] = true;

    char* text = nullptr;
    const pc_status status = pc_run_command(command.c_str(), config.dump().c_str(), &text);
    if (text) {
        if (*text) std::fputs(text, stdout);
        pc_string_free(text);
    }
    if (status != PC_OK) {
        std::cerr << "polypcount: " << pc_last_error() << "\n";
        return static_cast<int>(status);
    }
    return 0;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON run-config file");
    cmd->add_option("--annotations", o.annotations, "annotation file (JSON Lines)");
    cmd->add_option("--embeddings", o.embeddings, "embedding file (PEM1 binary or CSV)");
    cmd->add_option("--manifest", o.manifest, "split manifest (JSON)");
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
    cmd->add_option("--split", o.split, "train | val | test | all");
    cmd->add_option("--metric", o.metric, "euclidean | cosine (default euclidean)");
    cmd->add_option("--normalization", o.normalization, "off_diagonal | full_matrix");
    cmd->add_option("--stride", o.stride, "frame stride for tracklet aggregation (default 4)");
    cmd->add_option("--rho", o.rho, "target false positive rate (default 0.05)");
    cmd->add_option("--seed", o.seed, "seed for synthetic data and jitter");
    cmd->add_option("--parallelism", o.parallelism, "worker threads (0 = all cores)");
    cmd->add_flag("--strict", o.strict, "exit 4 when clustering does not converge");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polypcount: count distinct polyp entities by re-associating tracklets"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pc_version()));

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"tracklets", "build ground-truth tracklets and report the No-ReID fragmentation"},
        {"synth", "generate a synthetic dataset (annotations, embeddings, manifest)"},
        {"cluster", "run the re-association pipeline with a fixed clustering config"},
        {"sweep", "tune clustering hyperparameters on val, evaluate the winner on test"},
        {"eval", "re-evaluate stored assignments against the annotations"},
        {"report", "render a stored report as a text table"},
        {"sample", "dump sampled frame-pair indices as CSV"},
    };

    Overrides overrides;
    for (const auto& sub : subs) add_common(app.add_subcommand(sub.name, sub.help), overrides);

    CLI11_PARSE(app, argc, argv);
    return run(app.get_subcommands().front()->get_name(), overrides);
}
