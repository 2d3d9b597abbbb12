#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "pipesynth/corpus.hpp"
#include "pipesynth/meta_features.hpp"
#include "pipesynth/synthetic_corpus.hpp"
#include "synthesis.hpp"

namespace ps = pipesynth;
namespace app = pipesynth::app;

namespace {

std::optional<ps::TaskKind> task_from_flag(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::string upper;
    for (char c : s) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "CLASSIFICATION") upper = "C";
    if (upper == "REGRESSION") upper = "R";
    auto t = ps::parse_task(upper);
    if (!t) throw ps::Error(ps::ErrorCode::InvalidArgument, "--task must be c or r, got '" + s + "'");
    return t;
}

// Options not given on the command line are filled from the JSON config:
// top-level keys first, then keys under the subcommand's name.
void apply_config(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ps::Error(ps::ErrorCode::IoError, "cannot open config " + path);
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ps::Error(ps::ErrorCode::InvalidArgument, "config " + path + ": " + e.what());
    }
    nlohmann::json merged = nlohmann::json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!it.value().is_object()) merged[it.key()] = it.value();
    if (cfg.contains(sub.get_name()) && cfg[sub.get_name()].is_object()) merged.update(cfg[sub.get_name()]);

    auto text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (auto it = merged.begin(); it != merged.end(); ++it) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub.get_option("--" + it.key());
        } catch (const CLI::OptionNotFound&) {
            spdlog::warn("config key '{}' is not an option of '{}'", it.key(), sub.get_name());
            continue;
        }
        if (opt->count() > 0) continue;
        if (it.value().is_array())
            for (const auto& e : it.value()) opt->add_result(text(e));
        else
            opt->add_result(text(it.value()));
        opt->run_callback();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Synthesizes ML pipeline scripts for tabular datasets from a meta-corpus of pipelines"};
    cli.require_subcommand(1);
    std::string config_path, log_level = "info";
    cli.add_option("--config", config_path, "JSON file supplying option values; flags take precedence");
    cli.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    app::TrainOptions topt;
    auto* train = cli.add_subcommand("train", "Train a predictor bundle from a meta-corpus");
    train->add_option("--corpus", topt.corpus, "Meta-corpus (JSON lines)");
    train->add_option("--out", topt.out, "Bundle file to write");
    train->add_option("--seed", topt.seed);
    train->add_option("--pb-threshold", topt.pb_threshold, "Minimum |point-biserial| for tree features");
    train->add_option("--dag-min-support", topt.dag_min_support);
    train->add_option("--fe-cutoff", topt.fe_cutoff, "FE probability cutoff stored in the bundle");

    app::SynthesizeOptions sopt;
    std::string bundle, corpus, test, task, metric;
    double fe_cutoff = -1.0;
    auto* synth = cli.add_subcommand("synthesize", "Generate, validate and select pipelines for a dataset");
    synth->add_option("--bundle", bundle, "Trained bundle");
    synth->add_option("--corpus", corpus, "Meta-corpus to train on the fly instead of --bundle");
    synth->add_option("--train", sopt.train, "Training CSV");
    synth->add_option("--test", test, "Held-out test CSV");
    synth->add_option("--target", sopt.targets, "Target column (repeatable)");
    synth->add_option("--task", task, "c or r; inferred when omitted");
    synth->add_option("--k", sopt.k, "Number of top-ranked models");
    synth->add_option("--exec", sopt.exec.command_template, "Executor command with {script} and {workdir}");
    synth->add_option("--timeout", sopt.exec.timeout, "Per-candidate timeout in seconds");
    synth->add_option("--budget", sopt.exec.total_budget, "Total execution budget in seconds");
    synth->add_option("--max-parallel", sopt.exec.max_parallel);
    synth->add_option("--out", sopt.out, "Artifact directory");
    synth->add_option("--seed", sopt.seed);
    synth->add_option("--metric", metric, "Metric override (macro_f1, accuracy, r2, ...)");
    synth->add_option("--dag", sopt.dag, "mined or default");
    synth->add_option("--fe-cutoff", fe_cutoff, "Override the bundle's FE probability cutoff");
    synth->add_option("--pb-threshold", sopt.pb_threshold, "Used with --corpus");
    synth->add_option("--dag-min-support", sopt.dag_min_support, "Used with --corpus");
    synth->add_option("--delimiter", sopt.delimiter, "CSV delimiter of the input files");

    std::uint64_t gen_seed = 0;
    std::size_t gen_n = 500;
    std::string gen_out;
    auto* gen = cli.add_subcommand("gen-corpus", "Write a synthetic meta-corpus with planted rules");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--n", gen_n, "Number of records");
    gen->add_option("--out", gen_out, "Output file; stdout when omitted");

    std::string feat_data, feat_task;
    std::vector<std::string> feat_targets;
    auto* feats = cli.add_subcommand("features", "Print the meta-feature vector of a dataset");
    feats->add_option("--data", feat_data, "CSV file");
    feats->add_option("--target", feat_targets, "Target column (repeatable)");
    feats->add_option("--task", feat_task, "c or r");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e) == 0 ? 0 : app::kUsageError;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_pattern("[%l] %v");

    try {
        for (auto* sub : cli.get_subcommands())
            if (!config_path.empty()) apply_config(*sub, config_path);

        if (train->parsed()) {
            if (topt.corpus.empty() || topt.out.empty())
                throw ps::Error(ps::ErrorCode::InvalidArgument, "train needs --corpus and --out");
            app::train(topt);
        } else if (synth->parsed()) {
            if (!bundle.empty()) sopt.bundle = bundle;
            if (!corpus.empty()) sopt.corpus = corpus;
            if (!test.empty()) sopt.test = test;
            if (!metric.empty()) sopt.metric = metric;
            if (fe_cutoff >= 0.0) sopt.fe_cutoff = fe_cutoff;
            sopt.task = task_from_flag(task);
            const auto summary = app::synthesize(sopt);
            std::cout << summary.to_json().dump(2) << '\n';
        } else if (gen->parsed()) {
            const auto c = ps::generate_synthetic_corpus(gen_seed, gen_n);
            if (gen_out.empty())
                ps::write_corpus(std::cout, c);
            else
                ps::write_corpus(std::filesystem::path(gen_out), c);
        } else if (feats->parsed()) {
            if (feat_data.empty() || feat_targets.empty())
                throw ps::Error(ps::ErrorCode::InvalidArgument, "features needs --data and --target");
            const auto d = ps::load_csv(feat_data, feat_targets, task_from_flag(feat_task));
            std::cout << ps::compute_meta_features(d).to_json().dump(2) << '\n';
        }
    } catch (const ps::Error& e) {
        spdlog::error("{}", e.what());
        return app::exit_code_for(e.code());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return app::kUsageError;
    }
    return app::kSuccess;
}
