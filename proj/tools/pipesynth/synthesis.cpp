#include "synthesis.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "pipesynth/instantiation.hpp"
#include "pipesynth/skeleton.hpp"
#include "pipesynth/templates.hpp"

namespace pipesynth::app {

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

nlohmann::ordered_json seeding_json(const SeedingResult& s) {
    nlohmann::ordered_json j;
    j["fe_probabilities"] = nlohmann::ordered_json::object();
    for (const auto& p : s.fe_probabilities) j["fe_probabilities"]["FE:" + p.label] = p.prob;
    j["model_ranking"] = nlohmann::ordered_json::array();
    for (const auto& r : s.ranking) j["model_ranking"].push_back({{"model", "MODEL:" + r.model}, {"score", r.score}});
    j["skeletons"] = nlohmann::ordered_json::array();
    for (const auto& sk : s.skeletons) j["skeletons"].push_back(sk.to_json());
    return j;
}

}  // namespace

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::AllCandidatesFailed:
        case ErrorCode::FinalizeFailed:
        case ErrorCode::NoSkeletons: return kSynthesisFailed;
        case ErrorCode::EmptyFile:
        case ErrorCode::RaggedRows:
        case ErrorCode::MissingTarget:
        case ErrorCode::DuplicateColumn:
        case ErrorCode::InvalidTask:
        case ErrorCode::DegenerateSplit:
        case ErrorCode::SchemaError:
        case ErrorCode::UnknownLabel:
        case ErrorCode::ApplicabilityMismatch:
        case ErrorCode::OneClassOnly: return kDataError;
        default: return kUsageError;
    }
}

TrainingResult train(const TrainOptions& opt) {
    auto corpus = parse_corpus(opt.corpus);
    TrainingConfig cfg;
    cfg.seed = opt.seed;
    cfg.tree.seed = opt.seed;
    cfg.tree.pb_threshold = opt.pb_threshold;
    cfg.dag_min_support = opt.dag_min_support;
    cfg.fe_cutoff = opt.fe_cutoff;
    auto result = train_bundle(corpus, cfg);
    if (!opt.out.empty()) {
        save_bundle(result.bundle, opt.out);
        auto report = opt.out;
        report.replace_extension(".report.json");
        write_json(report, result.report.to_json());
        spdlog::info("wrote {} and {}", opt.out.string(), report.string());
    }
    return result;
}

nlohmann::ordered_json SynthesisSummary::to_json() const {
    nlohmann::ordered_json j;
    j["candidates"] = candidates;
    j["best"] = selection.best;
    j["best_script"] = best_script;
    j["validation_score"] = selection.validation_score;
    j["final_test_score"] =
        selection.final_test_score ? nlohmann::ordered_json(*selection.final_test_score) : nlohmann::ordered_json();
    return j;
}

SynthesisSummary synthesize(const SynthesizeOptions& opt) {
    if (opt.bundle.has_value() == opt.corpus.has_value())
        throw Error(ErrorCode::InvalidArgument, "exactly one of --bundle and --corpus is required");
    if (opt.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (opt.targets.empty()) throw Error(ErrorCode::InvalidArgument, "--target is required");
    if (opt.train.empty()) throw Error(ErrorCode::InvalidArgument, "--train is required");
    if (opt.dag != "mined" && opt.dag != "default")
        throw Error(ErrorCode::InvalidArgument, "--dag must be 'mined' or 'default'");
    opt.exec.validate();

    SkeletonPredictorBundle bundle;
    if (opt.bundle) {
        bundle = load_bundle(*opt.bundle);
    } else {
        TrainOptions t;
        t.corpus = *opt.corpus;
        t.seed = opt.seed;
        t.pb_threshold = opt.pb_threshold;
        t.dag_min_support = opt.dag_min_support;
        bundle = train(t).bundle;
    }
    if (opt.fe_cutoff) bundle.config.fe_cutoff = *opt.fe_cutoff;

    CsvOptions csv;
    csv.delimiter = opt.delimiter;
    const auto train_data = load_csv(opt.train, opt.targets, opt.task, csv);
    std::optional<Dataset> test_data;
    if (opt.test) test_data = load_csv(*opt.test, opt.targets, train_data.task, csv);
    spdlog::info("{}: {} rows, {} features, {} task", opt.train.string(), train_data.n_rows,
                 train_data.features().size(), to_string(train_data.task));

    fs::create_directories(opt.out);
    const auto seeding = seed_pipelines(bundle, train_data, opt.k);
    write_json(opt.out / "meta_features.json", seeding.meta_features.to_json());
    write_json(opt.out / "skeletons.json", seeding_json(seeding));

    const OrderDag* dag = &OrderDag::builtin_default();
    if (opt.dag == "mined" && !bundle.mined_dag.nodes().empty()) dag = &bundle.mined_dag;
    EmitOptions emit;
    emit.metric = opt.metric;
    const auto cands = build_candidates(seeding.skeletons, *dag, TemplatePack::builtin(),
                                        HyperparamCatalog::builtin(), train_data, Taxonomy::builtin(),
                                        bundle.fe_frequency, emit);

    const auto cand_dir = opt.out / "candidates";
    fs::create_directories(cand_dir);
    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    for (const auto& c : cands) {
        write_text(cand_dir / (c.script_id + ".py"), c.source);
        manifest.push_back(c.manifest());
    }
    write_json(cand_dir / "manifest.json", manifest);
    spdlog::info("emitted {} candidate scripts", cands.size());

    const auto [inner_train, inner_valid] = internal_split(train_data, opt.seed);
    const auto results = run_candidates(cands, inner_train, inner_valid, opt.out / "runs", opt.exec);

    SynthesisSummary summary;
    summary.candidates = cands.size();
    try {
        summary.selection = select_best(results, cands);
    } catch (const Error&) {
        nlohmann::ordered_json failed;
        failed["best"] = nullptr;
        failed["results"] = nlohmann::ordered_json::array();
        for (const auto& r : results) failed["results"].push_back(r.to_json());
        write_json(opt.out / "results.json", failed);
        throw;
    }
    const auto& best = cands[summary.selection.best_index];
    summary.best_script = "best_pipeline.py";
    write_text(opt.out / summary.best_script, best.source);
    spdlog::info("best candidate {} (validation score {})", best.script_id,
                 format_number(summary.selection.validation_score));

    if (test_data) {
        const auto final_run = finalize(best, train_data, *test_data, opt.out / "final", opt.exec);
        summary.selection.final_test_score = final_run.score;
        summary.selection.final_log_path = final_run.log_path;
        spdlog::info("held-out test score {}", format_number(*final_run.score));
    }
    write_json(opt.out / "results.json", summary.selection.to_json());
    write_json(opt.out / "summary.json", summary.to_json());
    return summary;
}

}  // namespace pipesynth::app
