#include "pipesynth/bundle.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

nlohmann::ordered_json TrainingConfig::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["fe_cutoff"] = fe_cutoff;
    j["dag_min_support"] = dag_min_support;
    j["tree"] = {{"depth_grid", tree.depth_grid},
                 {"folds", tree.folds},
                 {"min_impurity_decrease", tree.min_impurity_decrease},
                 {"pb_threshold", tree.pb_threshold},
                 {"fallback_features", tree.fallback_features}};
    j["ranker"] = {{"lambda", ranker.lambda},
                   {"iterations", ranker.iterations},
                   {"step", ranker.step},
                   {"platt_iterations", ranker.platt_iterations}};
    return j;
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
    TrainingConfig c;
    c.seed = j.value("seed", c.seed);
    c.fe_cutoff = j.value("fe_cutoff", c.fe_cutoff);
    c.dag_min_support = j.value("dag_min_support", c.dag_min_support);
    if (j.contains("tree")) {
        const auto& t = j["tree"];
        c.tree.depth_grid = t.value("depth_grid", c.tree.depth_grid);
        c.tree.folds = t.value("folds", c.tree.folds);
        c.tree.min_impurity_decrease = t.value("min_impurity_decrease", c.tree.min_impurity_decrease);
        c.tree.pb_threshold = t.value("pb_threshold", c.tree.pb_threshold);
        c.tree.fallback_features = t.value("fallback_features", c.tree.fallback_features);
    }
    if (j.contains("ranker")) {
        const auto& r = j["ranker"];
        c.ranker.lambda = r.value("lambda", c.ranker.lambda);
        c.ranker.iterations = r.value("iterations", c.ranker.iterations);
        c.ranker.step = r.value("step", c.ranker.step);
        c.ranker.platt_iterations = r.value("platt_iterations", c.ranker.platt_iterations);
    }
    c.tree.seed = c.seed;
    return c;
}

const ModelRanker& SkeletonPredictorBundle::ranker(TaskKind task) const {
    auto it = rankers.find(task);
    if (it == rankers.end())
        throw Error(ErrorCode::InsufficientModels, "bundle has no model ranker for " + std::string(to_string(task)));
    return it->second;
}

nlohmann::ordered_json SkeletonPredictorBundle::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = format_version;
    j["taxonomy_version"] = taxonomy_version;
    j["corpus_hash"] = corpus_hash;
    j["corpus_records"] = corpus_records;
    j["config"] = config.to_json();
    j["fe_trees"] = nlohmann::ordered_json::object();
    for (const auto& [label, tree] : fe_trees) j["fe_trees"][label] = tree.to_json();
    j["rankers"] = nlohmann::ordered_json::object();
    for (const auto& [task, r] : rankers) j["rankers"][std::string(task_code(task))] = r.to_json();
    j["order_dag"] = mined_dag.to_json();
    j["fe_frequency"] = fe_frequency;
    return j;
}

SkeletonPredictorBundle SkeletonPredictorBundle::from_json(const nlohmann::json& j) {
    SkeletonPredictorBundle b;
    try {
        b.format_version = j.at("format_version").get<std::string>();
        if (b.format_version != "1") throw Error(ErrorCode::SchemaError, "unsupported bundle format " + b.format_version);
        b.taxonomy_version = j.at("taxonomy_version").get<std::string>();
        b.corpus_hash = j.at("corpus_hash").get<std::string>();
        b.corpus_records = j.at("corpus_records").get<std::size_t>();
        b.config = TrainingConfig::from_json(j.at("config"));
        for (auto it = j.at("fe_trees").begin(); it != j.at("fe_trees").end(); ++it)
            b.fe_trees.emplace(it.key(), DecisionTree::from_json(it.value()));
        for (auto it = j.at("rankers").begin(); it != j.at("rankers").end(); ++it) {
            auto task = parse_task(it.key());
            if (!task) throw Error(ErrorCode::SchemaError, "ranker key " + it.key());
            b.rankers.emplace(*task, ModelRanker::from_json(it.value()));
        }
        b.mined_dag = OrderDag::from_json(j.at("order_dag"));
        b.fe_frequency = j.value("fe_frequency", b.fe_frequency);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("bundle: ") + e.what());
    }
    return b;
}

nlohmann::ordered_json TrainingReport::to_json() const {
    nlohmann::ordered_json j;
    j["fe_trees"] = nlohmann::ordered_json::array();
    for (const auto& r : fe) j["fe_trees"].push_back(r.to_json());
    j["rankers"] = nlohmann::ordered_json::object();
    for (const auto& [task, note] : ranker_notes) j["rankers"][std::string(task_code(task))] = note;
    return j;
}

TrainingResult train_bundle(const MetaCorpus& corpus, const TrainingConfig& cfg) {
    TrainingResult out;
    auto& b = out.bundle;
    b.taxonomy_version = corpus.taxonomy->version();
    b.corpus_hash = corpus_hash(corpus);
    b.corpus_records = corpus.records.size();
    b.config = cfg;
    b.config.tree.seed = cfg.seed;

    const auto counts = corpus.fe_counts();
    b.fe_frequency = counts;
    for (const auto& f : corpus.taxonomy->fe_components()) {
        auto it = counts.find(f.name);
        if (it == counts.end() || it->second == 0) continue;
        auto result = train_fe_tree(corpus, f.name, b.config.tree);
        spdlog::info("FE tree {}: depth {} cv macro-F1 {:.3f}", f.name, result.tree.depth(), result.report.cv_f1);
        b.fe_trees.emplace(f.name, std::move(result.tree));
        out.report.fe.push_back(std::move(result.report));
    }

    for (auto task : {TaskKind::Classification, TaskKind::Regression}) {
        try {
            b.rankers.emplace(task, train_model_ranker(corpus, task, cfg.ranker));
            out.report.ranker_notes[task] = "trained";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientModels) throw;
            auto model_counts = corpus.model_counts(task);
            std::size_t total = 0;
            for (const auto& [m, c] : model_counts) total += c;
            if (total == 0) {
                spdlog::warn("no {} records; no model ranker for this task", to_string(task));
                out.report.ranker_notes[task] = "absent: no records";
                continue;
            }
            std::vector<std::pair<std::string, double>> shares;
            for (const auto& [m, c] : model_counts)
                shares.emplace_back(m, static_cast<double>(c) / static_cast<double>(total));
            spdlog::warn("{}; ranking {} models by corpus frequency", e.what(), to_string(task));
            b.rankers.emplace(task, ModelRanker::frequency_fallback(task, shares));
            out.report.ranker_notes[task] = "frequency fallback";
        }
    }

    if (!corpus.records.empty()) b.mined_dag = mine_order_dag(corpus, cfg.dag_min_support);
    return out;
}

void save_bundle(const SkeletonPredictorBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write bundle " + path.string());
    out << bundle.to_json().dump(1) << '\n';
}

SkeletonPredictorBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open bundle " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("bundle: ") + e.what());
    }
    return SkeletonPredictorBundle::from_json(j);
}

}  // namespace pipesynth
