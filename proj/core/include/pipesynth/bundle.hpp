#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/corpus.hpp"
#include "pipesynth/decision_tree.hpp"
#include "pipesynth/model_ranker.hpp"
#include "pipesynth/order_dag.hpp"

namespace pipesynth {

struct TrainingConfig {
    TreeTrainingConfig tree;
    RankerConfig ranker;
    double dag_min_support = 0.8;
    double fe_cutoff = 0.5;
    std::uint64_t seed = 0;

    nlohmann::ordered_json to_json() const;
    static TrainingConfig from_json(const nlohmann::json& j);
};

/// Trained meta-models: one tree per FE label seen in the corpus and one
/// model ranker per task, plus the mined component order.
struct SkeletonPredictorBundle {
    std::string format_version = "1";
    std::string taxonomy_version;
    std::string corpus_hash;
    std::size_t corpus_records = 0;
    TrainingConfig config;
    std::map<std::string, DecisionTree> fe_trees;
    std::map<TaskKind, ModelRanker> rankers;
    OrderDag mined_dag;
    /// Records using each FE label; breaks redundancy ties at synthesis.
    std::map<std::string, std::size_t> fe_frequency;

    const ModelRanker& ranker(TaskKind task) const;

    nlohmann::ordered_json to_json() const;
    static SkeletonPredictorBundle from_json(const nlohmann::json& j);
};

struct TrainingReport {
    std::vector<FeTreeReport> fe;
    std::map<TaskKind, std::string> ranker_notes;

    nlohmann::ordered_json to_json() const;
};

struct TrainingResult {
    SkeletonPredictorBundle bundle;
    TrainingReport report;
};

TrainingResult train_bundle(const MetaCorpus& corpus, const TrainingConfig& cfg = {});

void save_bundle(const SkeletonPredictorBundle& bundle, const std::filesystem::path& path);
SkeletonPredictorBundle load_bundle(const std::filesystem::path& path);

}  // namespace pipesynth
