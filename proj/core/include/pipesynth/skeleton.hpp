#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/bundle.hpp"
#include "pipesynth/decision_tree.hpp"
#include "pipesynth/meta_features.hpp"
#include "pipesynth/tabular.hpp"
#include "pipesynth/taxonomy.hpp"

namespace pipesynth {

struct FePrediction {
    std::string label;
    double prob = 0.0;
};

/// Probability of every trained FE label, unfiltered, in label order.
std::vector<FePrediction> fe_probabilities(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf);

/// Labels with probability >= cutoff, by descending probability then name.
std::vector<FePrediction> predict_fe(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf,
                                     double cutoff = 0.5);

/// Whether `col` satisfies `c` under the per-column reading of meta-features.
/// Features measured as counts, indicators or fractions have a 0/1 column
/// value: `GE v` (v > 0) holds for value 1 and `LT v` (0 < v <= 1) for value
/// 0. Conditions that every or no 0/1 value would meet (`GE v<=0`, `LT v>1`)
/// carry no column information and select nothing. Real-valued statistics
/// are compared literally. Dataset-global features select nothing.
bool column_satisfies(const Column& col, const ColumnProfile& profile, const Condition& c);

/// Non-target columns meeting at least one path condition, in file order.
/// When none qualifies, the FE component's fallback column set is used.
std::vector<std::string> infer_relevant_columns(const std::vector<Condition>& path, const Dataset& d,
                                                const ColumnFallback& fallback,
                                                const MetaFeatureThresholds& thresholds = {});

/// Fallback columns alone (used for constant trees, whose path is empty).
std::vector<std::string> fallback_columns(const Dataset& d, const ColumnFallback& fallback);

std::vector<RankedModel> rank_models(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf, TaskKind task);

struct SkeletonFe {
    std::string label;
    double prob = 0.0;
    std::vector<std::string> columns;
    /// Decision-path conditions that selected the columns (empty on fallback).
    std::vector<Condition> path;

    bool operator==(const SkeletonFe&) const = default;
};

struct Skeleton {
    std::vector<SkeletonFe> fe;
    std::string model;
    std::size_t model_rank = 1;
    double model_score = 0.0;

    nlohmann::ordered_json to_json() const;
    bool operator==(const Skeleton&) const = default;
};

/// k skeletons sharing `fe`, one per top-ranked model. k beyond the number of
/// ranked models truncates with a warning.
std::vector<Skeleton> generate_skeletons(const std::vector<SkeletonFe>& fe, const std::vector<RankedModel>& ranked,
                                         std::size_t k);

struct SeedingResult {
    MetaFeatureVector meta_features;
    std::vector<FePrediction> fe_probabilities;
    std::vector<RankedModel> ranking;
    std::vector<Skeleton> skeletons;
};

/// Stage one: meta-features, FE prediction with column inference, model
/// ranking and top-k skeletons. FE components whose column set is empty are
/// dropped with a warning.
SeedingResult seed_pipelines(const SkeletonPredictorBundle& bundle, const Dataset& d, std::size_t k,
                             const Taxonomy& taxonomy = Taxonomy::builtin(),
                             const MetaFeatureThresholds& thresholds = {});

}  // namespace pipesynth
