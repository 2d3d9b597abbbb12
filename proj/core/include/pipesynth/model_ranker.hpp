#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/corpus.hpp"
#include "pipesynth/meta_features.hpp"

namespace pipesynth {

struct RankerConfig {
    double lambda = 1e-2;
    std::size_t iterations = 500;
    double step = 0.1;
    std::size_t platt_iterations = 100;
};

/// Standardization applied before the linear scorers. Count-scale features
/// are log1p-compressed first.
struct FeatureScaler {
    std::array<double, kMetaFeatureCount> mean{};
    std::array<double, kMetaFeatureCount> scale{};

    static FeatureScaler fit(const std::vector<MetaFeatureVector>& rows);
    std::array<double, kMetaFeatureCount> transform(const MetaFeatureVector& mf) const;
};

struct LinearScorer {
    std::array<double, kMetaFeatureCount> w{};
    double b = 0.0;

    double margin(const std::array<double, kMetaFeatureCount>& z) const;
};

/// One-vs-rest scorers for one model label.
struct ModelScorer {
    std::string model;
    LinearScorer logistic;
    LinearScorer svm;
    /// Platt sigmoid p = 1 / (1 + exp(a * margin + b)).
    double platt_a = -1.0;
    double platt_b = 0.0;
};

struct LearnerScores {
    std::string model;
    double logistic = 0.0;
    double svm = 0.0;
};

struct RankedModel {
    std::string model;
    double score = 0.0;
};

/// Sorts by descending score, ties by name.
void sort_ranking(std::vector<RankedModel>& ranking);

/// Combines per-learner probabilities as their mean after applying `g` to each.
std::vector<RankedModel> combine_scores(const std::vector<LearnerScores>& scores,
                                        const std::function<double(double)>& g = {});

/// Ensemble of a logistic-regression and a Platt-calibrated linear SVM per
/// model; a model's score is the mean of the two probabilities. A ranker
/// trained on too few labels degrades to corpus frequency shares.
class ModelRanker {
  public:
    TaskKind task() const { return task_; }
    bool is_frequency_fallback() const { return fallback_; }
    const std::vector<ModelScorer>& scorers() const { return scorers_; }
    const FeatureScaler& scaler() const { return scaler_; }

    std::vector<LearnerScores> learner_scores(const MetaFeatureVector& mf) const;
    std::vector<RankedModel> rank(const MetaFeatureVector& mf) const;

    nlohmann::ordered_json to_json() const;
    static ModelRanker from_json(const nlohmann::json& j);

    static ModelRanker frequency_fallback(TaskKind task, const std::vector<std::pair<std::string, double>>& shares);

  private:
    friend ModelRanker train_model_ranker(const MetaCorpus&, TaskKind, const RankerConfig&);
    TaskKind task_ = TaskKind::Classification;
    bool fallback_ = false;
    FeatureScaler scaler_;
    std::vector<ModelScorer> scorers_;
    /// Frequency shares used by the fallback ranker.
    std::vector<std::pair<std::string, double>> shares_;
};

/// Trains over the task's records. Models below the occurrence floor are not
/// ranked. Throws InsufficientModels when fewer than two remain.
ModelRanker train_model_ranker(const MetaCorpus& corpus, TaskKind task, const RankerConfig& cfg = {});

/// Individual learners, exposed for testing.
LinearScorer fit_logistic(const std::vector<std::array<double, kMetaFeatureCount>>& z, const std::vector<int>& y,
                          const RankerConfig& cfg);
LinearScorer fit_linear_svm(const std::vector<std::array<double, kMetaFeatureCount>>& z, const std::vector<int>& y,
                            const RankerConfig& cfg);
/// Returns (a, b) of the fitted sigmoid.
std::pair<double, double> fit_platt(const std::vector<double>& margins, const std::vector<int>& y,
                                    std::size_t iterations);

}  // namespace pipesynth
