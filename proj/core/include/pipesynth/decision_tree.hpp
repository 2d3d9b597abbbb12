#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/corpus.hpp"
#include "pipesynth/meta_features.hpp"

namespace pipesynth {

enum class CompareOp { GE, LT };
std::string_view to_string(CompareOp op);

/// One traversed test `feature op threshold`.
struct Condition {
    MetaFeature feature;
    CompareOp op;
    double threshold;

    bool holds(double value) const { return op == CompareOp::GE ? value >= threshold : value < threshold; }
    bool operator==(const Condition&) const = default;
};

/// Binary CART classifier over meta-features. Internal nodes send values
/// below the threshold left (LT) and the rest right (GE); leaves store the
/// weighted share of the positive class.
class DecisionTree {
  public:
    struct Node {
        bool leaf = true;
        double prob = 0.0;
        MetaFeature feature = MetaFeature::NRows;
        double threshold = 0.0;
        int left = -1;
        int right = -1;

        bool operator==(const Node&) const = default;
    };

    static DecisionTree constant(double prob);

    bool is_constant() const { return nodes_.size() == 1; }
    double predict_proba(const MetaFeatureVector& mf) const;
    /// Root-to-leaf conditions as traversed. Throws EmptyPath on a constant tree.
    std::vector<Condition> decision_path(const MetaFeatureVector& mf) const;
    std::size_t depth() const;

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<MetaFeature>& trained_features() const { return features_; }
    std::size_t max_depth() const { return max_depth_; }

    nlohmann::ordered_json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);

    bool operator==(const DecisionTree&) const = default;

  private:
    friend class CartBuilder;
    std::vector<Node> nodes_;
    std::vector<MetaFeature> features_;
    std::size_t max_depth_ = 0;
};

struct TreeTrainingConfig {
    std::vector<std::size_t> depth_grid{2, 3, 4, 5};
    std::size_t folds = 5;
    /// Weighted impurity decrease (relative to the whole sample) a split must reach.
    double min_impurity_decrease = 0.01;
    /// |r_pb| cut-off for the feature subset.
    double pb_threshold = 0.1;
    std::size_t fallback_features = 3;
    std::uint64_t seed = 0;
};

/// Dense training sample: one row of meta-feature values per record.
struct TreeSample {
    std::vector<std::array<double, kMetaFeatureCount>> x;
    std::vector<int> y;
};

/// Fits one tree with balanced class weights N / (2 N_c).
DecisionTree fit_cart(const TreeSample& sample, const std::vector<MetaFeature>& features, std::size_t max_depth,
                      double min_impurity_decrease);

/// Macro-F1 of binary predictions.
double binary_macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Pooled out-of-fold macro-F1 for one depth. Fold membership depends only on
/// record content and seed, never on record order.
double cross_validated_f1(const TreeSample& sample, const std::vector<MetaFeature>& features, std::size_t max_depth,
                          const TreeTrainingConfig& cfg);

/// Presence labels of `fe` across the corpus.
TreeSample fe_sample(const MetaCorpus& corpus, const std::string& fe);

/// Meta-features whose |point-biserial r| with the presence of `fe` reaches
/// the threshold, in enum order; falls back to the top few. Throws
/// OneClassOnly when `fe` is always or never present.
std::vector<MetaFeature> select_features(const MetaCorpus& corpus, const std::string& fe, double threshold,
                                         std::size_t fallback = 3);

struct FeTreeReport {
    std::string label;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    bool constant = false;
    std::string constant_reason;
    std::vector<MetaFeature> selected;
    std::map<std::size_t, double> cv_f1_by_depth;
    std::size_t chosen_depth = 0;
    double cv_f1 = 0.0;

    nlohmann::ordered_json to_json() const;
};

struct FeTreeResult {
    DecisionTree tree;
    FeTreeReport report;
};

/// Feature selection, depth grid search and a final fit on the whole corpus.
/// Labels below the occurrence floor or with a single class become constant
/// predictors at the class prior.
FeTreeResult train_fe_tree(const MetaCorpus& corpus, const std::string& fe, const TreeTrainingConfig& cfg = {});

}  // namespace pipesynth
