#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pipesynth/corpus.hpp"

namespace pipesynth {

/// Generator for desk-scale meta-corpora whose labels follow fixed rules, so
/// a trained predictor can be checked against known ground truth.
///
/// FE rules (each fires with the listed probability when its premise holds):
///   has_missing                        -> Imputer            0.95
///   1 <= count_strcat <= 3             -> OrdinalEncoder     0.95
///   count_strcat >= 4                  -> OneHotEncoder      0.95
///   has_text                           -> TextPreprocessor,
///                                         TextVectorizer     0.95 each
///   has_date                           -> DateFeaturization  0.95
///   frac_skew_tailed >= 0.3            -> LogScaler          0.90
///   count_numeric >= 5                 -> LinearScaler       0.90
///   target_imbalanced                  -> DataBalancer       0.95
///
/// Model rule: n_rows > 1e4 picks CatBoost (C) / LightGBM (R); otherwise a
/// text feature picks LogisticRegression (C) / Lasso (R); otherwise
/// RandomForest.
struct SyntheticCorpusOptions {
    double classification_share = 0.7;
    /// Share of records whose model is replaced by a random applicable one.
    double model_noise = 0.05;
};

class SplitMix {
  public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi].
    std::size_t integer(std::size_t lo, std::size_t hi);
    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::uint64_t state_;
};

MetaFeatureVector sample_synthetic_meta_features(SplitMix& rng, TaskKind task);
std::vector<std::string> planted_fe_sequence(const MetaFeatureVector& mf, SplitMix& rng);
std::string planted_model(const MetaFeatureVector& mf, TaskKind task);

/// Requires n >= 50. Same seed and n give a byte-identical corpus.
MetaCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n, const SyntheticCorpusOptions& options = {});

struct SyntheticProbe {
    TaskKind task;
    MetaFeatureVector meta_features;
    std::string planted_model;
};

/// Fresh meta-vectors (not part of any corpus) with their noise-free model.
std::vector<SyntheticProbe> sample_held_out(std::uint64_t seed, std::size_t n,
                                            const SyntheticCorpusOptions& options = {});

}  // namespace pipesynth
