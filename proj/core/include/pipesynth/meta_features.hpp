#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pipesynth/tabular.hpp"

namespace pipesynth {

/// The 38 dataset-level meta-features, in serialization order.
enum class MetaFeature : std::uint8_t {
    // shape (3)
    NRows, NFeatures, NTargets,
    // missing entries (1)
    HasMissing,
    // feature types (10)
    HasNumeric, HasNumCat, HasStrCat, HasText, HasDate,
    CountNumeric, CountNumCat, CountStrCat, CountText, CountDate,
    // symmetry (4)
    FracSkewNormal, FracSkewTailed, FracKurtNormal, FracKurtTailed,
    // distribution (6)
    FracFeatNormal, FracFeatUniform, FracFeatPoisson, TargetIsNormal, TargetIsUniform, TargetIsPoisson,
    // tendency and dispersion (3)
    NormMean, NormStd, MeanCv,
    // correlation (3)
    CorrMin, CorrMax, CorrCount,
    // outliers (2)
    OutlierFewCount, OutlierManyCount,
    // value frequency (3)
    SparseCount, ImbalancedCount, DominantCount,
    // target property (3)
    TargetImbalanced, TargetContinuous, TargetCategorical,
};

inline constexpr std::size_t kMetaFeatureCount = 38;

/// How a meta-feature's value is measured. Count/Indicator/Fraction features
/// have a 0/1 per-column analogue; Real ones have a per-column statistic.
enum class FeatureScale { Count, Indicator, Fraction, Real };

struct MetaFeatureGroup {
    std::string_view name;
    std::size_t size;
};

std::string_view name(MetaFeature f);
std::optional<MetaFeature> parse_meta_feature(std::string_view text);
const std::array<MetaFeature, kMetaFeatureCount>& all_meta_features();
std::span<const MetaFeatureGroup> meta_feature_groups();
std::size_t group_index(MetaFeature f);
FeatureScale scale(MetaFeature f);
/// Dataset-global features have no per-column analogue.
bool is_global(MetaFeature f);

inline std::size_t index(MetaFeature f) { return static_cast<std::size_t>(f); }

class MetaFeatureVector {
  public:
    MetaFeatureVector() { values_.fill(0.0); }

    double& operator[](MetaFeature f) { return values_[index(f)]; }
    double operator[](MetaFeature f) const { return values_[index(f)]; }
    std::span<const double, kMetaFeatureCount> values() const { return values_; }

    /// Flat object keyed by feature name in enum order.
    nlohmann::ordered_json to_json() const;
    /// Requires exactly the 38 keys with finite numeric values.
    static MetaFeatureVector from_json(const nlohmann::json& j);

    bool operator==(const MetaFeatureVector&) const = default;

  private:
    std::array<double, kMetaFeatureCount> values_;
};

struct MetaFeatureThresholds {
    double skew_normal_max = 0.5;
    double skew_tailed_min = 2.0;
    double kurt_normal_max = 1.0;
    double kurt_tailed_min = 3.0;

    double normal_skew_max = 0.3;
    double normal_kurt_max = 1.0;
    double uniform_kurt_center = -1.2;
    double uniform_kurt_tol = 0.3;
    double uniform_skew_max = 0.3;
    double poisson_dispersion_tol = 0.2;

    double cv_mean_epsilon = 1e-12;

    double corr_strong_min = 0.8;
    std::size_t corr_max_rows = 10000;
    std::size_t corr_max_columns = 50;

    double iqr_multiplier = 1.5;
    double outlier_few_max = 0.01;
    double outlier_many_min = 0.05;

    double sparse_min = 0.5;
    double dominant_min = 0.8;
    double imbalanced_min = 0.6;

    double target_minority_ratio_max = 0.2;
};

/// Per-column statistics shared by the dataset aggregates and the
/// per-column analogues.
struct ColumnProfile {
    bool number_valued = false;
    bool has_missing = false;
    bool skew_normal = false, skew_tailed = false, kurt_normal = false, kurt_tailed = false;
    bool dist_normal = false, dist_uniform = false, dist_poisson = false;
    std::optional<double> norm_mean, norm_std, cv;
    bool outliers_few = false, outliers_many = false;
    bool sparse = false, imbalanced = false, dominant = false;
};

ColumnProfile profile_column(const Column& col, const MetaFeatureThresholds& t = {});

MetaFeatureVector compute_meta_features(const Dataset& d, const MetaFeatureThresholds& t = {});

/// Per-column analogue of a meta-feature; nullopt when the feature is global
/// or the statistic is undefined for the column.
std::optional<double> column_feature_value(const Column& col, MetaFeature f, const MetaFeatureThresholds& t = {});
std::optional<double> column_feature_value(const Column& col, const ColumnProfile& profile, MetaFeature f);

struct ColumnFeatureProbe {
    MetaFeature meta_feature;
    bool applicable;

    std::optional<double> value(const Column& col, const MetaFeatureThresholds& t = {}) const {
        return applicable ? column_feature_value(col, meta_feature, t) : std::nullopt;
    }
};

inline ColumnFeatureProbe probe(MetaFeature f) { return {f, !is_global(f)}; }

}  // namespace pipesynth
