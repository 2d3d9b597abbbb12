#include "pipesynth/meta_features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <unordered_map>

#include "pipesynth/error.hpp"
#include "pipesynth/stats.hpp"

namespace pipesynth {

namespace {

using MF = MetaFeature;

constexpr std::array<std::string_view, kMetaFeatureCount> kNames = {
    "n_rows",            "n_features",         "n_targets",         "has_missing",
    "has_numeric",       "has_numcat",         "has_strcat",        "has_text",
    "has_date",          "count_numeric",      "count_numcat",      "count_strcat",
    "count_text",        "count_date",         "frac_skew_normal",  "frac_skew_tailed",
    "frac_kurt_normal",  "frac_kurt_tailed",   "frac_feat_normal",  "frac_feat_uniform",
    "frac_feat_poisson", "target_is_normal",   "target_is_uniform", "target_is_poisson",
    "norm_mean",         "norm_std",           "mean_cv",           "corr_min",
    "corr_max",          "corr_count",         "outlier_few_count", "outlier_many_count",
    "sparse_count",      "imbalanced_count",   "dominant_count",    "target_imbalanced",
    "target_continuous", "target_categorical",
};

constexpr std::array<MetaFeatureGroup, 10> kGroups = {{
    {"shape", 3},
    {"missing", 1},
    {"feature_types", 10},
    {"symmetry", 4},
    {"distribution", 6},
    {"tendency_dispersion", 3},
    {"correlation", 3},
    {"outliers", 2},
    {"value_frequency", 3},
    {"target_property", 3},
}};

constexpr std::array<MetaFeature, kMetaFeatureCount> make_all() {
    std::array<MetaFeature, kMetaFeatureCount> out{};
    for (std::size_t i = 0; i < kMetaFeatureCount; ++i) out[i] = static_cast<MetaFeature>(i);
    return out;
}

constexpr auto kAll = make_all();

double b(bool v) { return v ? 1.0 : 0.0; }

// Aggregations below always see columns in name order and values in sorted
// order so that results are bit-identical under row or column permutation.
std::vector<const Column*> sorted_by_name(std::vector<const Column*> cols) {
    std::sort(cols.begin(), cols.end(), [](const Column* a, const Column* c) { return a->name < c->name; });
    return cols;
}

std::uint64_t row_hash(const std::vector<const Column*>& cols, std::size_t row) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const Column* c : cols) {
        const Cell& cell = c->cells[row];
        if (const double* v = std::get_if<double>(&cell))
            mix(std::bit_cast<std::uint64_t>(*v == 0.0 ? 0.0 : *v));
        else
            mix(0x9e3779b97f4a7c15ull);
    }
    return h;
}

// Three-way compare of two rows over number-valued columns; missing sorts first.
int compare_rows(const std::vector<const Column*>& cols, std::size_t a, std::size_t c) {
    for (const Column* col : cols) {
        const double* x = std::get_if<double>(&col->cells[a]);
        const double* y = std::get_if<double>(&col->cells[c]);
        if (!x && !y) continue;
        if (!x) return -1;
        if (!y) return 1;
        if (*x < *y) return -1;
        if (*x > *y) return 1;
    }
    return 0;
}

std::vector<std::size_t> correlation_rows(const std::vector<const Column*>& cols, std::size_t n_rows,
                                          std::size_t max_rows) {
    std::vector<std::size_t> rows(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) rows[i] = i;
    if (n_rows <= max_rows) return rows;
    // Content-keyed sample: the chosen multiset of rows does not depend on row order.
    std::vector<std::uint64_t> hashes(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) hashes[i] = row_hash(cols, i);
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t c) {
        if (hashes[a] != hashes[c]) return hashes[a] < hashes[c];
        return compare_rows(cols, a, c) < 0;
    });
    rows.resize(max_rows);
    return rows;
}

struct CorrelationSummary {
    double min = 0.0, max = 0.0, strong = 0.0;
};

CorrelationSummary correlations(std::vector<const Column*> numeric, std::size_t n_rows,
                                const MetaFeatureThresholds& t) {
    if (numeric.size() > t.corr_max_columns) {
        const std::size_t stride = (numeric.size() + t.corr_max_columns - 1) / t.corr_max_columns;
        std::vector<const Column*> kept;
        for (std::size_t i = 0; i < numeric.size(); i += stride) kept.push_back(numeric[i]);
        numeric = std::move(kept);
    }
    CorrelationSummary s;
    if (numeric.size() < 2) return s;
    const auto rows = correlation_rows(numeric, n_rows, t.corr_max_rows);
    bool first = true;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        for (std::size_t j = i + 1; j < numeric.size(); ++j) {
            pairs.clear();
            for (std::size_t r : rows) {
                const double* x = std::get_if<double>(&numeric[i]->cells[r]);
                const double* y = std::get_if<double>(&numeric[j]->cells[r]);
                if (x && y) pairs.emplace_back(*x, *y);
            }
            std::sort(pairs.begin(), pairs.end());
            xs.clear();
            ys.clear();
            for (auto [x, y] : pairs) {
                xs.push_back(x);
                ys.push_back(y);
            }
            const double r = stats::pearson(xs, ys).value;
            s.min = first ? r : std::min(s.min, r);
            s.max = first ? r : std::max(s.max, r);
            first = false;
            if (std::abs(r) >= t.corr_strong_min) s.strong += 1.0;
        }
    }
    return s;
}

// Most-frequent-value share among non-missing cells.
double top_value_share(const Column& col) {
    std::size_t present = 0, top = 0;
    if (col.number_valued()) {
        std::unordered_map<double, std::size_t> counts;
        for (const auto& c : col.cells)
            if (const double* v = std::get_if<double>(&c)) {
                ++present;
                top = std::max(top, ++counts[*v == 0.0 ? 0.0 : *v]);
            }
    } else {
        std::unordered_map<std::string_view, std::size_t> counts;
        for (const auto& c : col.cells)
            if (const std::string* v = std::get_if<std::string>(&c)) {
                ++present;
                top = std::max(top, ++counts[*v]);
            }
    }
    return present == 0 ? 0.0 : static_cast<double>(top) / static_cast<double>(present);
}

bool is_nonneg_integer(double v) { return v >= 0.0 && std::floor(v) == v; }

}  // namespace

std::string_view name(MetaFeature f) { return kNames[index(f)]; }

std::optional<MetaFeature> parse_meta_feature(std::string_view text) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == text) return static_cast<MetaFeature>(i);
    return std::nullopt;
}

const std::array<MetaFeature, kMetaFeatureCount>& all_meta_features() { return kAll; }

std::span<const MetaFeatureGroup> meta_feature_groups() { return kGroups; }

std::size_t group_index(MetaFeature f) {
    std::size_t start = 0;
    for (std::size_t g = 0; g < kGroups.size(); ++g) {
        if (index(f) < start + kGroups[g].size) return g;
        start += kGroups[g].size;
    }
    return kGroups.size();
}

FeatureScale scale(MetaFeature f) {
    switch (f) {
        case MF::NRows: case MF::NFeatures: case MF::NTargets:
        case MF::CountNumeric: case MF::CountNumCat: case MF::CountStrCat: case MF::CountText: case MF::CountDate:
        case MF::CorrCount: case MF::OutlierFewCount: case MF::OutlierManyCount:
        case MF::SparseCount: case MF::ImbalancedCount: case MF::DominantCount:
            return FeatureScale::Count;
        case MF::FracSkewNormal: case MF::FracSkewTailed: case MF::FracKurtNormal: case MF::FracKurtTailed:
        case MF::FracFeatNormal: case MF::FracFeatUniform: case MF::FracFeatPoisson:
            return FeatureScale::Fraction;
        case MF::NormMean: case MF::NormStd: case MF::MeanCv: case MF::CorrMin: case MF::CorrMax:
            return FeatureScale::Real;
        default:
            return FeatureScale::Indicator;
    }
}

bool is_global(MetaFeature f) {
    switch (f) {
        case MF::NRows: case MF::NTargets:
        case MF::CorrMin: case MF::CorrMax: case MF::CorrCount:
        case MF::TargetIsNormal: case MF::TargetIsUniform: case MF::TargetIsPoisson:
        case MF::TargetImbalanced: case MF::TargetContinuous: case MF::TargetCategorical:
            return true;
        default:
            return false;
    }
}

nlohmann::ordered_json MetaFeatureVector::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (auto f : kAll) j[std::string(name(f))] = values_[index(f)];
    return j;
}

MetaFeatureVector MetaFeatureVector::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "meta_features must be an object");
    if (j.size() != kMetaFeatureCount)
        throw Error(ErrorCode::SchemaError,
                    "meta_features has " + std::to_string(j.size()) + " keys, expected " + std::to_string(kMetaFeatureCount));
    MetaFeatureVector v;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto f = parse_meta_feature(it.key());
        if (!f) throw Error(ErrorCode::SchemaError, "unknown meta-feature '" + it.key() + "'");
        if (!it.value().is_number() || !std::isfinite(it.value().get<double>()))
            throw Error(ErrorCode::SchemaError, "meta-feature '" + it.key() + "' is not a finite number");
        v[*f] = it.value().get<double>();
    }
    return v;
}

ColumnProfile profile_column(const Column& col, const MetaFeatureThresholds& t) {
    ColumnProfile p;
    p.number_valued = col.number_valued();
    const std::size_t missing = col.missing_count();
    p.has_missing = missing > 0;

    if (p.number_valued) {
        std::vector<double> v = col.numbers();
        std::sort(v.begin(), v.end());
        auto g1 = stats::skewness(v);
        auto g2 = stats::kurtosis(v);
        if (!g1.degenerate) {
            p.skew_normal = std::abs(g1.value) <= t.skew_normal_max;
            p.skew_tailed = std::abs(g1.value) > t.skew_tailed_min;
        }
        if (!g2.degenerate) {
            p.kurt_normal = std::abs(g2.value) <= t.kurt_normal_max;
            p.kurt_tailed = g2.value > t.kurt_tailed_min;
        }
        if (!g1.degenerate && !g2.degenerate) {
            const bool symmetric = std::abs(g1.value) <= t.normal_skew_max;
            p.dist_normal = symmetric && std::abs(g2.value) <= t.normal_kurt_max;
            p.dist_uniform = std::abs(g1.value) <= t.uniform_skew_max &&
                             std::abs(g2.value - t.uniform_kurt_center) <= t.uniform_kurt_tol;
        }
        if (!v.empty()) {
            const double mu = stats::mean(v);
            const double var = stats::variance(v);
            if (mu > 0.0 && std::all_of(v.begin(), v.end(), is_nonneg_integer))
                p.dist_poisson = std::abs(var / mu - 1.0) <= t.poisson_dispersion_tol;

            const double lo = v.front(), hi = v.back();
            if (hi > lo) {
                std::vector<double> norm(v.size());
                for (std::size_t i = 0; i < v.size(); ++i) norm[i] = (v[i] - lo) / (hi - lo);
                p.norm_mean = stats::mean(norm);
                p.norm_std = std::sqrt(stats::variance(norm));
            } else {
                p.norm_mean = 0.0;
                p.norm_std = 0.0;
            }
            if (std::abs(mu) > t.cv_mean_epsilon) p.cv = std::sqrt(var) / std::abs(mu);

            const double q1 = stats::quantile_sorted(v, 0.25), q3 = stats::quantile_sorted(v, 0.75);
            const double iqr = q3 - q1;
            const double lo_fence = q1 - t.iqr_multiplier * iqr, hi_fence = q3 + t.iqr_multiplier * iqr;
            const auto outside = std::count_if(v.begin(), v.end(), [&](double x) { return x < lo_fence || x > hi_fence; });
            const double frac = static_cast<double>(outside) / static_cast<double>(v.size());
            p.outliers_few = frac > 0.0 && frac <= t.outlier_few_max;
            p.outliers_many = frac > t.outlier_many_min;
        }
    }

    if (!col.cells.empty()) {
        std::size_t empty = missing;
        if (p.number_valued)
            for (const auto& c : col.cells)
                if (const double* x = std::get_if<double>(&c); x && *x == 0.0) ++empty;
        p.sparse = static_cast<double>(empty) / static_cast<double>(col.cells.size()) >= t.sparse_min;
        const double top = top_value_share(col);
        p.dominant = top >= t.dominant_min;
        p.imbalanced = top >= t.imbalanced_min && top < t.dominant_min;
    }
    return p;
}

MetaFeatureVector compute_meta_features(const Dataset& d, const MetaFeatureThresholds& t) {
    MetaFeatureVector v;
    const auto features = sorted_by_name(d.features());
    std::vector<ColumnProfile> profiles;
    profiles.reserve(features.size());
    for (const Column* c : features) profiles.push_back(profile_column(*c, t));

    v[MF::NRows] = static_cast<double>(d.n_rows);
    v[MF::NFeatures] = static_cast<double>(features.size());
    v[MF::NTargets] = static_cast<double>(d.target_names.size());

    std::array<double, 5> kind_counts{};
    std::vector<const Column*> numeric;
    for (std::size_t i = 0; i < features.size(); ++i) {
        kind_counts[static_cast<std::size_t>(features[i]->kind)] += 1.0;
        if (profiles[i].has_missing) v[MF::HasMissing] = 1.0;
        if (profiles[i].number_valued) numeric.push_back(features[i]);
    }
    const std::array<std::pair<MF, MF>, 5> kind_features = {{
        {MF::HasNumeric, MF::CountNumeric},
        {MF::HasNumCat, MF::CountNumCat},
        {MF::HasStrCat, MF::CountStrCat},
        {MF::HasText, MF::CountText},
        {MF::HasDate, MF::CountDate},
    }};
    for (std::size_t k = 0; k < kind_features.size(); ++k) {
        v[kind_features[k].first] = b(kind_counts[k] > 0.0);
        v[kind_features[k].second] = kind_counts[k];
    }

    double n_numeric = 0, skew_normal = 0, skew_tailed = 0, kurt_normal = 0, kurt_tailed = 0;
    double normal = 0, uniform = 0, poisson = 0, few = 0, many = 0;
    double mean_sum = 0, std_sum = 0, cv_sum = 0, n_norm = 0, n_cv = 0;
    double sparse = 0, imbalanced = 0, dominant = 0;
    for (const auto& p : profiles) {
        sparse += b(p.sparse);
        imbalanced += b(p.imbalanced);
        dominant += b(p.dominant);
        if (!p.number_valued) continue;
        n_numeric += 1.0;
        skew_normal += b(p.skew_normal);
        skew_tailed += b(p.skew_tailed);
        kurt_normal += b(p.kurt_normal);
        kurt_tailed += b(p.kurt_tailed);
        normal += b(p.dist_normal);
        uniform += b(p.dist_uniform);
        poisson += b(p.dist_poisson);
        few += b(p.outliers_few);
        many += b(p.outliers_many);
        if (p.norm_mean) {
            mean_sum += *p.norm_mean;
            std_sum += *p.norm_std;
            n_norm += 1.0;
        }
        if (p.cv) {
            cv_sum += *p.cv;
            n_cv += 1.0;
        }
    }
    auto frac = [n_numeric](double count) { return n_numeric > 0 ? count / n_numeric : 0.0; };
    v[MF::FracSkewNormal] = frac(skew_normal);
    v[MF::FracSkewTailed] = frac(skew_tailed);
    v[MF::FracKurtNormal] = frac(kurt_normal);
    v[MF::FracKurtTailed] = frac(kurt_tailed);
    v[MF::FracFeatNormal] = frac(normal);
    v[MF::FracFeatUniform] = frac(uniform);
    v[MF::FracFeatPoisson] = frac(poisson);
    v[MF::NormMean] = n_norm > 0 ? mean_sum / n_norm : 0.0;
    v[MF::NormStd] = n_norm > 0 ? std_sum / n_norm : 0.0;
    v[MF::MeanCv] = n_cv > 0 ? cv_sum / n_cv : 0.0;
    v[MF::OutlierFewCount] = few;
    v[MF::OutlierManyCount] = many;
    v[MF::SparseCount] = sparse;
    v[MF::ImbalancedCount] = imbalanced;
    v[MF::DominantCount] = dominant;

    auto corr = correlations(numeric, d.n_rows, t);
    v[MF::CorrMin] = corr.min;
    v[MF::CorrMax] = corr.max;
    v[MF::CorrCount] = corr.strong;

    if (!d.target_names.empty()) {
        const Column& target = d.primary_target();
        const ColumnProfile tp = profile_column(target, t);
        if (tp.number_valued) {
            v[MF::TargetIsNormal] = b(tp.dist_normal);
            v[MF::TargetIsUniform] = b(tp.dist_uniform);
            v[MF::TargetIsPoisson] = b(tp.dist_poisson);
        }
        if (d.task == TaskKind::Classification) {
            std::map<std::string, std::size_t> classes;
            for (const auto& c : target.cells) {
                if (const double* x = std::get_if<double>(&c))
                    ++classes[format_number(*x == 0.0 ? 0.0 : *x)];
                else if (const std::string* s = std::get_if<std::string>(&c))
                    ++classes[*s];
            }
            if (classes.size() >= 2) {
                auto [lo, hi] = std::minmax_element(classes.begin(), classes.end(),
                                                    [](const auto& a, const auto& c) { return a.second < c.second; });
                const double ratio = static_cast<double>(lo->second) / static_cast<double>(hi->second);
                v[MF::TargetImbalanced] = b(ratio <= t.target_minority_ratio_max);
            }
        }
    }
    v[MF::TargetContinuous] = b(d.task == TaskKind::Regression);
    v[MF::TargetCategorical] = b(d.task == TaskKind::Classification);
    return v;
}

std::optional<double> column_feature_value(const Column& col, const ColumnProfile& p, MetaFeature f) {
    if (is_global(f)) return std::nullopt;
    switch (f) {
        case MF::NFeatures: return 1.0;
        case MF::HasMissing: return b(p.has_missing);
        case MF::HasNumeric: case MF::CountNumeric: return b(col.kind == ColumnKind::Numeric);
        case MF::HasNumCat: case MF::CountNumCat: return b(col.kind == ColumnKind::NumberCategory);
        case MF::HasStrCat: case MF::CountStrCat: return b(col.kind == ColumnKind::StringCategory);
        case MF::HasText: case MF::CountText: return b(col.kind == ColumnKind::Text);
        case MF::HasDate: case MF::CountDate: return b(col.kind == ColumnKind::Date);
        case MF::FracSkewNormal: return b(p.skew_normal);
        case MF::FracSkewTailed: return b(p.skew_tailed);
        case MF::FracKurtNormal: return b(p.kurt_normal);
        case MF::FracKurtTailed: return b(p.kurt_tailed);
        case MF::FracFeatNormal: return b(p.dist_normal);
        case MF::FracFeatUniform: return b(p.dist_uniform);
        case MF::FracFeatPoisson: return b(p.dist_poisson);
        case MF::NormMean: return p.norm_mean;
        case MF::NormStd: return p.norm_std;
        case MF::MeanCv: return p.cv;
        case MF::OutlierFewCount: return b(p.outliers_few);
        case MF::OutlierManyCount: return b(p.outliers_many);
        case MF::SparseCount: return b(p.sparse);
        case MF::ImbalancedCount: return b(p.imbalanced);
        case MF::DominantCount: return b(p.dominant);
        default: return std::nullopt;
    }
}

std::optional<double> column_feature_value(const Column& col, MetaFeature f, const MetaFeatureThresholds& t) {
    if (is_global(f)) return std::nullopt;
    return column_feature_value(col, profile_column(col, t), f);
}

}  // namespace pipesynth
