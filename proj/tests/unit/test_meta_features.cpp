#include <doctest.h>

#include <random>
#include <set>

#include "pipesynth/error.hpp"
#include "pipesynth/meta_features.hpp"
#include "test_support.hpp"

using namespace pipesynth;
using MF = MetaFeature;

TEST_CASE("38 named meta-features in ten groups") {
    CHECK(all_meta_features().size() == 38);
    std::set<std::string_view> names;
    for (auto f : all_meta_features()) {
        names.insert(name(f));
        CHECK(parse_meta_feature(name(f)) == f);
    }
    CHECK(names.size() == 38);
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (const auto& g : meta_feature_groups()) {
        sizes.push_back(g.size);
        total += g.size;
    }
    CHECK(sizes == std::vector<std::size_t>{3, 1, 10, 4, 6, 3, 3, 2, 3, 3});
    CHECK(total == 38);
    CHECK(group_index(MF::NRows) == 0);
    CHECK(group_index(MF::HasMissing) == 1);
    CHECK(group_index(MF::CountDate) == 2);
    CHECK(group_index(MF::TargetCategorical) == 9);
    CHECK_FALSE(parse_meta_feature("n_cols").has_value());
}

TEST_CASE("kind counts and shape on a mixed dataset") {
    auto d = testing::mixed_classification();
    auto mf = compute_meta_features(d);
    CHECK(mf[MF::NRows] == 120);
    CHECK(mf[MF::NFeatures] == 4);
    CHECK(mf[MF::NTargets] == 1);
    CHECK(mf[MF::HasMissing] == 1);
    CHECK(mf[MF::CountNumeric] == 3);
    CHECK(mf[MF::CountStrCat] == 1);
    CHECK(mf[MF::HasStrCat] == 1);
    CHECK(mf[MF::HasText] == 0);
    CHECK(mf[MF::TargetCategorical] == 1);
    CHECK(mf[MF::TargetContinuous] == 0);
    CHECK(mf.to_json().size() == 38);
}

TEST_CASE("hand-computed distribution and tendency features") {
    // x cycles 0..4 (symmetric, discrete uniform), y = 2x.
    std::vector<std::vector<std::string>> rows;
    for (int rep = 0; rep < 5; ++rep)
        for (int i = 0; i < 5; ++i) rows.push_back({std::to_string(i), std::to_string(2 * i), i < 1 ? "a" : "b"});
    auto d = testing::frame({"x", "y", "t"}, rows, {"t"});
    auto mf = compute_meta_features(d);
    CHECK(mf[MF::CountNumCat] == 2);
    CHECK(mf[MF::FracSkewNormal] == 1.0);
    // excess kurtosis of 0..4 is 6.8 / 4 - 3 = -1.3: not normal, within the uniform band
    CHECK(mf[MF::FracKurtNormal] == 0.0);
    CHECK(mf[MF::FracFeatUniform] == 1.0);
    // x has variance 2 = mean 2, y has variance 8 over mean 4
    CHECK(mf[MF::FracFeatPoisson] == 0.5);
    CHECK(mf[MF::NormMean] == doctest::Approx(0.5));
    CHECK(mf[MF::NormStd] == doctest::Approx(std::sqrt(2.0) / 4.0));
    CHECK(mf[MF::MeanCv] == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(mf[MF::CorrMin] == doctest::Approx(1.0));
    CHECK(mf[MF::CorrMax] == doctest::Approx(1.0));
    CHECK(mf[MF::CorrCount] == 1.0);
    CHECK(mf[MF::OutlierFewCount] == 0.0);
    CHECK(mf[MF::OutlierManyCount] == 0.0);
    // minority 'a' holds 5 of 25 rows: 5/20 = 0.25 is above the 0.2 ratio
    CHECK(mf[MF::TargetImbalanced] == 0.0);
}

TEST_CASE("value-frequency and target features") {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 40; ++i)
        rows.push_back({i < 30 ? "0" : std::to_string(i), i < 34 ? "k" : "m", i < 4 ? "rare" : "common"});
    auto mf = compute_meta_features(testing::frame({"z", "s", "t"}, rows, {"t"}));
    CHECK(mf[MF::SparseCount] == 1.0);       // 30 of 40 zeros
    CHECK(mf[MF::DominantCount] == 1.0);     // 'k' holds 0.85, z's zero holds 0.75
    CHECK(mf[MF::ImbalancedCount] == 1.0);   // z's top share 0.75 lies in [0.6, 0.8)
    CHECK(mf[MF::TargetImbalanced] == 1.0);  // 4 / 36
}

TEST_CASE("regression target distribution flags") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 500; ++i) rows.push_back({format_number(normal(rng)), format_number(normal(rng))});
    auto mf = compute_meta_features(testing::frame({"a", "y"}, rows, {"y"}, TaskKind::Regression));
    CHECK(mf[MF::TargetContinuous] == 1.0);
    CHECK(mf[MF::TargetIsNormal] == 1.0);
    CHECK(mf[MF::TargetIsUniform] == 0.0);
    CHECK(mf[MF::TargetImbalanced] == 0.0);
}

TEST_CASE("meta-features are invariant under row permutation") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        auto d = testing::random_dataset(rng);
        auto p = testing::permuted(d, rng);
        CHECK(compute_meta_features(d) == compute_meta_features(p));
    }
}

TEST_CASE("per-column values of column-level features") {
    auto d = testing::mixed_classification();
    const Column& a = *d.find("A");
    const Column& c = *d.find("C");
    CHECK(column_feature_value(a, MF::HasMissing) == 1.0);
    CHECK(column_feature_value(c, MF::HasMissing) == 0.0);
    CHECK(column_feature_value(c, MF::CountStrCat) == 1.0);
    CHECK(column_feature_value(a, MF::CountStrCat) == 0.0);
    CHECK(column_feature_value(a, MF::NFeatures) == 1.0);
    CHECK_FALSE(column_feature_value(a, MF::NRows).has_value());
    CHECK_FALSE(column_feature_value(c, MF::NormMean).has_value());
    CHECK_FALSE(probe(MF::CorrMax).applicable);
}

TEST_CASE("meta-feature JSON validation") {
    auto mf = compute_meta_features(testing::mixed_classification());
    CHECK(MetaFeatureVector::from_json(mf.to_json()) == mf);
    auto j = mf.to_json();
    j.erase("n_rows");
    CHECK_THROWS_AS(MetaFeatureVector::from_json(j), Error);
    j = mf.to_json();
    j["n_rows"] = "many";
    CHECK_THROWS_AS(MetaFeatureVector::from_json(j), Error);
}
