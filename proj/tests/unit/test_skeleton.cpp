#include <doctest.h>

#include "pipesynth/error.hpp"
#include "pipesynth/skeleton.hpp"
#include "test_support.hpp"

using namespace pipesynth;

namespace {

DecisionTree stump(MetaFeature f, double thr, double lo, double hi) {
    return DecisionTree::from_json({{"max_depth", 1},
                                    {"features", {std::string(name(f))}},
                                    {"root",
                                     {{"prob", 0.5},
                                      {"feature", std::string(name(f))},
                                      {"threshold", thr},
                                      {"lt", {{"prob", lo}}},
                                      {"ge", {{"prob", hi}}}}}});
}

SkeletonPredictorBundle hand_bundle() {
    SkeletonPredictorBundle b;
    b.fe_trees.emplace("Imputer", stump(MetaFeature::HasMissing, 0.5, 0.05, 0.9));
    b.fe_trees.emplace("OrdinalEncoder", stump(MetaFeature::HasStrCat, 0.5, 0.1, 0.8));
    b.fe_trees.emplace("OneHotEncoder", stump(MetaFeature::CountStrCat, 4.0, 0.2, 0.9));
    b.fe_trees.emplace("DataBalancer", DecisionTree::constant(0.7));
    b.rankers.emplace(TaskKind::Classification,
                      ModelRanker::frequency_fallback(TaskKind::Classification,
                                                      {{"CatBoost", 0.5}, {"RandomForest", 0.3}, {"LogisticRegression", 0.2}}));
    b.rankers.emplace(TaskKind::Regression,
                      ModelRanker::frequency_fallback(TaskKind::Regression,
                                                      {{"GaussianNB", 0.6}, {"Lasso", 0.3}, {"RandomForest", 0.1}}));
    return b;
}

const SkeletonFe* find_fe(const Skeleton& s, const std::string& label) {
    for (const auto& f : s.fe)
        if (f.label == label) return &f;
    return nullptr;
}

}  // namespace

TEST_CASE("per-column reading of conditions") {
    auto d = testing::mixed_classification();
    const auto& a = *d.find("A");
    const auto& c = *d.find("C");
    const auto& dcol = *d.find("D");
    auto pa = profile_column(a), pc = profile_column(c), pd = profile_column(dcol);
    const Condition missing_ge{MetaFeature::HasMissing, CompareOp::GE, 0.5};
    const Condition missing_lt{MetaFeature::HasMissing, CompareOp::LT, 0.5};
    CHECK(column_satisfies(a, pa, missing_ge));
    CHECK_FALSE(column_satisfies(dcol, pd, missing_ge));
    CHECK(column_satisfies(dcol, pd, missing_lt));
    CHECK_FALSE(column_satisfies(a, pa, missing_lt));
    // uninformative thresholds select nothing
    CHECK_FALSE(column_satisfies(a, pa, {MetaFeature::HasMissing, CompareOp::GE, 0.0}));
    CHECK_FALSE(column_satisfies(dcol, pd, {MetaFeature::HasMissing, CompareOp::LT, 1.5}));
    // counts read per column as 0/1
    CHECK(column_satisfies(c, pc, {MetaFeature::CountStrCat, CompareOp::GE, 3.0}));
    CHECK_FALSE(column_satisfies(dcol, pd, {MetaFeature::CountStrCat, CompareOp::GE, 3.0}));
    // global features select nothing
    CHECK_FALSE(column_satisfies(a, pa, {MetaFeature::NRows, CompareOp::GE, 1.0}));
}

TEST_CASE("relevant columns come from the decision path") {
    auto d = testing::mixed_classification();
    const auto& tax = Taxonomy::builtin();
    auto cols = infer_relevant_columns({{MetaFeature::HasMissing, CompareOp::GE, 0.5}}, d, tax.fe("Imputer")->fallback);
    CHECK(cols == std::vector<std::string>{"A", "B"});
    cols = infer_relevant_columns({{MetaFeature::HasStrCat, CompareOp::GE, 0.5}}, d, tax.fe("OrdinalEncoder")->fallback);
    CHECK(cols == std::vector<std::string>{"C"});
    cols = infer_relevant_columns({{MetaFeature::NRows, CompareOp::GE, 10.0}}, d, tax.fe("Imputer")->fallback);
    CHECK(cols == std::vector<std::string>{"A", "B"});
    cols = infer_relevant_columns({{MetaFeature::NRows, CompareOp::GE, 10.0}, {MetaFeature::HasMissing, CompareOp::LT, 0.5}},
                                  d, tax.fe("Imputer")->fallback);
    CHECK(cols == std::vector<std::string>{"C", "D"});
    for (const auto& name : cols) CHECK_FALSE(d.is_target(name));
}

TEST_CASE("seeding produces k skeletons sharing one FE set") {
    auto d = testing::mixed_classification();
    auto b = hand_bundle();
    auto seeded = seed_pipelines(b, d, 2);
    CHECK(seeded.fe_probabilities.size() == 4);
    REQUIRE(seeded.skeletons.size() == 2);
    CHECK(seeded.skeletons[0].model == "CatBoost");
    CHECK(seeded.skeletons[0].model_rank == 1);
    CHECK(seeded.skeletons[1].model == "RandomForest");
    CHECK(seeded.skeletons[1].model_rank == 2);
    CHECK(seeded.skeletons[0].fe == seeded.skeletons[1].fe);
    const auto& s = seeded.skeletons[0];
    REQUIRE(find_fe(s, "Imputer"));
    CHECK(find_fe(s, "Imputer")->columns == std::vector<std::string>{"A", "B"});
    CHECK(find_fe(s, "Imputer")->prob == 0.9);
    REQUIRE(find_fe(s, "OrdinalEncoder"));
    CHECK(find_fe(s, "OrdinalEncoder")->columns == std::vector<std::string>{"C"});
    CHECK(find_fe(s, "OneHotEncoder") == nullptr);
    REQUIRE(find_fe(s, "DataBalancer"));
    CHECK(find_fe(s, "DataBalancer")->path.empty());
    // descending probability
    for (std::size_t i = 1; i < s.fe.size(); ++i) CHECK(s.fe[i - 1].prob >= s.fe[i].prob);

    auto j = s.to_json();
    CHECK(j["model"] == "MODEL:CatBoost");
    CHECK(j["fe"][0]["label"] == "FE:Imputer");
}

TEST_CASE("k beyond the ranking truncates; zero is rejected") {
    auto d = testing::mixed_classification();
    auto b = hand_bundle();
    CHECK(seed_pipelines(b, d, 10).skeletons.size() == 3);
    CHECK_THROWS_AS(seed_pipelines(b, d, 0), Error);
}

TEST_CASE("regression drops class balancing and inapplicable models") {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 40; ++i)
        rows.push_back({format_number(i * 0.5), i % 5 == 0 ? "" : std::to_string(i % 4), format_number(i * 1.5 + 2)});
    auto d = testing::frame({"x", "z", "y"}, rows, {"y"}, TaskKind::Regression);
    auto b = hand_bundle();
    auto seeded = seed_pipelines(b, d, 3);
    REQUIRE(seeded.skeletons.size() == 2);
    CHECK(seeded.skeletons[0].model == "Lasso");
    CHECK(seeded.skeletons[1].model == "RandomForest");
    CHECK(find_fe(seeded.skeletons[0], "DataBalancer") == nullptr);
    REQUIRE(find_fe(seeded.skeletons[0], "Imputer"));
    CHECK(find_fe(seeded.skeletons[0], "Imputer")->columns == std::vector<std::string>{"z"});
}

TEST_CASE("predict_fe filters and sorts by probability") {
    auto d = testing::mixed_classification();
    auto b = hand_bundle();
    auto mf = compute_meta_features(d);
    auto p = predict_fe(b, mf, 0.75);
    REQUIRE(p.size() == 2);
    CHECK(p[0].label == "Imputer");
    CHECK(p[1].label == "OrdinalEncoder");
    CHECK(predict_fe(b, mf, 0.0).size() == 4);
}
