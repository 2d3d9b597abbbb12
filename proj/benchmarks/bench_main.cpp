#include <random>

#include <benchmark/benchmark.h>

#include "pipesynth/bundle.hpp"
#include "pipesynth/instantiation.hpp"
#include "pipesynth/meta_features.hpp"
#include "pipesynth/synthetic_corpus.hpp"
#include "test_support.hpp"

using namespace pipesynth;

static void BM_MetaFeatures(benchmark::State& state) {
    const auto d = testing::mixed_classification(1, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_meta_features(d));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MetaFeatures)->Arg(1000)->Arg(10000)->Arg(100000);

static void BM_FitCart(benchmark::State& state) {
    const auto corpus = generate_synthetic_corpus(7, static_cast<std::size_t>(state.range(0)));
    const auto sample = fe_sample(corpus, "Imputer");
    const std::vector<MetaFeature> features(all_meta_features().begin(), all_meta_features().end());
    for (auto _ : state) benchmark::DoNotOptimize(fit_cart(sample, features, 5, 0.01));
}
BENCHMARK(BM_FitCart)->Arg(500)->Arg(2000);

static void BM_TrainBundle(benchmark::State& state) {
    const auto corpus = generate_synthetic_corpus(7, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(train_bundle(corpus));
}
BENCHMARK(BM_TrainBundle)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_OrderSkeleton(benchmark::State& state) {
    Skeleton s;
    s.model = "CatBoost";
    s.fe = {{"Imputer", 0.81, {"A", "B"}, {}},       {"OrdinalEncoder", 0.73, {"C"}, {}},
            {"OneHotEncoder", 0.70, {"C"}, {}},      {"LinearScaler", 0.69, {"A", "B", "D"}, {}},
            {"DataBalancer", 0.58, {"A", "B"}, {}},  {"LogScaler", 0.55, {"D"}, {}}};
    for (auto _ : state) benchmark::DoNotOptimize(order_skeleton(s, OrderDag::builtin_default()));
}
BENCHMARK(BM_OrderSkeleton);

static void BM_MineOrderDag(benchmark::State& state) {
    const auto corpus = generate_synthetic_corpus(7, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mine_order_dag(corpus));
}
BENCHMARK(BM_MineOrderDag)->Arg(500)->Arg(5000);
BENCHMARK_MAIN();
