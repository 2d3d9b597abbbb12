#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pipesynth/error.hpp"
#include "pipesynth/stats.hpp"
#include "stat_oracles.hpp"

namespace st = pipesynth::stats;

using testing::ref_kurt;
using testing::ref_pearson;
using testing::ref_point_biserial;
using testing::ref_skew;

TEST_CASE("moments match reference formulas on random vectors") {
    std::mt19937_64 rng(42);
    std::lognormal_distribution<double> lognormal(0.0, 0.7);
    std::normal_distribution<double> normal(3.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> x(5 + rng() % 200);
        for (auto& v : x) v = trial % 2 ? lognormal(rng) : normal(rng);
        worst = std::max(worst, std::abs(st::skewness(x).value - ref_skew(x)));
        worst = std::max(worst, std::abs(st::kurtosis(x).value - ref_kurt(x)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("skewness of a small hand-computed sample") {
    // mean 4, deviations -3,-2,-1,6: m2 = 50/4, m3 = 180/4.
    std::vector<double> x{1, 2, 3, 10};
    CHECK(st::skewness(x).value == doctest::Approx(45.0 / std::pow(12.5, 1.5)).epsilon(1e-14));
    // m4 = 1394/4
    CHECK(st::kurtosis(x).value == doctest::Approx(348.5 / (12.5 * 12.5) - 3.0).epsilon(1e-14));
}

TEST_CASE("degenerate moments") {
    std::vector<double> constant(10, 4.0);
    CHECK(st::skewness(constant).degenerate);
    CHECK(st::skewness(constant).value == 0.0);
    CHECK(st::kurtosis(std::vector<double>{1.0, 2.0}).degenerate);
    CHECK(st::pearson(constant, std::vector<double>(10, 1.0)).degenerate);
    CHECK_THROWS_AS(st::pearson(std::vector<double>{1, 2}, std::vector<double>{1}), pipesynth::Error);
}

TEST_CASE("pearson matches reference and is symmetric") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(3 + rng() % 100), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = normal(rng);
            y[i] = 0.5 * x[i] + normal(rng);
        }
        const double r = st::pearson(x, y).value;
        CHECK(std::abs(r - ref_pearson(x, y)) <= 1e-10);
        CHECK(r == doctest::Approx(st::pearson(y, x).value).epsilon(1e-14));
        CHECK(std::abs(r) <= 1.0 + 1e-12);
    }
    CHECK(st::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}).value == doctest::Approx(1.0));
    CHECK(st::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}).value == doctest::Approx(-1.0));
}

TEST_CASE("point-biserial equals pearson on the 0/1 coding") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng() % 100;
        std::vector<double> x(n), yd(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng() % 2);
            if (i < 2) y[i] = static_cast<int>(i);
            yd[i] = y[i];
            x[i] = normal(rng) + y[i];
        }
        CHECK(std::abs(st::point_biserial(x, y).value - st::pearson(x, yd).value) <= 1e-12);
        CHECK(std::abs(st::point_biserial(x, y).value - ref_point_biserial(x, y)) <= 1e-10);
    }
    CHECK(st::point_biserial(std::vector<double>{1, 2, 3}, std::vector<int>{1, 1, 1}).degenerate);
}

TEST_CASE("quantile interpolates linearly") {
    std::vector<double> s{1, 2, 3, 4};
    CHECK(st::quantile_sorted(s, 0.0) == 1.0);
    CHECK(st::quantile_sorted(s, 1.0) == 4.0);
    CHECK(st::quantile_sorted(s, 0.5) == doctest::Approx(2.5));
    CHECK(st::quantile_sorted(s, 0.25) == doctest::Approx(1.75));
}
