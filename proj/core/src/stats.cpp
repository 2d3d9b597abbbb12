#include "pipesynth/stats.hpp"

#include <algorithm>
#include <cmath>

#include "pipesynth/error.hpp"

namespace pipesynth::stats {

namespace {

bool constant(std::span<const double> x) {
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return lo == x.end() || *lo == *hi;
}

struct CentralMoments {
    double m2 = 0, m3 = 0, m4 = 0;
};

CentralMoments central_moments(std::span<const double> x) {
    const double mu = mean(x);
    CentralMoments m;
    for (double v : x) {
        const double d = v - mu;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    const auto n = static_cast<double>(x.size());
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

}  // namespace

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double mu = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / static_cast<double>(x.size());
}

Statistic skewness(std::span<const double> x) {
    if (x.size() < 3 || constant(x)) return {0.0, true};
    auto m = central_moments(x);
    return {m.m3 / std::pow(m.m2, 1.5), false};
}

Statistic kurtosis(std::span<const double> x) {
    if (x.size() < 3 || constant(x)) return {0.0, true};
    auto m = central_moments(x);
    return {m.m4 / (m.m2 * m.m2) - 3.0, false};
}

Statistic pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
    if (x.size() < 2 || constant(x) || constant(y)) return {0.0, true};
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return {std::clamp(r, -1.0, 1.0), false};
}

Statistic point_biserial(std::span<const double> x, std::span<const int> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "point_biserial: length mismatch");
    if (x.size() < 2 || constant(x)) return {0.0, true};
    double sum1 = 0, sum0 = 0;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] != 0) {
            sum1 += x[i];
            ++n1;
        } else {
            sum0 += x[i];
        }
    }
    const std::size_t n0 = x.size() - n1;
    if (n1 == 0 || n0 == 0) return {0.0, true};
    const double p = static_cast<double>(n1) / static_cast<double>(x.size());
    const double s = std::sqrt(variance(x));
    const double r = (sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0)) / s * std::sqrt(p * (1.0 - p));
    return {std::clamp(r, -1.0, 1.0), false};
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace pipesynth::stats
