#pragma once

#include <span>
#include <vector>

namespace pipesynth::stats {

/// A statistic that may be undefined for its input. Degenerate results carry
/// value 0 so that aggregations can treat them as "no signal".
struct Statistic {
    double value = 0.0;
    bool degenerate = false;
};

double mean(std::span<const double> x);
/// Population variance (divides by n).
double variance(std::span<const double> x);

/// g1 = m3 / m2^(3/2), population central moments. Degenerate for n < 3 or
/// constant input.
Statistic skewness(std::span<const double> x);
/// Excess kurtosis g2 = m4 / m2^2 - 3. Same degeneracy rules as skewness.
Statistic kurtosis(std::span<const double> x);

/// Pearson r. Throws InvalidArgument on length mismatch; degenerate when
/// n < 2 or either side is constant.
Statistic pearson(std::span<const double> x, std::span<const double> y);

/// r_pb = (mean(x|y=1) - mean(x|y=0)) / s_x * sqrt(p (1 - p)), s_x the
/// population standard deviation and p the share of positives.
Statistic point_biserial(std::span<const double> x, std::span<const int> y);

/// Linear-interpolation quantile on a sorted sample (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace pipesynth::stats
