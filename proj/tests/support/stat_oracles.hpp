#pragma once

#include <cmath>
#include <vector>

namespace testing {

// Reference formulas evaluated in long double with explicit central moments.
inline long double central_moment(const std::vector<double>& x, int k) {
    long double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    long double s = 0;
    for (double v : x) s += std::pow(static_cast<long double>(v) - m, k);
    return s / x.size();
}

inline double ref_skew(const std::vector<double>& x) {
    return static_cast<double>(central_moment(x, 3) / std::pow(central_moment(x, 2), 1.5L));
}

inline double ref_kurt(const std::vector<double>& x) {
    return static_cast<double>(central_moment(x, 4) / (central_moment(x, 2) * central_moment(x, 2)) - 3);
}

inline double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    long double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
    const long double mx = sx / x.size(), my = sy / y.size();
    long double cxy = 0, cxx = 0, cyy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cxy += (x[i] - mx) * (y[i] - my);
        cxx += (x[i] - mx) * (x[i] - mx);
        cyy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

// Group means form: (m1 - m0) / s * sqrt(p q).
inline double ref_point_biserial(const std::vector<double>& x, const std::vector<int>& y) {
    long double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) (y[i] ? (s1 += x[i], n1 += 1) : (s0 += x[i], n0 += 1));
    const long double n = n1 + n0;
    return static_cast<double>((s1 / n1 - s0 / n0) / std::sqrt(central_moment(x, 2)) * std::sqrt((n1 / n) * (n0 / n)));
}

}  // namespace testing
