#ifndef HRPOT_TEST_UTIL_HPP
#define HRPOT_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

inline double mean(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double> &v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

// Kolmogorov-Smirnov distance between the empirical distribution of data and
// a reference distribution function.
inline double ks_statistic(std::vector<double> data,
                           const std::function<double(double)> &cdf) {
    std::sort(data.begin(), data.end());
    const double n = static_cast<double>(data.size());
    double d = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = cdf(data[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Asymptotic Kolmogorov-Smirnov critical value at level alpha.
inline double ks_critical(double alpha, std::size_t n) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

namespace detail {
inline double simpson_rule(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)> &f, double a,
                                   double fa, double b, double fb, double m, double fm,
                                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(a, fa, m, fm, flm);
    const double right = simpson_rule(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
} // namespace detail

inline double adaptive_simpson(const std::function<double(double)> &f, double a, double b,
                               double tol = 1e-10, int depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson_rule(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, depth);
}

// Adaptive Simpson over fixed panels; reliable when the mass is localized
// somewhere inside a wide interval where a single global estimate would
// terminate early on zeros.
inline double panel_integrate(const std::function<double(double)> &f, double a, double b,
                              int panels, double tol = 1e-10) {
    double total = 0.0;
    const double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        total += adaptive_simpson(f, a + i * width, a + (i + 1) * width, tol / panels);
    }
    return total;
}

} // namespace testutil

#endif
