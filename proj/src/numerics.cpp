#include "hrpot/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrpot {

namespace {
constexpr double kInvSqrtTwoPi = 0.3989422804014326779399460599343818685;
constexpr double kInvSqrtTwo = 0.7071067811865475244008443621048490393;
} // namespace

double std_normal_pdf(double x) noexcept {
    return kInvSqrtTwoPi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) noexcept {
    // erfc is accurate to a few ulp over the whole range and underflows
    // only past x = -37.5, which is all the tail we ever need.
    return 0.5 * std::erfc(-x * kInvSqrtTwo);
}

double std_normal_logcdf(double x) noexcept {
    if (x > -37.0) {
        return std::log(0.5 * std::erfc(-x * kInvSqrtTwo));
    }
    // Asymptotic expansion of the Mills ratio; relative error below 1e-10
    // at x = -37 and improving further out.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - 0.5 * kLogTwoPi - std::log(-x) + std::log(series);
}

namespace {

// Wichura's PPND16 rational approximation to the normal quantile,
// |error| < 1e-15 over (0,1).
double quantile_rational(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return (q < 0.0) ? -x : x;
}

} // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie strictly inside (0,1)");
    }
    double x = quantile_rational(p);
    // One Newton step. Skipped when the density underflows; out there the
    // rational approximation is already at the limit of double precision.
    const double pdf = std_normal_pdf(x);
    if (pdf > 1e-290) {
        x -= (std_normal_cdf(x) - p) / pdf;
    }
    return x;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> matvec(const Matrix &m, const std::vector<double> &v) {
    if (m.cols() != v.size()) throw DomainError("matvec: dimension mismatch");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

SpdMatrix SpdMatrix::from_matrix(const Matrix &m, double sym_rtol) {
    if (!m.square()) throw DomainError("SpdMatrix: matrix must be square");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(m(i, j)));
    const double tol = sym_rtol * std::max(scale, 1.0);
    SpdMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (std::fabs(m(i, j) - m(j, i)) > tol) {
                throw DomainError("SpdMatrix: matrix is not symmetric");
            }
            out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
        }
    }
    return out;
}

void SpdMatrix::set(std::size_t i, std::size_t j, double value) {
    m_(i, j) = value;
    m_(j, i) = value;
    have_chol_ = false;
}

const Matrix &SpdMatrix::cholesky() const {
    if (!have_chol_) {
        chol_ = cholesky_lower(m_);
        have_chol_ = true;
    }
    return chol_;
}

bool SpdMatrix::is_positive_definite() const {
    try {
        cholesky();
        return true;
    } catch (const NotPositiveDefinite &) {
        return false;
    }
}

Matrix cholesky_lower(const Matrix &a, double pivot_rtol) {
    if (!a.square()) throw DomainError("cholesky_lower: matrix must be square");
    const std::size_t n = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    if (!(max_diag > 0.0)) {
        throw NotPositiveDefinite("cholesky_lower: no positive diagonal entry");
    }
    const double tol = pivot_rtol * max_diag;
    Matrix lower(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > tol)) {
            throw NotPositiveDefinite("cholesky_lower: pivot " + std::to_string(j) +
                                      " is not positive");
        }
        const double ljj = std::sqrt(d);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / ljj;
        }
    }
    return lower;
}

void forward_substitute(const Matrix &lower, std::vector<double> &b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw DomainError("forward_substitute: dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * b[k];
        b[i] = s / lower(i, i);
    }
}

void back_substitute_transpose(const Matrix &lower, std::vector<double> &b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw DomainError("back_substitute_transpose: dimension mismatch");
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * b[k];
        b[ii] = s / lower(ii, ii);
    }
}

double log_det_from_cholesky(const Matrix &lower) {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
    return 2.0 * s;
}

double mvn_logpdf(const std::vector<double> &x, const std::vector<double> &mean,
                  const Matrix &chol_lower) {
    const std::size_t k = chol_lower.rows();
    if (x.size() != k || mean.size() != k) {
        throw DomainError("mvn_logpdf: dimension mismatch");
    }
    std::vector<double> z(k);
    for (std::size_t i = 0; i < k; ++i) z[i] = x[i] - mean[i];
    forward_substitute(chol_lower, z);
    double quad = 0.0;
    for (double v : z) quad += v * v;
    return -0.5 * (static_cast<double>(k) * kLogTwoPi + log_det_from_cholesky(chol_lower) + quad);
}

double mvn_logpdf(const std::vector<double> &x, const std::vector<double> &mean,
                  const SpdMatrix &cov) {
    return mvn_logpdf(x, mean, cov.cholesky());
}

OptimResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                        std::vector<double> start, const OptimOptions &options) {
    const std::size_t n = start.size();
    if (n == 0) throw DomainError("nelder_mead: empty start point");

    OptimResult result;
    auto evaluate = [&](const std::vector<double> &x) {
        ++result.evaluations;
        return f(x);
    };

    // Simplex of n+1 points, kept sorted by value (index 0 is best).
    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
    for (std::size_t i = 0; i <= n; ++i) value[i] = evaluate(simplex[i]);
    if (!std::isfinite(value[0])) {
        throw DomainError("nelder_mead: objective is not finite at the start point");
    }

    auto sort_simplex = [&]() {
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> v2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            s2[i] = simplex[order[i]];
            v2[i] = value[order[i]];
        }
        simplex.swap(s2);
        value.swap(v2);
    };
    sort_simplex();

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (; result.iterations < options.max_iterations; ++result.iterations) {
        const double f_spread = value[n] - value[0];
        double x_spread = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                x_spread = std::max(x_spread, std::fabs(simplex[i][j] - simplex[0][j]));
        const double f_tol = options.f_tolerance_abs +
                             options.f_tolerance_rel * std::fabs(value[0]);
        if (f_spread <= f_tol && x_spread <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        // Centroid of all points but the worst.
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += simplex[i][j];
            centroid[j] = s / static_cast<double>(n);
        }

        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[n][j]);
        const double fr = evaluate(xr);

        if (fr < value[0]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[n][j]);
            const double fe = evaluate(xe);
            if (fe < fr) {
                simplex[n] = xe;
                value[n] = fe;
            } else {
                simplex[n] = xr;
                value[n] = fr;
            }
        } else if (fr < value[n - 1]) {
            simplex[n] = xr;
            value[n] = fr;
        } else {
            // Contract toward the better of the worst point and its reflection.
            const bool outside = fr < value[n];
            const std::vector<double> &toward = outside ? xr : simplex[n];
            for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (toward[j] - centroid[j]);
            const double fc = evaluate(xc);
            if (fc < std::min(fr, value[n])) {
                simplex[n] = xc;
                value[n] = fc;
            } else {
                // Shrink toward the best point.
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    value[i] = evaluate(simplex[i]);
                }
            }
        }
        sort_simplex();
    }

    result.x = simplex[0];
    result.value = value[0];
    return result;
}

namespace {

std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto &word : s_) word = splitmix64(sm);
    // xoshiro must not start from the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0,1] x [0,1): the 1-u flip keeps log away from zero.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

double RngStream::exponential() {
    return -std::log(1.0 - uniform01());
}

RngStream RngStream::child(std::uint64_t index) const {
    // Distinct child seeds come from a second splitmix pass over the parent
    // seed and the index; good enough separation for disjoint substreams.
    std::uint64_t sm = seed_ ^ 0x5851f42d4c957f2dULL;
    const std::uint64_t base = splitmix64(sm);
    std::uint64_t sm2 = base + (index + 1) * 0x9e3779b97f4a7c15ULL;
    return RngStream(splitmix64(sm2));
}

} // namespace hrpot
