#include "hrpot/hr_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace hrpot {

namespace {

// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b) {
    const double hi = std::max(a, b);
    if (!std::isfinite(hi)) return hi;
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_lambda_sq(double lambda_sq, const char *where) {
    if (!(lambda_sq >= 0.0)) {
        throw DomainError(std::string(where) + ": dependence parameter must be nonnegative");
    }
}

} // namespace

ParameterMatrix::ParameterMatrix(std::size_t size) : m_(size, size, 0.0) {
    if (size < 2) throw DomainError("ParameterMatrix: need at least two components");
}

ParameterMatrix ParameterMatrix::from_matrix(const Matrix &m, double sym_rtol) {
    if (!m.square()) throw DomainError("ParameterMatrix: matrix must be square");
    ParameterMatrix out(m.rows());
    double scale = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) scale = std::max(scale, std::fabs(m(i, j)));
    const double tol = sym_rtol * std::max(scale, 1.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (std::fabs(m(i, i)) > 0.0) {
            throw DomainError("ParameterMatrix: diagonal must be zero");
        }
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            if (std::fabs(m(i, j) - m(j, i)) > tol) {
                throw DomainError("ParameterMatrix: matrix is not symmetric");
            }
            out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
        }
    }
    return out;
}

void ParameterMatrix::set(std::size_t i, std::size_t j, double lambda_sq) {
    if (i == j) throw DomainError("ParameterMatrix: diagonal entries are fixed at zero");
    check_lambda_sq(lambda_sq, "ParameterMatrix");
    m_(i, j) = lambda_sq;
    m_(j, i) = lambda_sq;
}

ParameterMatrix ParameterMatrix::restrict(const std::vector<std::size_t> &keep) const {
    if (keep.size() < 2) throw DomainError("ParameterMatrix::restrict: need at least two components");
    ParameterMatrix out(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= size()) throw DomainError("ParameterMatrix::restrict: index out of range");
        for (std::size_t j = i + 1; j < keep.size(); ++j) {
            out.set(i, j, m_(keep[i], keep[j]));
        }
    }
    return out;
}

bool ParameterMatrix::is_valid() const {
    return psi_full(*this).is_positive_definite();
}

void ParameterMatrix::require_valid() const {
    if (!is_valid()) {
        throw NotPositiveDefinite("ParameterMatrix: transformed covariance is not positive definite");
    }
}

SpdMatrix psi_submatrix(const ParameterMatrix &lambda, const std::vector<std::size_t> &m) {
    if (m.size() < 2) throw DomainError("psi_submatrix: index vector needs at least two entries");
    std::set<std::size_t> seen(m.begin(), m.end());
    if (seen.size() != m.size()) throw DomainError("psi_submatrix: indices must be distinct");
    if (*seen.rbegin() >= lambda.size()) throw DomainError("psi_submatrix: index out of range");

    const std::size_t l = m.size() - 1;
    SpdMatrix psi(l);
    for (std::size_t i = 1; i <= l; ++i) {
        for (std::size_t j = i; j <= l; ++j) {
            psi.set(i - 1, j - 1,
                    2.0 * (lambda(m[i], m[0]) + lambda(m[j], m[0]) - lambda(m[i], m[j])));
        }
    }
    return psi;
}

SpdMatrix psi_full(const ParameterMatrix &lambda) {
    std::vector<std::size_t> all(lambda.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return psi_submatrix(lambda, all);
}

ParameterMatrix lambda_of_sigma(const SpdMatrix &sigma) {
    const std::size_t k = sigma.dim();
    ParameterMatrix lambda(k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        lambda.set(0, i + 1, 0.25 * sigma(i, i));
        for (std::size_t j = i + 1; j < k; ++j) {
            lambda.set(i + 1, j + 1, 0.25 * (sigma(i, i) + sigma(j, j) - 2.0 * sigma(i, j)));
        }
    }
    return lambda;
}

double hr_cdf_bivariate(double x, double y, double lambda_sq) {
    check_lambda_sq(lambda_sq, "hr_cdf_bivariate");
    if (lambda_sq == 0.0) {
        return std::exp(-std::exp(-std::min(x, y)));
    }
    if (lambda_sq >= kIndependentLambdaSq) {
        return std::exp(-std::exp(-x) - std::exp(-y));
    }
    const double lam = std::sqrt(lambda_sq);
    const double a = lam + (y - x) / (2.0 * lam);
    const double b = lam + (x - y) / (2.0 * lam);
    const double v = std::exp(-x) * std_normal_cdf(a) + std::exp(-y) * std_normal_cdf(b);
    return std::exp(-v);
}

double hr_logdensity_bivariate(double x, double y, double lambda_sq) {
    check_lambda_sq(lambda_sq, "hr_logdensity_bivariate");
    if (lambda_sq == 0.0) {
        throw DomainError("hr_logdensity_bivariate: no density at complete dependence");
    }
    if (lambda_sq >= kIndependentLambdaSq) {
        return -x - y - std::exp(-x) - std::exp(-y);
    }
    const double lam = std::sqrt(lambda_sq);
    const double a = lam + (y - x) / (2.0 * lam);
    const double b = lam + (x - y) / (2.0 * lam);
    const double v = std::exp(-x) * std_normal_cdf(a) + std::exp(-y) * std_normal_cdf(b);
    // Mixed second derivative of exp(-v): the two partials of v collapse to
    // -e^{-x} Phi(a) and -e^{-y} Phi(b) because e^{-x} phi(a) = e^{-y} phi(b).
    const double log_phi_a = -0.5 * a * a - 0.5 * kLogTwoPi;
    const double term_products = -x - y + std_normal_logcdf(a) + std_normal_logcdf(b);
    const double term_cross = -x + log_phi_a - std::log(2.0 * lam);
    return -v + log_sum_exp(term_products, term_cross);
}

double exponent_measure_logdensity(const std::vector<double> &x, const ParameterMatrix &lambda) {
    if (x.size() != lambda.size()) {
        throw DomainError("exponent_measure_logdensity: dimension mismatch");
    }
    const std::size_t k = lambda.size() - 1;
    std::vector<double> increments(k), mean(k);
    for (std::size_t i = 0; i < k; ++i) {
        increments[i] = x[i + 1] - x[0];
        mean[i] = -2.0 * lambda(i + 1, 0);
    }
    return -x[0] + mvn_logpdf(increments, mean, psi_full(lambda).cholesky());
}

double spectral_logdensity(const std::vector<double> &omega, const ParameterMatrix &lambda) {
    if (omega.size() != lambda.size()) {
        throw DomainError("spectral_logdensity: dimension mismatch");
    }
    double total = 0.0;
    for (double w : omega) {
        if (!(w > 0.0)) throw DomainError("spectral_logdensity: coordinates must be positive");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw DomainError("spectral_logdensity: coordinates must sum to one");
    }
    const std::size_t k = lambda.size() - 1;
    std::vector<double> z(k), mean(k);
    double log_prod = 2.0 * std::log(omega[0]);
    for (std::size_t i = 0; i < k; ++i) {
        z[i] = std::log(omega[i + 1] / omega[0]);
        mean[i] = -2.0 * lambda(i + 1, 0);
        log_prod += std::log(omega[i + 1]);
    }
    return -log_prod + mvn_logpdf(z, mean, psi_full(lambda).cholesky());
}

double extremal_coefficient(double lambda_sq) {
    check_lambda_sq(lambda_sq, "extremal_coefficient");
    if (std::isinf(lambda_sq)) return 2.0;
    return 2.0 * std_normal_cdf(std::sqrt(lambda_sq));
}

} // namespace hrpot
