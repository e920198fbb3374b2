#ifndef HRPOT_NUMERICS_HPP
#define HRPOT_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hrpot/errors.hpp"

// Self-contained numerical kernels: standard normal functions, dense
// symmetric linear algebra, a Nelder-Mead minimizer and a reproducible
// random number stream. Everything downstream builds on these, so the
// accuracy contracts here are deliberately tight and tested.

namespace hrpot {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLogTwoPi = 1.837877066409345483560659472811235279;

// Standard normal density.
double std_normal_pdf(double x) noexcept;

// Standard normal distribution function, absolute error below 1e-14.
double std_normal_cdf(double x) noexcept;

// log of std_normal_cdf, stable far into the lower tail (x < -37) where the
// plain CDF underflows.
double std_normal_logcdf(double x) noexcept;

// Quantile of the standard normal law: rational approximation polished by
// one Newton step on the CDF. Throws DomainError unless 0 < p < 1.
double std_normal_quantile(double p);

// Minimal dense row-major matrix. Only what the estimators need; no
// expression templates, no views.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, value) {}

    static Matrix identity(std::size_t n);

    double &operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

std::vector<double> matvec(const Matrix &m, const std::vector<double> &v);

// Symmetric positive definite matrix. Symmetry is validated on construction
// (relative tolerance on the largest entry); positive definiteness is
// established on the first call to cholesky(), which caches the factor.
// The lazy cache makes a const SpdMatrix not safe to share across threads
// before its first factorization.
class SpdMatrix {
  public:
    explicit SpdMatrix(std::size_t dim) : m_(dim, dim, 0.0) {}

    // Validates symmetry and copies the symmetrized entries.
    static SpdMatrix from_matrix(const Matrix &m, double sym_rtol = 1e-12);

    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    // Writes both (i,j) and (j,i); invalidates any cached factor.
    void set(std::size_t i, std::size_t j, double value);

    std::size_t dim() const { return m_.rows(); }
    const Matrix &full() const { return m_; }

    // Lower Cholesky factor. Throws NotPositiveDefinite when a pivot drops
    // below 1e-12 times the largest diagonal entry.
    const Matrix &cholesky() const;

    bool is_positive_definite() const;

  private:
    Matrix m_;
    mutable Matrix chol_;
    mutable bool have_chol_ = false;
};

// Lower Cholesky factor of a square symmetric matrix given as a plain
// Matrix. Pivot tolerance is relative to the largest diagonal entry.
Matrix cholesky_lower(const Matrix &a, double pivot_rtol = 1e-12);

// In-place solves against a lower-triangular factor.
void forward_substitute(const Matrix &lower, std::vector<double> &b);          // b := L^{-1} b
void back_substitute_transpose(const Matrix &lower, std::vector<double> &b);   // b := L^{-T} b

// log det(L L^T) = 2 * sum log L_ii.
double log_det_from_cholesky(const Matrix &lower);

// Log density of N(mean, L L^T) evaluated at x, with L the lower Cholesky
// factor of the covariance.
double mvn_logpdf(const std::vector<double> &x, const std::vector<double> &mean,
                  const Matrix &chol_lower);

// Convenience overload factorizing the covariance on every call.
double mvn_logpdf(const std::vector<double> &x, const std::vector<double> &mean,
                  const SpdMatrix &cov);

struct OptimOptions {
    std::size_t max_iterations = 5000;
    double f_tolerance_abs = 1e-11;  // spread of simplex values
    double f_tolerance_rel = 1e-13;
    double x_tolerance = 1e-8;       // max coordinate spread of the simplex
    double initial_step = 0.25;      // absolute per-coordinate perturbation
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;  // false means the iteration cap was hit
};

// Derivative-free Nelder-Mead minimization with the standard coefficients
// (reflection 1, expansion 2, contraction 0.5, shrink 0.5). Deterministic:
// the initial simplex perturbs each coordinate of start by initial_step.
// Convergence requires both the value spread and the coordinate spread of
// the simplex to fall below their tolerances. The objective must be finite
// at start; +infinity elsewhere is allowed and treated as a rejected move.
OptimResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                        std::vector<double> start, const OptimOptions &options = {});

// Reproducible pseudo-random stream: xoshiro256++ seeded through splitmix64.
// Identical seeds give identical draw sequences on every platform. child(i)
// derives an independently seeded stream, used to decouple parallel work
// from execution order. Gaussian variates come from the trigonometric
// Box-Muller transform (pairs, one cached); this choice is part of the
// reproducibility contract and must not change.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0,1) with 53 random bits.
    double uniform01();

    double gaussian();

    // Standard exponential, -log(1-U).
    double exponential();

    RngStream child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace hrpot

#endif
