#ifndef HRPOT_ESTIMATORS_HPP
#define HRPOT_ESTIMATORS_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include "hrpot/hr_model.hpp"
#include "hrpot/margins.hpp"
#include "hrpot/variogram.hpp"

// Dependence estimators driven by threshold exceedances. The increment
// family works on pivot or union exceedance sets (differences of Gumbel or
// exponential margins), the spectral family on radial exceedance sets
// (points on the unit simplex), and the parametric fitters search a
// variogram family. Every estimator returns an EstimateReport.

namespace hrpot {

struct EstimateReport {
    std::string estimator;
    std::size_t count = 0;  // exceedances actually used
    double q = 0.0;         // threshold level of the input set

    // Scalar estimate for the bivariate estimators; matrix estimate for the
    // multivariate ones. The scalar is mirrored into lambda for size-2 sets
    // and into theta (the extremal coefficient) whenever it is finite.
    double lambda_sq = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    std::optional<ParameterMatrix> lambda;
    std::optional<VariogramSpec> variogram;

    bool clamped = false;       // negative raw moment pulled back to zero
    std::size_t dropped = 0;    // simplex points discarded at the boundary

    // Filled by the numeric estimators; closed forms leave these at rest.
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = true;
    double objective = std::numeric_limits<double>::quiet_NaN();
};

// Closed form from pivot increments s: lambda_sq = (-1 + sqrt(1 + mean s^2)) / 2,
// the exact minimizer of the censored-pair negative log likelihood
//   N lambda^2 / 2 + N log lambda + sum s^2 / (8 lambda^2).
EstimateReport est_biv_mle1(const ExceedanceSet &exc);

// Numeric minimizer over theta > 0 of
//   2 Phi(sqrt(theta)) u + N theta / 2 + sum s^2 / (8 theta)
// on union-region increments. u rescales the no-point mass term; it
// defaults to the realized single-margin exceedance count. Larger u pulls
// the estimate down (the mass term grows with theta).
EstimateReport est_biv_mle2(const ExceedanceSet &exc, std::optional<double> u = std::nullopt);

// One quarter of the (1/N) sample variance of pivot increments.
EstimateReport est_biv_var(const ExceedanceSet &exc);

// Minus half the mean pivot increment, clamped at zero from below.
EstimateReport est_biv_mean(const ExceedanceSet &exc);

// Moment estimator for k+1 components: sample covariance of the pivot
// increments is the transformed covariance, mapped back to the parameter
// matrix. The result is valid whenever the covariance is nonsingular.
EstimateReport est_mv_var(const ExceedanceSet &exc);

// Gaussian likelihood fit of the pivot increments with the mean tied to
// the covariance diagonal (mean_j = -sigma_jj / 2). Optimizes the Cholesky
// factor with log diagonal, so every iterate stays a valid model.
EstimateReport est_mv_mle(const ExceedanceSet &exc, const ParameterMatrix &start);

// Closed form on radial exceedances of a pair: same shape as est_biv_mle1
// with log(omega_1 / omega_0) in place of the increments.
EstimateReport est_spec_biv(const ExceedanceSet &exc);

// Angular-density likelihood fit on radial exceedances, components >= 2.
// The log ratios log(omega_j / omega_0) play the role of the increments
// and share the tied-mean Gaussian core with est_mv_mle.
EstimateReport est_spec_mv(const ExceedanceSet &exc, const ParameterMatrix &start);

// Simplex coordinates below this are treated as boundary artifacts of the
// rank transform; such points are dropped and counted in the report.
inline constexpr double kSpectralBoundaryTol = 1e-12;

// Residual norm for the projection fitter.
enum class ResidualNorm { frobenius, max_abs };

// Least-squares fit of a variogram family to a matrix of pairwise
// dependence estimates: minimizes the norm of the residual matrix
// (pairwise_ij - gamma(t_i - t_j)/4). The reported objective is the
// residual at the optimum.
EstimateReport fit_projection_ls(const Matrix &pairwise, const LocationSet &locs,
                                 const VariogramSpec &start,
                                 ResidualNorm norm = ResidualNorm::frobenius);

// Angular-likelihood fit of a variogram family on radial exceedances over
// the full location set (components must match locs).
EstimateReport fit_spectral_ml(const ExceedanceSet &exc, const LocationSet &locs,
                               const VariogramSpec &start);

// Radial exceedances of one pair of locations, used by the composite fit.
struct PairExceedances {
    std::size_t a = 0;
    std::size_t b = 1;
    ExceedanceSet exc;
};

// Composite-likelihood fit: sum of bivariate angular log likelihoods over
// all location pairs, each pair with its own radial exceedance set. Every
// unordered pair must appear exactly once.
EstimateReport fit_spectral_cl(const std::vector<PairExceedances> &pairs,
                               const LocationSet &locs, const VariogramSpec &start);

} // namespace hrpot

#endif
