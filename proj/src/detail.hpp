#ifndef HRPOT_SRC_DETAIL_HPP
#define HRPOT_SRC_DETAIL_HPP

#include <cstddef>
#include <vector>

#include "hrpot/margins.hpp"
#include "hrpot/numerics.hpp"

// Internal helpers shared between the estimator and fitter translation
// units. Not part of the installed API.

namespace hrpot::detail {

// Log ratios log(omega_j / omega_0) of the interior simplex points of a
// radial exceedance set; boundary points are skipped and counted.
std::vector<std::vector<double>> spectral_log_ratios(const ExceedanceSet &exc,
                                                     std::size_t &dropped);

// Negative log likelihood kernel (additive constants dropped) of the
// Gaussian with mean tied to the covariance diagonal, mean_j = -sigma_jj/2:
//   n/2 log det sigma + 1/2 sum_i (x_i + diag/2)' sigma^{-1} (x_i + diag/2).
// Both the increment likelihood and the angular likelihood reduce to this.
double tied_mean_gaussian_nll(const std::vector<std::vector<double>> &x, const SpdMatrix &sigma);

} // namespace hrpot::detail

#endif
