#ifndef HRPOT_BLOCKMAX_HPP
#define HRPOT_BLOCKMAX_HPP

#include <cstddef>

#include "hrpot/estimators.hpp"
#include "hrpot/margins.hpp"

// Block-maxima baselines: componentwise maxima over fixed blocks, the
// madogram estimator of the extremal coefficient, and bivariate maximum
// likelihood on rank-standardized block maxima.

namespace hrpot {

// Componentwise maxima over consecutive blocks of block_size rows; the
// trailing partial block is dropped. Keeps the declared margin scale.
SampleMatrix block_maxima(const SampleMatrix &data, std::size_t block_size);

// Rank-based madogram on a pair of columns: with F the empirical
// distribution functions, nu = mean |F(x) - F(y)| / 2, the extremal
// coefficient estimate is (1 + 2 nu) / (1 - 2 nu), clamped to [1, 2], and
// the dependence parameter follows from inverting theta = 2 Phi(lambda).
// The clamp at 2 maps to an infinite lambda_sq (exact independence).
EstimateReport est_madogram(const SampleMatrix &maxima, std::size_t i, std::size_t j);

// Bivariate likelihood fit on a pair of columns of block maxima. Columns
// are standardized to the Gumbel scale through their ranks before the
// density is maximized, so any input scale is accepted.
EstimateReport est_hr_blockml(const SampleMatrix &maxima, std::size_t i, std::size_t j);

} // namespace hrpot

#endif
