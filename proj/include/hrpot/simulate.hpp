#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hrpot/margins.hpp"
#include "hrpot/numerics.hpp"
#include "hrpot/variogram.hpp"

namespace hrpot {

// One draw from N(mean, cov). The factorization is cached inside cov, so
// passing the same object repeatedly costs one triangular multiply per call.
std::vector<double> mvn_sample(const std::vector<double> &mean, const SpdMatrix &cov,
                               RngStream &rng);

// Gaussian representation of the process pinned to zero at one site.
// sigma_sq[i] = gamma(t_i - t_anchor) is the variance of the pinned process at
// site i (zero at the anchor itself); cov holds its covariance at the
// non-anchor sites, kept in original site order with the anchor skipped.
struct GaussianRepresentation {
    std::size_t anchor = 0;
    std::vector<double> sigma_sq;
    SpdMatrix cov{0};
};

GaussianRepresentation covariance_from_variogram(const VariogramSpec &spec,
                                                 const LocationSet &locs, std::size_t anchor);

struct BrSampleConfig {
    LocationSet locs;
    VariogramSpec spec;
    std::size_t n = 1;
    std::uint64_t seed = 0;

    // The point series for a draw stops once no further point can raise the
    // running maximum by more than a Phi(-accuracy) tail; larger values trade
    // run time for accuracy. Draws that hit point_cap first are truncated and
    // counted in capped_draws.
    double accuracy = 6.0;
    std::size_t point_cap = 100000;

    // Pin the spectral representation to this site. The sampled law does not
    // depend on the choice; by default the sampler picks the anchor point that
    // minimizes the largest gamma(t_i - a), which minimizes the points needed
    // per draw.
    std::optional<std::size_t> anchor;
};

struct BrSample {
    SampleMatrix data;              // standard Gumbel margins
    std::size_t capped_draws = 0;
};

// Max-stable process sample at the given locations, one row per draw. Each
// row is generated from its own child stream of seed, so row d is identical
// across runs regardless of n.
BrSample br_sample(const BrSampleConfig &config);

// Exact bivariate sample with the given dependence. lambda_sq = 0 yields two
// identical columns; values at or above kIndependentLambdaSq yield independent
// columns.
BrSample hr_sample_bivariate(double lambda_sq, std::size_t n, std::uint64_t seed,
                             double accuracy = 6.0);

}  // namespace hrpot
