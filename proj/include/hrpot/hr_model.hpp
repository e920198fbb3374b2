#ifndef HRPOT_HR_MODEL_HPP
#define HRPOT_HR_MODEL_HPP

#include <cstddef>
#include <vector>

#include "hrpot/numerics.hpp"

// Core model layer: the symmetric dependence-parameter matrix, its
// transformation to covariance form and back, bivariate distribution and
// density functions on the Gumbel scale, the exponent-measure density and
// the angular (spectral) density, plus the pairwise extremal coefficient.

namespace hrpot {

// Above this value a bivariate dependence parameter is treated as the exact
// independence limit; zero is the complete-dependence limit.
inline constexpr double kIndependentLambdaSq = 1e8;

// Symmetric (k+1) x (k+1) matrix of pairwise dependence parameters with a
// zero diagonal and nonnegative entries. Entry (i,j) is the squared
// parameter for the pair of components (i,j). Not every such matrix is a
// valid model; validity (strict conditional negative definiteness) is
// equivalent to positive definiteness of the transformed matrix and is
// checked through psi_submatrix on the full index set.
class ParameterMatrix {
  public:
    // size = k+1, the number of components; at least 2.
    explicit ParameterMatrix(std::size_t size);

    // Validates symmetry, zero diagonal and nonnegative entries.
    static ParameterMatrix from_matrix(const Matrix &m, double sym_rtol = 1e-12);

    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    // Writes both triangles. The diagonal cannot be set.
    void set(std::size_t i, std::size_t j, double lambda_sq);

    std::size_t size() const { return m_.rows(); }
    const Matrix &full() const { return m_; }

    // Sub-model on a subset of components, in the order given.
    ParameterMatrix restrict(const std::vector<std::size_t> &keep) const;

    bool is_valid() const;
    void require_valid() const;  // throws NotPositiveDefinite

  private:
    Matrix m_;
};

// Transformed covariance for the sub-model picked out by the index vector
// m = (m_0, m_1, ..., m_l) of distinct components, with m_0 acting as the
// reference: entry (i,j) equals
//   2 * (lambda_sq(m_i, m_0) + lambda_sq(m_j, m_0) - lambda_sq(m_i, m_j)).
// The parameter matrix is a valid model exactly when this matrix is
// positive definite for the full index set (0, ..., k).
SpdMatrix psi_submatrix(const ParameterMatrix &lambda, const std::vector<std::size_t> &m);

// Convenience: psi_submatrix on (0, 1, ..., k).
SpdMatrix psi_full(const ParameterMatrix &lambda);

// Inverse of psi_full: recovers the parameter matrix whose transformed
// covariance (with component 0 as reference) equals sigma. Round trip with
// psi_full is the identity.
ParameterMatrix lambda_of_sigma(const SpdMatrix &sigma);

// Bivariate distribution function on the Gumbel scale. lambda_sq = 0 and
// lambda_sq >= kIndependentLambdaSq give the complete-dependence and
// independence limits.
double hr_cdf_bivariate(double x, double y, double lambda_sq);

// Log of the bivariate density on the Gumbel scale (the mixed second
// derivative of hr_cdf_bivariate). Requires 0 < lambda_sq; values at or
// above kIndependentLambdaSq use the independent Gumbel limit.
double hr_logdensity_bivariate(double x, double y, double lambda_sq);

// Log density of the exponent measure at a point x of length k+1, with
// component 0 as reference:
//   -x_0 + log phi(x_i - x_0; mean = -2 lambda_sq(i,0), cov = psi_full).
// Homogeneity: adding a constant c to every coordinate subtracts c.
double exponent_measure_logdensity(const std::vector<double> &x, const ParameterMatrix &lambda);

// Log angular density on the open unit simplex {omega_i > 0, sum = 1}
// (coordinates indexed 0..k, sum checked to 1e-9). Each moment
// integral of omega_i against this density over the simplex equals 1.
double spectral_logdensity(const std::vector<double> &omega, const ParameterMatrix &lambda);

// Pairwise extremal coefficient 2 Phi(lambda) in [1, 2]: 1 at complete
// dependence, 2 at independence.
double extremal_coefficient(double lambda_sq);

} // namespace hrpot

#endif
