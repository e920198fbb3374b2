#ifndef HRPOT_VARIOGRAM_HPP
#define HRPOT_VARIOGRAM_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "hrpot/hr_model.hpp"

// Fractal variogram family gamma(h) = ||h/s||^alpha with an optional planar
// anisotropy transform, location sets, and the map from a variogram to the
// dependence-parameter matrix of the induced max-stable law.

namespace hrpot {

// gamma(h) = ||V h / s||^alpha where V is the identity (isotropic) or the
// rotation-dilation
//   V(beta, c) = ( cos beta  -sin beta )
//                ( c sin beta  c cos beta ).
// The anisotropic family is overparametrized: (alpha, s, beta, c) and
// (alpha, s/c, beta + pi/2, 1/c) give the same variogram, and beta enters
// modulo pi. normalize_anisotropy picks the representative with c >= 1 and
// beta in [0, pi).
struct VariogramSpec {
    double alpha = 1.0;  // in (0, 2]
    double s = 1.0;      // scale, > 0
    double beta = 0.0;   // rotation angle
    double c = 1.0;      // dilation, > 0
    bool anisotropic = false;

    void validate() const;  // throws DomainError
};

VariogramSpec normalize_anisotropy(VariogramSpec spec);

// Distinct points in 1 or 2 dimensions. Labels are optional; when present
// there is one per point.
struct LocationSet {
    std::vector<std::vector<double>> points;
    std::vector<std::string> labels;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

    // One-dimensional set from plain coordinates.
    static LocationSet line(const std::vector<double> &xs);

    void validate() const;  // throws DomainError on duplicates or mixed dims
};

// gamma at a displacement vector (an anisotropic VariogramSpec needs d = 2).
double variogram_eval(const VariogramSpec &spec, const std::vector<double> &h);

// Dependence matrix of the induced law on the location set:
// entry (i,j) = gamma(t_i - t_j) / 4. Always a valid model for this family
// on distinct points; near-duplicate points surface as NotPositiveDefinite.
ParameterMatrix lambda_of_variogram(const VariogramSpec &spec, const LocationSet &locs);

// Pairwise extremal coefficient curve value at displacement h:
// 2 Phi(sqrt(gamma(h)) / 2), between 1 (h = 0) and 2 (far apart).
double ecf_of_variogram(const VariogramSpec &spec, const std::vector<double> &h);

// Default optimizer start: alpha = 1, s = median pairwise distance,
// beta = 0, c = 1.
VariogramSpec variogram_fit_start(const LocationSet &locs, bool anisotropic);

} // namespace hrpot

#endif
