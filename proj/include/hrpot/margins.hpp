#ifndef HRPOT_MARGINS_HPP
#define HRPOT_MARGINS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "hrpot/errors.hpp"

// Marginal standardization and threshold selection. Estimators downstream
// consume ExceedanceSet objects produced here and never look at raw data,
// which keeps the margin conventions in one place.

namespace hrpot {

enum class MarginScale { raw, gumbel, exponential, frechet };

// n x (k+1) data matrix, rows are observations, with a declared margin
// scale. The scale is a promise made by the producer, not something the
// container verifies.
class SampleMatrix {
  public:
    SampleMatrix() = default;
    SampleMatrix(std::size_t n, std::size_t components, MarginScale scale)
        : n_(n), c_(components), scale_(scale), a_(n * components, 0.0) {}

    double &at(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    std::size_t n() const { return n_; }
    std::size_t components() const { return c_; }
    MarginScale scale() const { return scale_; }
    void set_scale(MarginScale s) { scale_ = s; }

    std::vector<double> column(std::size_t j) const;

  private:
    std::size_t n_ = 0;
    std::size_t c_ = 0;
    MarginScale scale_ = MarginScale::raw;
    std::vector<double> a_;
};

// Copy of selected components, in the given order.
SampleMatrix select_components(const SampleMatrix &data, const std::vector<std::size_t> &keep);

// Threshold choice: a marginal (or radial) quantile level, or alternatively
// a target exceedance count that is translated to a level per dataset.
// Selections yielding fewer than min_count points throw TooFewExceedances.
struct ThresholdSpec {
    double q = 0.95;
    std::optional<std::size_t> count;
    std::size_t min_count = 10;

    // The level actually used for a sample of size n.
    double resolve(std::size_t n) const;
};

enum class ExtremalRegion { component_pivot, union_pair, sum_radius };

// Output of a threshold selection. Which payload fields are filled depends
// on the region: pivot and union regions carry increment vectors, the sum
// region carries radii and points on the unit simplex.
struct ExceedanceSet {
    ExtremalRegion region = ExtremalRegion::component_pivot;
    std::size_t pivot = 0;
    std::size_t components = 0;       // k+1 of the source data
    std::size_t sample_size = 0;      // n of the source data
    double q = 0.0;                   // resolved quantile level
    double threshold = 0.0;           // threshold on the data scale
    std::size_t marginal_count = 0;   // union region: exceedances of one margin

    std::vector<std::size_t> indices;
    std::vector<std::vector<double>> increments;  // x_j - x_pivot, j != pivot
    std::vector<double> radii;
    std::vector<std::vector<double>> angles;

    std::size_t size() const { return indices.size(); }
};

// Average ranks (1-based), ties averaged. Throws DegenerateColumn when all
// values coincide.
std::vector<double> average_ranks(const std::vector<double> &values);

// Rank transform of every column to the target scale using r/(n+1):
// exponential is -log(1 - r/(n+1)), frechet is the exponential of that.
// Works from any declared input scale since ranks only use order.
SampleMatrix empirical_standardize(const SampleMatrix &data, MarginScale target);

// Exact probability-integral transforms between known scales. Supports
// gumbel -> exponential/frechet, exponential <-> frechet, and the identity.
// Raw data has no known distribution; use empirical_standardize instead.
SampleMatrix convert_margins(const SampleMatrix &data, MarginScale target);

// Empirical quantile as the order statistic of rank ceil(q*n).
double empirical_quantile(std::vector<double> values, double q);

// Observations whose pivot component exceeds its marginal level, with
// increments relative to the pivot. Input must be on the exponential scale.
ExceedanceSet select_exceedances_component(const SampleMatrix &data, std::size_t pivot,
                                           const ThresholdSpec &spec);

// Observations where either of two components exceeds its own marginal
// level; increments are component 1 minus component 0. Exponential scale,
// exactly two components.
ExceedanceSet select_exceedances_union(const SampleMatrix &data, const ThresholdSpec &spec);

// Observations whose coordinate sum exceeds the radial level, decomposed
// into radius and simplex point. Frechet scale.
ExceedanceSet select_exceedances_sum(const SampleMatrix &data, const ThresholdSpec &spec);

} // namespace hrpot

#endif
