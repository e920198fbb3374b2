#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hrpot/margins.hpp"
#include "hrpot/variogram.hpp"

namespace hrpot {

// Number of worker threads a batch run may use: `requested` if positive,
// otherwise the HRPOT_THREADS environment variable, otherwise the hardware
// concurrency. Always at least 1.
std::size_t resolve_worker_count(std::size_t requested);

// Shared knobs of the bivariate estimator comparison. Defaults are sized for
// a desk run; the full-scale experiment is reached by widening the grids and
// raising repetitions.
struct StudyConfig {
    std::vector<double> lambda_grid = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75};
    std::vector<std::size_t> n_grid = {500, 8000};

    // Threshold quantile per sample size. Every n in n_grid must have an
    // entry; the defaults pin the three canonical sizes.
    std::map<std::size_t, double> q_per_n = {{500, 0.96}, {8000, 0.975}, {100000, 0.99}};

    std::size_t block_size = 150;
    std::size_t repetitions = 50;
    std::vector<std::string> estimators = {"mle1", "mle2", "var",
                                           "mean", "spec", "mado", "block-ml"};
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0: resolve_worker_count decides

    double q_for(std::size_t n) const;
    void validate() const;
};

// One estimate on one simulated dataset. Failed estimates carry NaN values
// and the error message in note.
struct BivariateStudyRow {
    double lambda_sq_true = 0.0;
    std::size_t n = 0;
    double q = 0.0;
    std::string estimator;
    std::size_t repetition = 0;
    double lambda_sq_hat = 0.0;
    double theta_hat = 0.0;
    std::size_t exceedances = 0;
    std::string note;
};

// Aggregate over the repetitions of one (lambda_sq, n, estimator) cell:
// mean and empirical 2.5%/97.5% quantiles of theta_hat across the
// successful repetitions.
struct BivariateStudyCell {
    double lambda_sq_true = 0.0;
    std::size_t n = 0;
    double q = 0.0;
    std::string estimator;
    double theta_true = 0.0;
    double theta_mean = 0.0;
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    std::size_t failures = 0;
    std::string note;  // first failure reason, empty when all succeeded
};

struct BivariateStudyResult {
    std::vector<BivariateStudyRow> rows;
    std::vector<BivariateStudyCell> cells;
};

// Simulates bivariate samples over the (lambda_grid x n_grid) cells and runs
// every configured estimator on each repetition. Bit-identical results for
// identical configs, independent of the worker count.
BivariateStudyResult run_bivariate_study(const StudyConfig &cfg);

// Parametric recovery experiment: simulate a max-stable process on fixed
// locations, then refit the variogram family with the three parametric
// methods on every repetition.
struct ParametricStudyConfig {
    LocationSet locs;          // default (empty): 10 sites evenly on [0, 3]
    VariogramSpec truth;       // gamma(h) = |h|
    bool anisotropic = false;  // fit the 4-parameter family instead of (alpha, s)
    std::size_t n = 8000;
    double q = 0.975;
    std::size_t repetitions = 50;
    std::vector<std::string> methods = {"spec-ml", "spec-cl", "proj-ls"};
    std::uint64_t seed = 0;
    std::size_t workers = 0;

    // Distances at which the summary extremal coefficient curves are
    // evaluated (isotropic fits only). Default: 0 to 3 in steps of 0.05.
    std::vector<double> curve_distances;

    void validate() const;
    LocationSet resolved_locs() const;
    std::vector<double> resolved_curve() const;
};

struct ParametricStudyRow {
    std::string method;
    std::size_t repetition = 0;
    double alpha_hat = 0.0;
    double s_hat = 0.0;
    double beta_hat = 0.0;  // NaN for isotropic fits
    double c_hat = 0.0;     // NaN for isotropic fits
    std::string note;
};

// Mean and empirical 5%/95% quantiles of the fitted parameters per method.
struct ParametricStudySummary {
    std::string method;
    double alpha_mean = 0.0, alpha_lo = 0.0, alpha_hi = 0.0;
    double s_mean = 0.0, s_lo = 0.0, s_hi = 0.0;
    std::size_t failures = 0;
    std::string note;
};

// Extremal coefficient curve point derived from a parameter summary; which
// is one of "mean", "lo", "hi".
struct EcfCurvePoint {
    std::string method;
    std::string which;
    double distance = 0.0;
    double theta = 0.0;
};

struct ParametricStudyResult {
    std::vector<ParametricStudyRow> rows;
    std::vector<ParametricStudySummary> summaries;
    std::vector<EcfCurvePoint> curve;  // empty for anisotropic fits
};

ParametricStudyResult run_parametric_study(const ParametricStudyConfig &cfg);

// Fit the variogram family to observed data, then repeatedly simulate from
// each fitted model and refit to measure the sampling spread of the
// parameters (the standard-deviation table of a case study).
struct ResimulateConfig {
    std::vector<std::string> methods = {"spec-ml", "spec-cl", "proj-ls"};
    bool anisotropic = false;
    double q = 0.975;
    std::size_t repetitions = 100;  // 0: fit only, no refits
    std::uint64_t seed = 0;
    std::size_t workers = 0;

    void validate() const;
};

struct ResimulateRow {
    std::string method;
    std::size_t repetition = 0;
    double alpha_hat = 0.0;
    double s_hat = 0.0;
    double beta_hat = 0.0;
    double c_hat = 0.0;
    std::string note;
};

struct ResimulateSummary {
    std::string method;
    bool fitted = false;        // the fit to the observed data succeeded
    VariogramSpec model;        // that fit, when fitted
    double sd_alpha = 0.0;
    double sd_s = 0.0;
    double sd_beta = 0.0;       // circular, beta lives modulo pi
    double sd_c = 0.0;
    std::size_t failures = 0;
    std::string note;
};

struct ResimulateResult {
    std::vector<ResimulateRow> rows;
    std::vector<ResimulateSummary> summaries;
};

// data may be on any margin scale; raw data is rank-standardized, known
// scales are transformed exactly.
ResimulateResult run_fit_and_resimulate(const SampleMatrix &data, const LocationSet &locs,
                                        const ResimulateConfig &cfg);

}  // namespace hrpot
