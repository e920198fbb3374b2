#include "hrpot/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "detail.hpp"
#include "hrpot/errors.hpp"

namespace hrpot {

namespace detail {

std::vector<std::vector<double>> spectral_log_ratios(const ExceedanceSet &exc,
                                                     std::size_t &dropped) {
    std::vector<std::vector<double>> out;
    out.reserve(exc.size());
    dropped = 0;
    for (const auto &w : exc.angles) {
        bool interior = true;
        for (double v : w)
            if (v < kSpectralBoundaryTol) {
                interior = false;
                break;
            }
        if (!interior) {
            ++dropped;
            continue;
        }
        std::vector<double> row(exc.components - 1);
        for (std::size_t j = 1; j < exc.components; ++j) row[j - 1] = std::log(w[j] / w[0]);
        out.push_back(std::move(row));
    }
    return out;
}

double tied_mean_gaussian_nll(const std::vector<std::vector<double>> &x, const SpdMatrix &sigma) {
    const Matrix &lower = sigma.cholesky();
    const std::size_t k = sigma.dim();
    double quad = 0.0;
    std::vector<double> y(k);
    for (const auto &row : x) {
        for (std::size_t j = 0; j < k; ++j) y[j] = row[j] + 0.5 * sigma(j, j);
        forward_substitute(lower, y);
        for (double v : y) quad += v * v;
    }
    return 0.5 * static_cast<double>(x.size()) * log_det_from_cholesky(lower) + 0.5 * quad;
}

} // namespace detail

namespace {

void require_region(const ExceedanceSet &exc, ExtremalRegion region, const char *who) {
    if (exc.region != region) throw DomainError(std::string(who) + ": wrong exceedance region");
}

void require_pair(const ExceedanceSet &exc, const char *who) {
    if (exc.components != 2) throw DomainError(std::string(who) + ": needs exactly 2 components");
}

double mean_of(const std::vector<double> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// (-1 + sqrt(1 + m)) / 2 written without cancellation for small m.
double lambda_sq_of_mean_square(double m) { return 0.5 * m / (1.0 + std::sqrt(1.0 + m)); }

std::vector<double> pair_increments(const ExceedanceSet &exc) {
    std::vector<double> s;
    s.reserve(exc.size());
    for (const auto &row : exc.increments) s.push_back(row[0]);
    return s;
}

EstimateReport base_report(const char *id, const ExceedanceSet &exc) {
    EstimateReport r;
    r.estimator = id;
    r.count = exc.size();
    r.q = exc.q;
    return r;
}

void mirror_scalar(EstimateReport &r) {
    r.theta = extremal_coefficient(r.lambda_sq);
    if (std::isfinite(r.lambda_sq)) {
        ParameterMatrix lam(2);
        lam.set(0, 1, r.lambda_sq);
        r.lambda = lam;
    }
}

// Components of the source data in the order the increment vectors use:
// the pivot first, then the others ascending.
std::vector<std::size_t> pivot_order(const ExceedanceSet &exc) {
    std::vector<std::size_t> order;
    order.reserve(exc.components);
    order.push_back(exc.pivot);
    for (std::size_t j = 0; j < exc.components; ++j)
        if (j != exc.pivot) order.push_back(j);
    return order;
}

// lambda_of_sigma indexes the reference component as 0; relabel back to the
// source component numbering.
ParameterMatrix relabel(const ParameterMatrix &lam, const std::vector<std::size_t> &order) {
    ParameterMatrix out(lam.size());
    for (std::size_t a = 0; a < lam.size(); ++a)
        for (std::size_t b = a + 1; b < lam.size(); ++b)
            out.set(order[a], order[b], lam(a, b));
    return out;
}

// Gaussian negative log likelihood with the mean tied to the covariance
// diagonal (mean_j = -sigma_jj / 2), minimized over the Cholesky factor of
// sigma with log diagonal. Additive constants are dropped.
struct TiedMeanFit {
    SpdMatrix sigma;
    OptimResult opt;
};

TiedMeanFit fit_tied_mean_gaussian(const std::vector<std::vector<double>> &x,
                                   const SpdMatrix &sigma_start) {
    const std::size_t k = sigma_start.dim();
    const std::size_t n = x.size();

    auto unpack = [k](const std::vector<double> &t) {
        Matrix lower(k, k, 0.0);
        std::size_t p = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j <= i; ++j, ++p)
                lower(i, j) = (i == j) ? std::exp(t[p]) : t[p];
        return lower;
    };

    auto objective = [&](const std::vector<double> &t) {
        const Matrix lower = unpack(t);
        double log_diag_sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) log_diag_sum += std::log(lower(i, i));

        std::vector<double> diag(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j <= i; ++j) diag[i] += lower(i, j) * lower(i, j);

        double quad = 0.0;
        std::vector<double> y(k);
        for (const auto &row : x) {
            for (std::size_t j = 0; j < k; ++j) y[j] = row[j] + 0.5 * diag[j];
            forward_substitute(lower, y);
            for (double z : y) quad += z * z;
        }
        return static_cast<double>(n) * log_diag_sum + 0.5 * quad;
    };

    const Matrix start_lower = sigma_start.cholesky();
    std::vector<double> t0;
    t0.reserve(k * (k + 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            t0.push_back(i == j ? std::log(start_lower(i, j)) : start_lower(i, j));

    OptimResult opt = nelder_mead(objective, std::move(t0));

    const Matrix lower = unpack(opt.x);
    Matrix sigma(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c <= std::min(i, j); ++c) s += lower(i, c) * lower(j, c);
            sigma(i, j) = s;
        }
    return {SpdMatrix::from_matrix(sigma), std::move(opt)};
}

} // namespace

EstimateReport est_biv_mle1(const ExceedanceSet &exc) {
    require_region(exc, ExtremalRegion::component_pivot, "est_biv_mle1");
    require_pair(exc, "est_biv_mle1");
    if (exc.size() < 1) throw TooFewExceedances("est_biv_mle1: empty exceedance set");

    double ms = 0.0;
    for (const auto &row : exc.increments) ms += row[0] * row[0];
    ms /= static_cast<double>(exc.size());

    EstimateReport r = base_report("biv-mle1", exc);
    r.lambda_sq = lambda_sq_of_mean_square(ms);
    mirror_scalar(r);
    return r;
}

EstimateReport est_biv_mle2(const ExceedanceSet &exc, std::optional<double> u) {
    require_region(exc, ExtremalRegion::union_pair, "est_biv_mle2");
    if (exc.size() < 1) throw TooFewExceedances("est_biv_mle2: empty exceedance set");

    const double mass_scale = u.value_or(static_cast<double>(exc.marginal_count));
    if (!(mass_scale > 0.0)) throw DomainError("est_biv_mle2: mass scale must be positive");

    const double n_pts = static_cast<double>(exc.size());
    double sum_sq = 0.0;
    for (const auto &row : exc.increments) sum_sq += row[0] * row[0];

    // theta = exp(t) keeps the search interior. The count term carries the
    // same theta/2 + log(theta)/2 shape as the increment likelihood; dropping
    // the log half leaves a persistent upward bias.
    auto objective = [&](const std::vector<double> &t) {
        const double theta = std::exp(t[0]);
        return 2.0 * std_normal_cdf(std::sqrt(theta)) * mass_scale +
               0.5 * n_pts * (theta + t[0]) + 0.125 * sum_sq * std::exp(-t[0]);
    };

    const double start = std::max(lambda_sq_of_mean_square(sum_sq / n_pts), 1e-4);
    OptimResult opt = nelder_mead(objective, {std::log(start)});

    EstimateReport r = base_report("biv-mle2", exc);
    r.lambda_sq = std::exp(opt.x[0]);
    mirror_scalar(r);
    r.iterations = opt.iterations;
    r.evaluations = opt.evaluations;
    r.converged = opt.converged;
    r.objective = opt.value;
    return r;
}

EstimateReport est_biv_var(const ExceedanceSet &exc) {
    require_region(exc, ExtremalRegion::component_pivot, "est_biv_var");
    require_pair(exc, "est_biv_var");
    if (exc.size() < 2) throw TooFewExceedances("est_biv_var: need at least 2 exceedances");

    const std::vector<double> s = pair_increments(exc);
    const double mu = mean_of(s);
    double ss = 0.0;
    for (double v : s) ss += (v - mu) * (v - mu);

    EstimateReport r = base_report("biv-var", exc);
    r.lambda_sq = 0.25 * ss / static_cast<double>(s.size());
    mirror_scalar(r);
    return r;
}

EstimateReport est_biv_mean(const ExceedanceSet &exc) {
    require_region(exc, ExtremalRegion::component_pivot, "est_biv_mean");
    require_pair(exc, "est_biv_mean");
    if (exc.size() < 1) throw TooFewExceedances("est_biv_mean: empty exceedance set");

    const double raw = -0.5 * mean_of(pair_increments(exc));

    EstimateReport r = base_report("biv-mean", exc);
    r.clamped = raw < 0.0;
    r.lambda_sq = std::max(raw, 0.0);
    mirror_scalar(r);
    return r;
}

EstimateReport est_mv_var(const ExceedanceSet &exc) {
    require_region(exc, ExtremalRegion::component_pivot, "est_mv_var");
    const std::size_t k = exc.components - 1;
    if (exc.size() < 2) throw TooFewExceedances("est_mv_var: need at least 2 exceedances");

    std::vector<double> mu(k, 0.0);
    for (const auto &row : exc.increments)
        for (std::size_t j = 0; j < k; ++j) mu[j] += row[j];
    for (double &v : mu) v /= static_cast<double>(exc.size());

    Matrix cov(k, k, 0.0);
    for (const auto &row : exc.increments)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                cov(a, b) += (row[a] - mu[a]) * (row[b] - mu[b]);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) cov(a, b) /= static_cast<double>(exc.size());

    const SpdMatrix sigma = SpdMatrix::from_matrix(cov);
    sigma.cholesky();  // reject singular or indefinite sample covariance

    EstimateReport r = base_report("mv-var", exc);
    r.lambda = relabel(lambda_of_sigma(sigma), pivot_order(exc));
    if (exc.components == 2) {
        r.lambda_sq = (*r.lambda)(0, 1);
        r.theta = extremal_coefficient(r.lambda_sq);
    }
    return r;
}

EstimateReport est_mv_mle(const ExceedanceSet &exc, const ParameterMatrix &start) {
    require_region(exc, ExtremalRegion::component_pivot, "est_mv_mle");
    if (start.size() != exc.components) throw DomainError("est_mv_mle: start has wrong size");
    start.require_valid();
    if (exc.size() < exc.components)
        throw TooFewExceedances("est_mv_mle: need more exceedances than components");

    const std::vector<std::size_t> order = pivot_order(exc);
    TiedMeanFit fit = fit_tied_mean_gaussian(exc.increments, psi_submatrix(start, order));

    EstimateReport r = base_report("mv-mle", exc);
    r.lambda = relabel(lambda_of_sigma(fit.sigma), order);
    if (exc.components == 2) {
        r.lambda_sq = (*r.lambda)(0, 1);
        r.theta = extremal_coefficient(r.lambda_sq);
    }
    r.iterations = fit.opt.iterations;
    r.evaluations = fit.opt.evaluations;
    r.converged = fit.opt.converged;
    r.objective = fit.opt.value;
    return r;
}

EstimateReport est_spec_biv(const ExceedanceSet &exc) {
    require_region(exc, ExtremalRegion::sum_radius, "est_spec_biv");
    require_pair(exc, "est_spec_biv");

    std::size_t dropped = 0;
    const auto ratios = detail::spectral_log_ratios(exc, dropped);
    if (ratios.empty()) throw TooFewExceedances("est_spec_biv: no interior simplex points");

    double ms = 0.0;
    for (const auto &row : ratios) ms += row[0] * row[0];
    ms /= static_cast<double>(ratios.size());

    EstimateReport r = base_report("spec-biv", exc);
    r.count = ratios.size();
    r.dropped = dropped;
    r.lambda_sq = lambda_sq_of_mean_square(ms);
    mirror_scalar(r);
    return r;
}

EstimateReport est_spec_mv(const ExceedanceSet &exc, const ParameterMatrix &start) {
    require_region(exc, ExtremalRegion::sum_radius, "est_spec_mv");
    if (exc.components < 2) throw DomainError("est_spec_mv: needs at least 2 components");
    if (start.size() != exc.components) throw DomainError("est_spec_mv: start has wrong size");
    start.require_valid();

    std::size_t dropped = 0;
    const auto ratios = detail::spectral_log_ratios(exc, dropped);
    if (ratios.size() < exc.components)
        throw TooFewExceedances("est_spec_mv: too few interior simplex points");

    TiedMeanFit fit = fit_tied_mean_gaussian(ratios, psi_full(start));

    EstimateReport r = base_report("spec-mv", exc);
    r.count = ratios.size();
    r.dropped = dropped;
    r.lambda = lambda_of_sigma(fit.sigma);
    if (exc.components == 2) {
        r.lambda_sq = (*r.lambda)(0, 1);
        r.theta = extremal_coefficient(r.lambda_sq);
    }
    r.iterations = fit.opt.iterations;
    r.evaluations = fit.opt.evaluations;
    r.converged = fit.opt.converged;
    r.objective = fit.opt.value;
    return r;
}

} // namespace hrpot
