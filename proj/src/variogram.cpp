#include "hrpot/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "detail.hpp"
#include "hrpot/errors.hpp"
#include "hrpot/estimators.hpp"

namespace hrpot {

namespace {

// Objective value standing in for a parameter point outside the model
// family's numerical range.
constexpr double kRejected = 1e300;

double wrap_to_half_turn(double beta) {
    double b = std::fmod(beta, kPi);
    if (b < 0.0) b += kPi;
    return b;
}

} // namespace

void VariogramSpec::validate() const {
    if (!(alpha > 0.0) || !(alpha <= 2.0)) throw DomainError("variogram: alpha must be in (0, 2]");
    if (!(s > 0.0)) throw DomainError("variogram: s must be positive");
    if (!(c > 0.0)) throw DomainError("variogram: c must be positive");
    if (!std::isfinite(beta)) throw DomainError("variogram: beta must be finite");
}

VariogramSpec normalize_anisotropy(VariogramSpec spec) {
    spec.validate();
    if (!spec.anisotropic) {
        spec.beta = 0.0;
        spec.c = 1.0;
        return spec;
    }
    // (alpha, s, beta, c) and (alpha, s/c, beta + pi/2, 1/c) coincide; pick
    // the branch with c >= 1, then reduce beta modulo pi.
    if (spec.c < 1.0) {
        spec.s /= spec.c;
        spec.beta += 0.5 * kPi;
        spec.c = 1.0 / spec.c;
    }
    spec.beta = wrap_to_half_turn(spec.beta);
    return spec;
}

LocationSet LocationSet::line(const std::vector<double> &xs) {
    LocationSet out;
    out.points.reserve(xs.size());
    for (double x : xs) out.points.push_back({x});
    return out;
}

void LocationSet::validate() const {
    if (points.empty()) throw DomainError("locations: need at least 1 point");
    const std::size_t d = points.front().size();
    if (d < 1 || d > 2) throw DomainError("locations: dimension must be 1 or 2");
    for (const auto &p : points)
        if (p.size() != d) throw DomainError("locations: mixed dimensions");
    if (!labels.empty() && labels.size() != points.size())
        throw DomainError("locations: label count mismatch");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw DomainError("locations: duplicate point");
}

double variogram_eval(const VariogramSpec &spec, const std::vector<double> &h) {
    spec.validate();
    if (h.size() < 1 || h.size() > 2) throw DomainError("variogram: displacement must be 1-D or 2-D");

    double n2 = 0.0;
    if (spec.anisotropic) {
        if (h.size() != 2) throw DomainError("variogram: anisotropy needs 2-D displacements");
        const double u = std::cos(spec.beta) * h[0] - std::sin(spec.beta) * h[1];
        const double v = spec.c * (std::sin(spec.beta) * h[0] + std::cos(spec.beta) * h[1]);
        n2 = u * u + v * v;
    } else {
        for (double x : h) n2 += x * x;
    }
    if (n2 == 0.0) return 0.0;
    return std::pow(std::sqrt(n2) / spec.s, spec.alpha);
}

ParameterMatrix lambda_of_variogram(const VariogramSpec &spec, const LocationSet &locs) {
    locs.validate();
    const std::size_t m = locs.size();
    if (m < 2) throw DomainError("lambda_of_variogram: need at least 2 locations");
    ParameterMatrix lam(m);
    std::vector<double> h(locs.dim());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t d = 0; d < h.size(); ++d) h[d] = locs.points[i][d] - locs.points[j][d];
            lam.set(i, j, 0.25 * variogram_eval(spec, h));
        }
    lam.require_valid();
    return lam;
}

double ecf_of_variogram(const VariogramSpec &spec, const std::vector<double> &h) {
    return extremal_coefficient(0.25 * variogram_eval(spec, h));
}

VariogramSpec variogram_fit_start(const LocationSet &locs, bool anisotropic) {
    locs.validate();
    if (locs.size() < 2) throw DomainError("variogram_fit_start: need at least 2 locations");
    std::vector<double> dist;
    for (std::size_t i = 0; i < locs.size(); ++i)
        for (std::size_t j = i + 1; j < locs.size(); ++j) {
            double n2 = 0.0;
            for (std::size_t d = 0; d < locs.dim(); ++d) {
                const double v = locs.points[i][d] - locs.points[j][d];
                n2 += v * v;
            }
            dist.push_back(std::sqrt(n2));
        }
    std::sort(dist.begin(), dist.end());
    const std::size_t m = dist.size();
    const double median = (m % 2 == 1) ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);

    VariogramSpec start;
    start.s = median;
    start.anisotropic = anisotropic;
    return start;
}

namespace {

// Unconstrained coordinates for the optimizer: alpha through a scaled
// sigmoid, s and c through logs, beta free. Isotropic fits use only the
// first two coordinates.
std::vector<double> pack_spec(const VariogramSpec &spec) {
    const double a = std::clamp(spec.alpha, 1e-6, 2.0 - 1e-9);
    std::vector<double> t = {std::log(a / (2.0 - a)), std::log(spec.s)};
    if (spec.anisotropic) {
        t.push_back(spec.beta);
        t.push_back(std::log(spec.c));
    }
    return t;
}

VariogramSpec unpack_spec(const std::vector<double> &t, bool anisotropic) {
    VariogramSpec spec;
    spec.alpha = 2.0 / (1.0 + std::exp(-t[0]));
    spec.s = std::exp(t[1]);
    spec.anisotropic = anisotropic;
    if (anisotropic) {
        spec.beta = t[2];
        spec.c = std::exp(t[3]);
    }
    return spec;
}

void require_planar_when_anisotropic(const VariogramSpec &start, const LocationSet &locs) {
    if (start.anisotropic && locs.dim() != 2)
        throw DomainError("variogram fit: anisotropy needs 2-D locations");
}

EstimateReport fit_report(const char *id, const std::vector<double> &t, bool anisotropic,
                          const LocationSet &locs, const OptimResult &opt) {
    EstimateReport r;
    r.estimator = id;
    r.variogram = normalize_anisotropy(unpack_spec(t, anisotropic));
    r.lambda = lambda_of_variogram(*r.variogram, locs);
    r.iterations = opt.iterations;
    r.evaluations = opt.evaluations;
    r.converged = opt.converged;
    r.objective = opt.value;
    return r;
}

} // namespace

EstimateReport fit_projection_ls(const Matrix &pairwise, const LocationSet &locs,
                                 const VariogramSpec &start, ResidualNorm norm) {
    locs.validate();
    start.validate();
    require_planar_when_anisotropic(start, locs);
    const std::size_t m = locs.size();
    if (!pairwise.square() || pairwise.rows() != m)
        throw DomainError("fit_projection_ls: pairwise matrix size mismatch");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double a = pairwise(i, j), b = pairwise(j, i);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw DomainError("fit_projection_ls: pairwise matrix not symmetric");
            if (a < 0.0) throw DomainError("fit_projection_ls: negative pairwise estimate");
        }

    std::vector<double> h(locs.dim());
    // Frobenius residuals are minimized through their square (smooth near a
    // zero-residual optimum); the reported objective is the norm itself.
    auto objective = [&](const std::vector<double> &t) {
        const VariogramSpec spec = unpack_spec(t, start.anisotropic);
        double sq = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                for (std::size_t d = 0; d < h.size(); ++d)
                    h[d] = locs.points[i][d] - locs.points[j][d];
                const double r = pairwise(i, j) - 0.25 * variogram_eval(spec, h);
                sq += r * r;
                worst = std::max(worst, std::abs(r));
            }
        return norm == ResidualNorm::frobenius ? 2.0 * sq : worst;
    };

    OptimOptions options;
    options.f_tolerance_abs = 1e-22;
    options.x_tolerance = 1e-10;
    OptimResult opt = nelder_mead(objective, pack_spec(start), options);

    EstimateReport r = fit_report("proj-ls", opt.x, start.anisotropic, locs, opt);
    if (norm == ResidualNorm::frobenius) r.objective = std::sqrt(opt.value);
    r.count = m * (m - 1) / 2;
    return r;
}

EstimateReport fit_spectral_ml(const ExceedanceSet &exc, const LocationSet &locs,
                               const VariogramSpec &start) {
    locs.validate();
    start.validate();
    require_planar_when_anisotropic(start, locs);
    if (exc.region != ExtremalRegion::sum_radius)
        throw DomainError("fit_spectral_ml: wrong exceedance region");
    if (exc.components != locs.size())
        throw DomainError("fit_spectral_ml: component/location count mismatch");

    std::size_t dropped = 0;
    const auto ratios = detail::spectral_log_ratios(exc, dropped);
    if (ratios.size() < 2) throw TooFewExceedances("fit_spectral_ml: too few interior points");

    auto objective = [&](const std::vector<double> &t) {
        try {
            const ParameterMatrix lam =
                lambda_of_variogram(unpack_spec(t, start.anisotropic), locs);
            return detail::tied_mean_gaussian_nll(ratios, psi_full(lam));
        } catch (const NotPositiveDefinite &) {
            return kRejected;
        }
    };

    OptimResult opt = nelder_mead(objective, pack_spec(start));

    EstimateReport r = fit_report("spec-ml", opt.x, start.anisotropic, locs, opt);
    r.count = ratios.size();
    r.dropped = dropped;
    r.q = exc.q;
    return r;
}

EstimateReport fit_spectral_cl(const std::vector<PairExceedances> &pairs, const LocationSet &locs,
                               const VariogramSpec &start) {
    locs.validate();
    start.validate();
    require_planar_when_anisotropic(start, locs);
    const std::size_t m = locs.size();
    if (pairs.size() != m * (m - 1) / 2)
        throw DomainError("fit_spectral_cl: need every location pair exactly once");

    // Sufficient statistics per pair: the bivariate angular likelihood with
    // gamma = gamma(t_a - t_b) reduces to
    //   (N/2) log gamma + (sum x^2)/(2 gamma) + N gamma / 8 + const.
    struct PairStats {
        std::vector<double> h;
        double n = 0.0;
        double sum_sq = 0.0;
    };
    std::vector<char> seen(m * m, 0);
    std::vector<PairStats> stats;
    std::size_t total_n = 0, total_dropped = 0;
    double q_any = 0.0;
    for (const auto &p : pairs) {
        if (p.a >= m || p.b >= m || p.a == p.b)
            throw DomainError("fit_spectral_cl: pair index out of range");
        const std::size_t lo = std::min(p.a, p.b), hi = std::max(p.a, p.b);
        if (seen[lo * m + hi]) throw DomainError("fit_spectral_cl: duplicate pair");
        seen[lo * m + hi] = 1;
        if (p.exc.region != ExtremalRegion::sum_radius || p.exc.components != 2)
            throw DomainError("fit_spectral_cl: pair exceedances must be bivariate radial sets");

        std::size_t dropped = 0;
        const auto ratios = detail::spectral_log_ratios(p.exc, dropped);
        if (ratios.empty()) throw TooFewExceedances("fit_spectral_cl: a pair has no interior points");

        PairStats st;
        st.h.resize(locs.dim());
        for (std::size_t d = 0; d < st.h.size(); ++d)
            st.h[d] = locs.points[p.a][d] - locs.points[p.b][d];
        st.n = static_cast<double>(ratios.size());
        for (const auto &row : ratios) st.sum_sq += row[0] * row[0];
        stats.push_back(std::move(st));
        total_n += ratios.size();
        total_dropped += dropped;
        q_any = p.exc.q;
    }

    auto objective = [&](const std::vector<double> &t) {
        const VariogramSpec spec = unpack_spec(t, start.anisotropic);
        double total = 0.0;
        for (const auto &st : stats) {
            const double g = variogram_eval(spec, st.h);
            if (!(g > 0.0)) return kRejected;
            total += 0.5 * st.n * std::log(g) + 0.5 * st.sum_sq / g + 0.125 * st.n * g;
        }
        return total;
    };

    OptimResult opt = nelder_mead(objective, pack_spec(start));

    EstimateReport r = fit_report("spec-cl", opt.x, start.anisotropic, locs, opt);
    r.count = total_n;
    r.dropped = total_dropped;
    r.q = q_any;
    return r;
}

} // namespace hrpot
