#include "hrpot/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrpot/errors.hpp"
#include "hrpot/hr_model.hpp"

namespace hrpot {

namespace {

std::vector<double> displacement(const std::vector<double> &a, const std::vector<double> &b) {
    std::vector<double> h(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) h[d] = a[d] - b[d];
    return h;
}

// Covariance of the process pinned to zero at the point a:
// cov(i, j) = (gamma(t_i - a) + gamma(t_j - a) - gamma(t_i - t_j)) / 2.
double pinned_cov(const VariogramSpec &spec, const LocationSet &locs,
                  const std::vector<double> &a, std::size_t i, std::size_t j) {
    const double gi = variogram_eval(spec, displacement(locs.points[i], a));
    const double gj = variogram_eval(spec, displacement(locs.points[j], a));
    const double gij = variogram_eval(spec, displacement(locs.points[i], locs.points[j]));
    return 0.5 * (gi + gj - gij);
}

// Working form of the representation for the sampling loop. draw_sites maps
// rows of the Cholesky factor back to site indices; a site anchor is excluded
// from the factor because its value is identically zero.
struct Representation {
    std::vector<double> sigma_sq;          // gamma(t_i - a) per site
    Matrix chol;                           // lower factor over draw_sites
    std::vector<std::size_t> draw_sites;
    std::optional<std::size_t> anchor_site;
};

Representation site_anchored(const VariogramSpec &spec, const LocationSet &locs,
                             std::size_t anchor) {
    const std::size_t m = locs.size();
    Representation rep;
    rep.anchor_site = anchor;
    rep.sigma_sq.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        rep.sigma_sq[i] = variogram_eval(spec, displacement(locs.points[i], locs.points[anchor]));

    for (std::size_t i = 0; i < m; ++i)
        if (i != anchor) rep.draw_sites.push_back(i);
    if (rep.draw_sites.empty()) return rep;

    Matrix cov(rep.draw_sites.size(), rep.draw_sites.size(), 0.0);
    for (std::size_t r = 0; r < rep.draw_sites.size(); ++r)
        for (std::size_t c = r; c < rep.draw_sites.size(); ++c) {
            const double v =
                pinned_cov(spec, locs, locs.points[anchor], rep.draw_sites[r], rep.draw_sites[c]);
            cov(r, c) = v;
            cov(c, r) = v;
        }
    rep.chol = SpdMatrix::from_matrix(cov).cholesky();
    return rep;
}

Representation point_anchored(const VariogramSpec &spec, const LocationSet &locs,
                              const std::vector<double> &a) {
    const std::size_t m = locs.size();
    Representation rep;
    rep.sigma_sq.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        rep.sigma_sq[i] = variogram_eval(spec, displacement(locs.points[i], a));
        rep.draw_sites.push_back(i);
    }
    Matrix cov(m, m, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = r; c < m; ++c) {
            const double v = pinned_cov(spec, locs, a, r, c);
            cov(r, c) = v;
            cov(c, r) = v;
        }
    rep.chol = SpdMatrix::from_matrix(cov).cholesky();
    return rep;
}

// The points needed per draw grow like exp(accuracy * max_i sigma(t_i)), so
// the anchor is chosen to minimize the largest pinned variance. Candidates:
// the centroid and every site.
Representation best_representation(const VariogramSpec &spec, const LocationSet &locs) {
    const std::size_t m = locs.size();
    const std::size_t dim = locs.dim();

    std::vector<std::vector<double>> candidates;
    std::vector<double> centroid(dim, 0.0);
    for (const auto &p : locs.points)
        for (std::size_t d = 0; d < dim; ++d) centroid[d] += p[d] / static_cast<double>(m);
    candidates.push_back(centroid);
    for (const auto &p : locs.points) candidates.push_back(p);

    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double score = 0.0;
        for (const auto &p : locs.points)
            score = std::max(score, variogram_eval(spec, displacement(p, candidates[c])));
        if (score < best_score) {
            best_score = score;
            best = c;
        }
    }

    const auto &a = candidates[best];
    for (std::size_t i = 0; i < m; ++i)
        if (locs.points[i] == a) return site_anchored(spec, locs, i);
    return point_anchored(spec, locs, a);
}

void validate_config(const BrSampleConfig &config) {
    config.locs.validate();
    config.spec.validate();
    if (config.spec.anisotropic && config.locs.dim() != 2)
        throw DomainError("br_sample: anisotropy needs planar locations");
    if (config.n == 0) throw DomainError("br_sample: need at least 1 draw");
    if (!(config.accuracy > 0.0)) throw DomainError("br_sample: accuracy must be positive");
    if (config.point_cap == 0) throw DomainError("br_sample: point cap must be positive");
    if (config.anchor && *config.anchor >= config.locs.size())
        throw DomainError("br_sample: anchor site out of range");
}

}  // namespace

std::vector<double> mvn_sample(const std::vector<double> &mean, const SpdMatrix &cov,
                               RngStream &rng) {
    const std::size_t k = cov.dim();
    if (mean.size() != k) throw DomainError("mvn_sample: mean length does not match covariance");
    const Matrix &chol = cov.cholesky();

    std::vector<double> z(k);
    for (std::size_t j = 0; j < k; ++j) z[j] = rng.gaussian();

    std::vector<double> out(mean);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c <= r; ++c) out[r] += chol(r, c) * z[c];
    return out;
}

GaussianRepresentation covariance_from_variogram(const VariogramSpec &spec,
                                                 const LocationSet &locs, std::size_t anchor) {
    locs.validate();
    spec.validate();
    if (anchor >= locs.size()) throw DomainError("covariance_from_variogram: anchor out of range");
    if (spec.anisotropic && locs.dim() != 2)
        throw DomainError("covariance_from_variogram: anisotropy needs planar locations");

    const std::size_t m = locs.size();
    GaussianRepresentation out;
    out.anchor = anchor;
    out.sigma_sq.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        out.sigma_sq[i] = variogram_eval(spec, displacement(locs.points[i], locs.points[anchor]));

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < m; ++i)
        if (i != anchor) rest.push_back(i);
    Matrix cov(rest.size(), rest.size(), 0.0);
    for (std::size_t r = 0; r < rest.size(); ++r)
        for (std::size_t c = r; c < rest.size(); ++c) {
            const double v = pinned_cov(spec, locs, locs.points[anchor], rest[r], rest[c]);
            cov(r, c) = v;
            cov(c, r) = v;
        }
    out.cov = SpdMatrix::from_matrix(cov);
    return out;
}

BrSample br_sample(const BrSampleConfig &config) {
    validate_config(config);
    const std::size_t m = config.locs.size();

    const Representation rep = config.anchor
                                   ? site_anchored(config.spec, config.locs, *config.anchor)
                                   : best_representation(config.spec, config.locs);

    double sigma_max = 0.0;
    for (double s2 : rep.sigma_sq) sigma_max = std::max(sigma_max, std::sqrt(s2));
    const double kappa = config.accuracy * sigma_max;

    const std::size_t k = rep.draw_sites.size();
    BrSample out{SampleMatrix(config.n, m, MarginScale::gumbel), 0};

    RngStream parent(config.seed);
    std::vector<double> zeta(m);
    std::vector<double> z(k);
    for (std::size_t d = 0; d < config.n; ++d) {
        RngStream rng = parent.child(d);
        std::fill(zeta.begin(), zeta.end(), -std::numeric_limits<double>::infinity());
        double min_zeta = -std::numeric_limits<double>::infinity();
        double u_sum = 0.0;
        std::size_t points = 0;

        while (true) {
            u_sum += rng.exponential();
            const double u = -std::log(u_sum);
            if (points > 0 && u < min_zeta - kappa) break;
            if (points >= config.point_cap) {
                ++out.capped_draws;
                break;
            }
            ++points;

            for (std::size_t j = 0; j < k; ++j) z[j] = rng.gaussian();
            for (std::size_t r = 0; r < k; ++r) {
                double y = 0.0;
                for (std::size_t c = 0; c <= r; ++c) y += rep.chol(r, c) * z[c];
                const std::size_t i = rep.draw_sites[r];
                zeta[i] = std::max(zeta[i], u + y - 0.5 * rep.sigma_sq[i]);
            }
            if (rep.anchor_site) {
                std::size_t i = *rep.anchor_site;
                zeta[i] = std::max(zeta[i], u);
            }
            min_zeta = *std::min_element(zeta.begin(), zeta.end());
        }

        for (std::size_t i = 0; i < m; ++i) out.data.at(d, i) = zeta[i];
    }
    return out;
}

BrSample hr_sample_bivariate(double lambda_sq, std::size_t n, std::uint64_t seed,
                             double accuracy) {
    if (!(lambda_sq >= 0.0)) throw DomainError("hr_sample_bivariate: lambda_sq must be >= 0");
    if (n == 0) throw DomainError("hr_sample_bivariate: need at least 1 draw");

    if (lambda_sq == 0.0) {
        // Complete dependence: both components equal one Gumbel variable.
        BrSample out{SampleMatrix(n, 2, MarginScale::gumbel), 0};
        RngStream parent(seed);
        for (std::size_t d = 0; d < n; ++d) {
            RngStream rng = parent.child(d);
            const double g = -std::log(rng.exponential());
            out.data.at(d, 0) = g;
            out.data.at(d, 1) = g;
        }
        return out;
    }
    if (lambda_sq >= kIndependentLambdaSq) {
        BrSample out{SampleMatrix(n, 2, MarginScale::gumbel), 0};
        RngStream parent(seed);
        for (std::size_t d = 0; d < n; ++d) {
            RngStream rng = parent.child(d);
            out.data.at(d, 0) = -std::log(rng.exponential());
            out.data.at(d, 1) = -std::log(rng.exponential());
        }
        return out;
    }

    // Two sites at distance 4 * lambda_sq under gamma(h) = |h| carry exactly
    // the requested pairwise dependence.
    BrSampleConfig config;
    config.locs = LocationSet::line({0.0, 4.0 * lambda_sq});
    config.spec = VariogramSpec{};
    config.n = n;
    config.seed = seed;
    config.accuracy = accuracy;
    return br_sample(config);
}

}  // namespace hrpot
