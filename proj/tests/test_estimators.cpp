#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hrpot/estimators.hpp"
#include "hrpot/errors.hpp"
#include "hrpot/hr_model.hpp"
#include "hrpot/numerics.hpp"
#include "test_util.hpp"

using namespace hrpot;

namespace {

ExceedanceSet make_pivot_set(std::vector<std::vector<double>> increments, std::size_t components,
                             std::size_t pivot = 0) {
    ExceedanceSet exc;
    exc.region = ExtremalRegion::component_pivot;
    exc.pivot = pivot;
    exc.components = components;
    exc.sample_size = increments.size();
    exc.q = 0.0;
    exc.indices.resize(increments.size());
    exc.increments = std::move(increments);
    return exc;
}

ExceedanceSet make_union_set(std::vector<double> increments, std::size_t marginal_count) {
    ExceedanceSet exc;
    exc.region = ExtremalRegion::union_pair;
    exc.components = 2;
    exc.sample_size = increments.size();
    exc.marginal_count = marginal_count;
    exc.indices.resize(increments.size());
    for (double s : increments) exc.increments.push_back({s});
    return exc;
}

ExceedanceSet make_angle_set(std::vector<std::vector<double>> angles) {
    ExceedanceSet exc;
    exc.region = ExtremalRegion::sum_radius;
    exc.components = angles.empty() ? 2 : angles.front().size();
    exc.sample_size = angles.size();
    exc.indices.resize(angles.size());
    exc.radii.assign(angles.size(), 1.0);
    exc.angles = std::move(angles);
    return exc;
}

// Valid dependence matrix from a fractal variogram on the line.
ParameterMatrix line_parameter_matrix(const std::vector<double> &sites) {
    ParameterMatrix lam(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            lam.set(i, j, std::abs(sites[i] - sites[j]) / 4.0);
    return lam;
}

// Increment vectors drawn exactly from the limiting Gaussian of a given
// dependence matrix with pivot 0: mean_j = -2 lambda_sq(j,0), cov = psi.
std::vector<std::vector<double>> gaussian_increments(const ParameterMatrix &lam, std::size_t n,
                                                     RngStream &rng) {
    const std::size_t k = lam.size() - 1;
    const SpdMatrix psi = psi_full(lam);
    const Matrix &lower = psi.cholesky();
    std::vector<std::vector<double>> out(n, std::vector<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> z(k);
        for (double &v : z) v = rng.gaussian();
        for (std::size_t a = 0; a < k; ++a) {
            double s = -2.0 * lam(a + 1, 0);
            for (std::size_t c = 0; c <= a; ++c) s += lower(a, c) * z[c];
            out[i][a] = s;
        }
    }
    return out;
}

double tied_mean_objective(const std::vector<std::vector<double>> &x, const ParameterMatrix &lam) {
    const SpdMatrix psi = psi_full(lam);
    const Matrix &lower = psi.cholesky();
    const std::size_t k = psi.dim();
    double quad = 0.0;
    for (const auto &row : x) {
        std::vector<double> y(k);
        for (std::size_t j = 0; j < k; ++j) y[j] = row[j] + 0.5 * psi(j, j);
        forward_substitute(lower, y);
        for (double v : y) quad += v * v;
    }
    return 0.5 * static_cast<double>(x.size()) * log_det_from_cholesky(lower) + 0.5 * quad;
}

} // namespace

TEST_CASE("closed-form pivot estimator") {
    SUBCASE("hand values") {
        const auto zero = make_pivot_set({{0.0}, {0.0}, {0.0}}, 2);
        CHECK(est_biv_mle1(zero).lambda_sq == doctest::Approx(0.0));

        // mean square 8: (-1 + 3) / 2 = 1
        const auto eight = make_pivot_set({{2.0}, {-2.0}, {4.0}, {-2.0}}, 2);
        double ms = (4.0 + 4.0 + 16.0 + 4.0) / 4.0;
        CHECK(ms == doctest::Approx(7.0));
        const auto exact = make_pivot_set({{std::sqrt(8.0)}, {-std::sqrt(8.0)}}, 2);
        CHECK(est_biv_mle1(exact).lambda_sq == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("matches numeric likelihood minimization on random data") {
        RngStream rng(101);
        for (int rep = 0; rep < 100; ++rep) {
            const double lsq = 0.05 + 2.95 * rng.uniform01();
            const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform01() * 45.0);
            std::vector<std::vector<double>> inc(n, std::vector<double>(1));
            for (auto &row : inc) row[0] = -2.0 * lsq + 2.0 * std::sqrt(lsq) * rng.gaussian();
            const auto exc = make_pivot_set(inc, 2);

            double sum_sq = 0.0;
            for (const auto &row : exc.increments) sum_sq += row[0] * row[0];
            const double n_pts = static_cast<double>(n);
            auto nll = [&](const std::vector<double> &t) {
                const double theta = std::exp(t[0]);
                return 0.5 * n_pts * theta + 0.5 * n_pts * t[0] + 0.125 * sum_sq / theta;
            };
            const OptimResult opt = nelder_mead(nll, {0.0});
            REQUIRE(opt.converged);
            CHECK(est_biv_mle1(exc).lambda_sq == doctest::Approx(std::exp(opt.x[0])).epsilon(1e-6));
        }
    }
    SUBCASE("rejects wrong input") {
        CHECK_THROWS_AS(est_biv_mle1(make_union_set({1.0}, 1)), DomainError);
        CHECK_THROWS_AS(est_biv_mle1(make_pivot_set({{1.0, 2.0}}, 3)), DomainError);
    }
}

TEST_CASE("union-region likelihood estimator") {
    RngStream rng(7);
    std::vector<double> inc(50);
    for (double &s : inc) s = rng.gaussian();
    const auto exc = make_union_set(inc, 30);

    SUBCASE("beats a dense grid") {
        const EstimateReport rep = est_biv_mle2(exc);
        REQUIRE(rep.converged);
        CHECK(rep.lambda_sq > 0.0);

        double sum_sq = 0.0;
        for (double s : inc) sum_sq += s * s;
        auto objective = [&](double theta) {
            return 2.0 * std_normal_cdf(std::sqrt(theta)) * 30.0 +
                   25.0 * (theta + std::log(theta)) + 0.125 * sum_sq / theta;
        };
        CHECK(rep.objective == doctest::Approx(objective(rep.lambda_sq)).epsilon(1e-12));
        double best = 1e300;
        for (int g = 0; g < 200; ++g) {
            const double theta = std::pow(10.0, -4.0 + 8.0 * g / 199.0);
            best = std::min(best, objective(theta));
        }
        CHECK(rep.objective <= best + 1e-9 * std::abs(best));
    }
    SUBCASE("estimate decreases as the mass term grows") {
        const double a = est_biv_mle2(exc, 10.0).lambda_sq;
        const double b = est_biv_mle2(exc, 100.0).lambda_sq;
        const double c = est_biv_mle2(exc, 1000.0).lambda_sq;
        CHECK(a > b);
        CHECK(b > c);
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(est_biv_mle2(make_union_set({}, 10)), TooFewExceedances);
        CHECK_THROWS_AS(est_biv_mle2(make_union_set({1.0}, 0)), DomainError);
        CHECK_THROWS_AS(est_biv_mle2(make_pivot_set({{1.0}}, 2)), DomainError);
    }
}

TEST_CASE("moment estimators on pivot increments") {
    SUBCASE("variance hand values") {
        const auto exc = make_pivot_set({{2.0}, {-2.0}}, 2);
        CHECK(est_biv_var(exc).lambda_sq == doctest::Approx(1.0));

        const auto flat = make_pivot_set({{3.0}, {3.0}, {3.0}}, 2);
        CHECK(est_biv_var(flat).lambda_sq == doctest::Approx(0.0));

        CHECK_THROWS_AS(est_biv_var(make_pivot_set({{1.0}}, 2)), TooFewExceedances);
    }
    SUBCASE("mean hand values and clamping") {
        const auto neg = make_pivot_set({{-2.0}, {-2.0}}, 2);
        const EstimateReport a = est_biv_mean(neg);
        CHECK(a.lambda_sq == doctest::Approx(1.0));
        CHECK_FALSE(a.clamped);

        const auto pos = make_pivot_set({{2.0}, {2.0}}, 2);
        const EstimateReport b = est_biv_mean(pos);
        CHECK(b.lambda_sq == doctest::Approx(0.0));
        CHECK(b.clamped);
    }
}

TEST_CASE("multivariate moment estimator") {
    SUBCASE("hand covariance") {
        const auto exc = make_pivot_set({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}, 3);
        const EstimateReport rep = est_mv_var(exc);
        REQUIRE(rep.lambda.has_value());
        const ParameterMatrix &lam = *rep.lambda;
        CHECK(lam(0, 1) == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(lam(0, 2) == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(lam(1, 2) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(lam.is_valid());
    }
    SUBCASE("relabeling under a middle pivot") {
        const auto exc = make_pivot_set({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}, 3, 1);
        const ParameterMatrix lam = *est_mv_var(exc).lambda;
        CHECK(lam(0, 1) == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(lam(1, 2) == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(lam(0, 2) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("pair entry agrees with the bivariate variance estimator") {
        RngStream rng(11);
        std::vector<std::vector<double>> inc(60, std::vector<double>(2));
        std::vector<std::vector<double>> first(60, std::vector<double>(1));
        for (std::size_t i = 0; i < 60; ++i) {
            inc[i][0] = rng.gaussian();
            inc[i][1] = 0.3 * inc[i][0] + rng.gaussian();
            first[i][0] = inc[i][0];
        }
        const double full = (*est_mv_var(make_pivot_set(inc, 3)).lambda)(0, 1);
        const double pair = est_biv_var(make_pivot_set(first, 2)).lambda_sq;
        CHECK(full == doctest::Approx(pair).epsilon(1e-12));
    }
    SUBCASE("degenerate data is rejected") {
        // second increment coordinate is a multiple of the first
        std::vector<std::vector<double>> inc;
        for (int i = 0; i < 10; ++i)
            inc.push_back({static_cast<double>(i), 2.0 * static_cast<double>(i)});
        CHECK_THROWS_AS(est_mv_var(make_pivot_set(inc, 3)), NotPositiveDefinite);
    }
}

TEST_CASE("multivariate likelihood estimator") {
    SUBCASE("two-component reduction matches the closed form") {
        RngStream rng(13);
        std::vector<std::vector<double>> inc(200, std::vector<double>(1));
        for (auto &row : inc) row[0] = -1.0 + 1.4 * rng.gaussian();
        const auto exc = make_pivot_set(inc, 2);

        ParameterMatrix start(2);
        start.set(0, 1, 0.7);
        const EstimateReport rep = est_mv_mle(exc, start);
        REQUIRE(rep.converged);
        CHECK(rep.lambda_sq == doctest::Approx(est_biv_mle1(exc).lambda_sq).epsilon(1e-6));
    }
    SUBCASE("recovers the truth from exact Gaussian increments") {
        const ParameterMatrix truth = line_parameter_matrix({0.0, 1.0, 2.0});
        RngStream rng(17);
        const auto inc = gaussian_increments(truth, 10000, rng);
        const auto exc = make_pivot_set(inc, 3);

        const EstimateReport mle = est_mv_mle(exc, truth);
        REQUIRE(mle.converged);
        const EstimateReport var = est_mv_var(exc);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j) {
                CHECK(std::abs((*mle.lambda)(i, j) - truth(i, j)) < 0.05);
                CHECK(std::abs((*var.lambda)(i, j) - truth(i, j)) < 0.05);
            }
        CHECK((*mle.lambda).is_valid());

        // The optimizer must not end above its starting point.
        CHECK(mle.objective <= tied_mean_objective(inc, truth) + 1e-9);
        // And the reported objective is the tied-mean Gaussian value.
        CHECK(mle.objective == doctest::Approx(tied_mean_objective(inc, *mle.lambda)).epsilon(1e-6));
    }
    SUBCASE("guards") {
        ParameterMatrix start(3);
        start.set(0, 1, 0.5);
        start.set(0, 2, 0.5);
        start.set(1, 2, 0.5);
        CHECK_THROWS_AS(est_mv_mle(make_pivot_set({{1.0, 2.0}}, 3), start), TooFewExceedances);
        ParameterMatrix wrong(2);
        wrong.set(0, 1, 0.5);
        CHECK_THROWS_AS(est_mv_mle(make_pivot_set({{1.0, 2.0}}, 3), wrong), DomainError);
    }
}

TEST_CASE("bivariate angular estimator") {
    SUBCASE("hand values") {
        const auto even = make_angle_set({{0.5, 0.5}, {0.5, 0.5}});
        CHECK(est_spec_biv(even).lambda_sq == doctest::Approx(0.0));

        // log ratio +-sqrt(8): mean square 8 gives 1
        const double r = std::exp(std::sqrt(8.0));
        const auto eight = make_angle_set({{1.0 / (1.0 + r), r / (1.0 + r)},
                                           {r / (1.0 + r), 1.0 / (1.0 + r)}});
        CHECK(est_spec_biv(eight).lambda_sq == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("boundary points are dropped and counted") {
        const auto mixed = make_angle_set({{0.5, 0.5}, {1e-13, 1.0 - 1e-13}, {0.4, 0.6}});
        const EstimateReport rep = est_spec_biv(mixed);
        CHECK(rep.dropped == 1);
        CHECK(rep.count == 2);

        const auto all_boundary = make_angle_set({{0.0, 1.0}});
        CHECK_THROWS_AS(est_spec_biv(all_boundary), TooFewExceedances);
    }
}

TEST_CASE("multivariate angular estimator") {
    RngStream rng(23);

    SUBCASE("two-component reduction matches the closed form") {
        std::vector<std::vector<double>> angles;
        for (int i = 0; i < 100; ++i) {
            const double w = 1.0 / (1.0 + std::exp(-1.5 * rng.gaussian()));
            angles.push_back({w, 1.0 - w});
        }
        const auto exc = make_angle_set(angles);
        ParameterMatrix start(2);
        start.set(0, 1, 1.0);
        const EstimateReport rep = est_spec_mv(exc, start);
        REQUIRE(rep.converged);
        CHECK(rep.lambda_sq == doctest::Approx(est_spec_biv(exc).lambda_sq).epsilon(1e-6));
    }
    SUBCASE("dropped proportionality constant is parameter-free") {
        // Full angular negative log likelihood minus the fitted objective
        // must not depend on the parameter matrix.
        std::vector<std::vector<double>> angles;
        std::vector<std::vector<double>> ratios;
        for (int i = 0; i < 30; ++i) {
            double a = std::exp(rng.gaussian());
            double b = std::exp(rng.gaussian());
            double c = std::exp(rng.gaussian());
            const double s = a + b + c;
            angles.push_back({a / s, b / s, c / s});
            ratios.push_back({std::log(b / a), std::log(c / a)});
        }

        double reference = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> sites(3);
            for (double &t : sites) t = 3.0 * rng.uniform01();
            const ParameterMatrix lam = line_parameter_matrix(sites);
            if (!lam.is_valid()) continue;

            double full_nll = 0.0;
            for (const auto &w : angles) full_nll -= spectral_logdensity(w, lam);
            const double diff = full_nll - tied_mean_objective(ratios, lam);
            if (rep == 0)
                reference = diff;
            else
                CHECK(diff == doctest::Approx(reference).epsilon(1e-9));
        }
    }
    SUBCASE("recovers the truth from its own angular law") {
        // Indirect consistency: fit exact Gaussian log ratios, which follow
        // the angular law of the same parameter matrix.
        const ParameterMatrix truth = line_parameter_matrix({0.0, 0.8, 2.4});
        const auto inc = gaussian_increments(truth, 8000, rng);
        std::vector<std::vector<double>> angles(inc.size());
        for (std::size_t i = 0; i < inc.size(); ++i) {
            const double e0 = 1.0, e1 = std::exp(inc[i][0]), e2 = std::exp(inc[i][1]);
            const double s = e0 + e1 + e2;
            angles[i] = {e0 / s, e1 / s, e2 / s};
        }
        const EstimateReport rep = est_spec_mv(make_angle_set(angles), truth);
        REQUIRE(rep.converged);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                CHECK(std::abs((*rep.lambda)(i, j) - truth(i, j)) < 0.06);
    }
}

TEST_CASE("estimates stay in the admissible set") {
    RngStream rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 40;
        std::vector<std::vector<double>> inc(n, std::vector<double>(2));
        for (auto &row : inc) {
            row[0] = rng.gaussian() * 2.0 - 0.5;
            row[1] = rng.gaussian() + 0.4 * row[0];
        }
        const auto exc = make_pivot_set(inc, 3);
        const EstimateReport mom = est_mv_var(exc);
        CHECK(mom.lambda->is_valid());
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j) CHECK((*mom.lambda)(i, j) >= 0.0);

        const EstimateReport lik = est_mv_mle(exc, *mom.lambda);
        CHECK(lik.lambda->is_valid());

        std::vector<std::vector<double>> single(n, std::vector<double>(1));
        for (std::size_t i = 0; i < n; ++i) single[i][0] = inc[i][0];
        const auto pair_exc = make_pivot_set(single, 2);
        CHECK(est_biv_mle1(pair_exc).lambda_sq >= 0.0);
        CHECK(est_biv_var(pair_exc).lambda_sq >= 0.0);
        CHECK(est_biv_mean(pair_exc).lambda_sq >= 0.0);
    }
}
