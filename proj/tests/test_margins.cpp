#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hrpot/margins.hpp"
#include "hrpot/numerics.hpp"
#include "test_util.hpp"

using namespace hrpot;

TEST_CASE("average ranks") {
    CHECK(average_ranks({30.0, 10.0, 20.0}) == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(average_ranks({1.0, 2.0, 2.0, 4.0}) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    CHECK(average_ranks({5.0, 5.0, 5.0, 1.0}) == std::vector<double>{3.0, 3.0, 3.0, 1.0});
    CHECK_THROWS_AS(average_ranks({2.0, 2.0, 2.0}), DegenerateColumn);
    CHECK_THROWS_AS(average_ranks({}), DomainError);
}

TEST_CASE("empirical standardization") {
    SampleMatrix data(3, 2, MarginScale::raw);
    const double col0[3] = {30.0, 10.0, 20.0};
    const double col1[3] = {-1.0, 0.0, 4.0};
    for (int i = 0; i < 3; ++i) {
        data.at(i, 0) = col0[i];
        data.at(i, 1) = col1[i];
    }

    SUBCASE("exponential scale values") {
        const SampleMatrix out = empirical_standardize(data, MarginScale::exponential);
        CHECK(out.scale() == MarginScale::exponential);
        CHECK(out.at(0, 0) == doctest::Approx(-std::log(0.25)).epsilon(1e-14));
        CHECK(out.at(1, 0) == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
        CHECK(out.at(2, 0) == doctest::Approx(-std::log(0.50)).epsilon(1e-14));
        CHECK(out.at(0, 1) == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
    }
    SUBCASE("frechet is the exponential transform exponentiated") {
        const SampleMatrix exp_out = empirical_standardize(data, MarginScale::exponential);
        const SampleMatrix fre_out = empirical_standardize(data, MarginScale::frechet);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(fre_out.at(i, j) ==
                      doctest::Approx(std::exp(exp_out.at(i, j))).epsilon(1e-14));
    }
    SUBCASE("rejects other targets and constant columns") {
        CHECK_THROWS_AS(empirical_standardize(data, MarginScale::raw), DomainError);
        SampleMatrix flat(3, 1, MarginScale::raw);
        for (int i = 0; i < 3; ++i) flat.at(i, 0) = 7.0;
        CHECK_THROWS_AS(empirical_standardize(flat, MarginScale::exponential), DegenerateColumn);
    }
    SUBCASE("output of already-exponential data is close in distribution") {
        RngStream rng(3);
        const std::size_t n = 20000;
        SampleMatrix raw(n, 1, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i) raw.at(i, 0) = rng.exponential();
        const SampleMatrix out = empirical_standardize(raw, MarginScale::exponential);
        const double d = testutil::ks_statistic(out.column(0),
                                                [](double x) { return 1.0 - std::exp(-x); });
        CHECK(d < 2.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("known margin conversions") {
    SUBCASE("gumbel to exponential is the exact integral transform") {
        SampleMatrix g(5, 1, MarginScale::gumbel);
        const double xs[5] = {-2.0, -0.3, 0.0, 1.4, 40.0};
        for (int i = 0; i < 5; ++i) g.at(i, 0) = xs[i];
        const SampleMatrix e = convert_margins(g, MarginScale::exponential);
        for (int i = 0; i < 4; ++i) {
            const double f = std::exp(-std::exp(-xs[i]));
            CHECK(e.at(i, 0) == doctest::Approx(-std::log(1.0 - f)).epsilon(1e-12));
        }
        // Far in the upper tail the transform approaches the identity.
        CHECK(e.at(4, 0) == doctest::Approx(40.0).epsilon(1e-12));
        // Monotone.
        for (int i = 1; i < 5; ++i) CHECK(e.at(i, 0) > e.at(i - 1, 0));
    }
    SUBCASE("frechet chain") {
        SampleMatrix g(2, 1, MarginScale::gumbel);
        g.at(0, 0) = 0.7;
        g.at(1, 0) = -1.1;
        const SampleMatrix f1 = convert_margins(g, MarginScale::frechet);
        const SampleMatrix f2 =
            convert_margins(convert_margins(g, MarginScale::exponential), MarginScale::frechet);
        CHECK(f1.at(0, 0) == doctest::Approx(f2.at(0, 0)).epsilon(1e-14));
        CHECK(f1.at(1, 0) == doctest::Approx(f2.at(1, 0)).epsilon(1e-14));

        const SampleMatrix back = convert_margins(f1, MarginScale::exponential);
        CHECK(back.at(0, 0) ==
              doctest::Approx(convert_margins(g, MarginScale::exponential).at(0, 0)).epsilon(1e-12));
    }
    SUBCASE("raw conversions are refused") {
        SampleMatrix r(2, 1, MarginScale::raw);
        r.at(0, 0) = 1.0;
        r.at(1, 0) = 2.0;
        CHECK_THROWS_AS(convert_margins(r, MarginScale::exponential), DomainError);
    }
    SUBCASE("exponential draws map to the gumbel law and back") {
        RngStream rng(17);
        const std::size_t n = 20000;
        SampleMatrix g(n, 1, MarginScale::gumbel);
        // Inverse transform: standard Gumbel from uniform draws.
        for (std::size_t i = 0; i < n; ++i) {
            g.at(i, 0) = -std::log(-std::log(std::max(rng.uniform01(), 1e-300)));
        }
        const SampleMatrix e = convert_margins(g, MarginScale::exponential);
        const double d = testutil::ks_statistic(e.column(0),
                                                [](double x) { return 1.0 - std::exp(-x); });
        CHECK(d < testutil::ks_critical(0.01, n));
    }
}

TEST_CASE("threshold spec resolution") {
    ThresholdSpec by_q;
    by_q.q = 0.97;
    CHECK(by_q.resolve(1000) == doctest::Approx(0.97));

    ThresholdSpec by_count;
    by_count.count = 30;
    CHECK(by_count.resolve(1000) == doctest::Approx(0.97));
    CHECK_THROWS_AS(by_count.resolve(30), DomainError);

    ThresholdSpec bad;
    bad.q = 1.0;
    CHECK_THROWS_AS(bad.resolve(100), DomainError);
}

TEST_CASE("component exceedance selection") {
    SUBCASE("hand example with strict inequality") {
        SampleMatrix data(4, 2, MarginScale::exponential);
        const double c0[4] = {1.0, 2.0, 3.0, 4.0};
        const double c1[4] = {10.0, 20.0, 30.0, 40.0};
        for (int i = 0; i < 4; ++i) {
            data.at(i, 0) = c0[i];
            data.at(i, 1) = c1[i];
        }
        ThresholdSpec spec;
        spec.q = 0.5;
        spec.min_count = 1;
        const ExceedanceSet exc = select_exceedances_component(data, 0, spec);
        CHECK(exc.threshold == doctest::Approx(2.0));
        CHECK(exc.indices == std::vector<std::size_t>{2, 3});
        REQUIRE(exc.increments.size() == 2);
        CHECK(exc.increments[0][0] == doctest::Approx(27.0));
        CHECK(exc.increments[1][0] == doctest::Approx(36.0));
    }
    SUBCASE("pivot in the middle keeps component order") {
        SampleMatrix data(2, 3, MarginScale::exponential);
        data.at(0, 0) = 1.0; data.at(0, 1) = 5.0; data.at(0, 2) = 2.0;
        data.at(1, 0) = 3.0; data.at(1, 1) = 9.0; data.at(1, 2) = 4.0;
        ThresholdSpec spec;
        spec.q = 0.5;
        spec.min_count = 1;
        const ExceedanceSet exc = select_exceedances_component(data, 1, spec);
        REQUIRE(exc.size() == 1);
        CHECK(exc.increments[0] == std::vector<double>{3.0 - 9.0, 4.0 - 9.0});
    }
    SUBCASE("rank-transformed continuous data gives a deterministic count") {
        RngStream rng(7);
        const std::size_t n = 100000;
        SampleMatrix raw(n, 2, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i) {
            raw.at(i, 0) = rng.gaussian();
            raw.at(i, 1) = rng.gaussian();
        }
        const SampleMatrix data = empirical_standardize(raw, MarginScale::exponential);
        ThresholdSpec spec;
        spec.q = 0.99;
        const ExceedanceSet exc = select_exceedances_component(data, 0, spec);
        CHECK(exc.size() == 1000);
        CHECK(exc.q == doctest::Approx(0.99));
    }
    SUBCASE("identical components give zero increments") {
        RngStream rng(9);
        const std::size_t n = 500;
        SampleMatrix raw(n, 2, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i) {
            raw.at(i, 0) = rng.gaussian();
            raw.at(i, 1) = raw.at(i, 0);
        }
        const SampleMatrix data = empirical_standardize(raw, MarginScale::exponential);
        ThresholdSpec spec;
        spec.q = 0.9;
        const ExceedanceSet exc = select_exceedances_component(data, 0, spec);
        for (const auto &inc : exc.increments) CHECK(inc[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("minimum count enforcement and scale check") {
        SampleMatrix small(20, 2, MarginScale::exponential);
        RngStream rng(1);
        for (std::size_t i = 0; i < 20; ++i) {
            small.at(i, 0) = rng.exponential();
            small.at(i, 1) = rng.exponential();
        }
        ThresholdSpec spec;
        spec.q = 0.99;
        CHECK_THROWS_AS(select_exceedances_component(small, 0, spec), TooFewExceedances);

        SampleMatrix wrong(20, 2, MarginScale::frechet);
        CHECK_THROWS_AS(select_exceedances_component(wrong, 0, spec), DomainError);
    }
}

TEST_CASE("union exceedance selection") {
    SUBCASE("hand example") {
        SampleMatrix data(4, 2, MarginScale::exponential);
        // Component 0: 1,2,3,4 ; component 1: 4,3,2,1. Levels at q=0.5 are 2
        // for both, so rows 0 (x1=4), 1 (x1=3), 2 (x0=3), 3 (x0=4) qualify.
        for (int i = 0; i < 4; ++i) {
            data.at(i, 0) = static_cast<double>(i + 1);
            data.at(i, 1) = static_cast<double>(4 - i);
        }
        ThresholdSpec spec;
        spec.q = 0.5;
        spec.min_count = 1;
        const ExceedanceSet exc = select_exceedances_union(data, spec);
        CHECK(exc.indices == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK(exc.marginal_count == 2);
        CHECK(exc.increments[0][0] == doctest::Approx(3.0));
        CHECK(exc.increments[3][0] == doctest::Approx(-3.0));
    }
    SUBCASE("independent components roughly double the count") {
        RngStream rng(21);
        const std::size_t n = 100000;
        SampleMatrix raw(n, 2, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i) {
            raw.at(i, 0) = rng.gaussian();
            raw.at(i, 1) = rng.gaussian();
        }
        const SampleMatrix data = empirical_standardize(raw, MarginScale::exponential);
        ThresholdSpec spec;
        spec.q = 0.99;
        const ExceedanceSet exc = select_exceedances_union(data, spec);
        CHECK(exc.marginal_count == 1000);
        CHECK(exc.size() >= 1950);
        CHECK(exc.size() <= 2000);
    }
    SUBCASE("fully dependent components keep the marginal count") {
        RngStream rng(22);
        const std::size_t n = 50000;
        SampleMatrix raw(n, 2, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i) {
            raw.at(i, 0) = rng.gaussian();
            raw.at(i, 1) = raw.at(i, 0) * 2.0 + 1.0;  // comonotone
        }
        const SampleMatrix data = empirical_standardize(raw, MarginScale::exponential);
        ThresholdSpec spec;
        spec.q = 0.99;
        const ExceedanceSet exc = select_exceedances_union(data, spec);
        CHECK(exc.size() == 500);
    }
    SUBCASE("needs exactly two components") {
        SampleMatrix data(100, 3, MarginScale::exponential);
        ThresholdSpec spec;
        CHECK_THROWS_AS(select_exceedances_union(data, spec), DomainError);
    }
}

TEST_CASE("sum exceedance selection") {
    SUBCASE("hand example") {
        SampleMatrix data(4, 2, MarginScale::frechet);
        const double rows[4][2] = {{1.0, 1.0}, {2.0, 6.0}, {3.0, 1.0}, {10.0, 30.0}};
        for (int i = 0; i < 4; ++i) {
            data.at(i, 0) = rows[i][0];
            data.at(i, 1) = rows[i][1];
        }
        ThresholdSpec spec;
        spec.q = 0.5;
        spec.min_count = 1;
        const ExceedanceSet exc = select_exceedances_sum(data, spec);
        CHECK(exc.indices == std::vector<std::size_t>{1, 3});
        CHECK(exc.radii[0] == doctest::Approx(8.0));
        CHECK(exc.radii[1] == doctest::Approx(40.0));
        CHECK(exc.angles[0][0] == doctest::Approx(0.25));
        CHECK(exc.angles[0][1] == doctest::Approx(0.75));
        CHECK(exc.angles[1][0] == doctest::Approx(0.25));
    }
    SUBCASE("angles live on the simplex and scaling is irrelevant") {
        RngStream rng(31);
        const std::size_t n = 5000;
        SampleMatrix raw(n, 3, MarginScale::raw);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) raw.at(i, j) = rng.gaussian();
        const SampleMatrix data = empirical_standardize(raw, MarginScale::frechet);
        ThresholdSpec spec;
        spec.q = 0.95;
        const ExceedanceSet exc = select_exceedances_sum(data, spec);
        for (const auto &w : exc.angles) {
            double s = 0.0;
            for (double v : w) {
                CHECK(v > 0.0);
                s += v;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }

        SampleMatrix scaled(n, 3, MarginScale::frechet);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) scaled.at(i, j) = 17.0 * data.at(i, j);
        const ExceedanceSet exc2 = select_exceedances_sum(scaled, spec);
        CHECK(exc2.indices == exc.indices);
        for (std::size_t i = 0; i < exc.size(); ++i)
            CHECK(exc2.angles[i][0] == doctest::Approx(exc.angles[i][0]).epsilon(1e-12));
    }
    SUBCASE("radial count matches the limit-measure rate for independent tails") {
        // For independent standard frechet coordinates the number of points
        // with coordinate sum above u is close to n * (k+1) / u.
        RngStream rng(41);
        const std::size_t n = 100000;
        SampleMatrix data(n, 3, MarginScale::frechet);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                const double u = std::max(rng.uniform01(), 1e-300);
                data.at(i, j) = -1.0 / std::log(u);
            }
        }
        ThresholdSpec spec;
        spec.count = 600;
        const ExceedanceSet exc = select_exceedances_sum(data, spec);
        CHECK(exc.size() == 600);
        const double predicted = static_cast<double>(n) * 3.0 / exc.threshold;
        CHECK(static_cast<double>(exc.size()) == doctest::Approx(predicted).epsilon(0.15));
    }
}
