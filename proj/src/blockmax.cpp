#include "hrpot/blockmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hrpot/errors.hpp"
#include "hrpot/hr_model.hpp"
#include "hrpot/numerics.hpp"

namespace hrpot {

namespace {

void require_pair_columns(const SampleMatrix &m, std::size_t i, std::size_t j, const char *who) {
    if (i >= m.components() || j >= m.components() || i == j)
        throw DomainError(std::string(who) + ": bad column pair");
}

// Gumbel values from the ranks of one column.
std::vector<double> rank_gumbel(const std::vector<double> &column) {
    const std::vector<double> ranks = average_ranks(column);
    const double denom = static_cast<double>(column.size()) + 1.0;
    std::vector<double> out(column.size());
    for (std::size_t r = 0; r < out.size(); ++r)
        out[r] = -std::log(-std::log(ranks[r] / denom));
    return out;
}

} // namespace

SampleMatrix block_maxima(const SampleMatrix &data, std::size_t block_size) {
    if (block_size == 0) throw DomainError("block_maxima: block size must be positive");
    if (block_size > data.n()) throw BlockTooLarge("block_maxima: block exceeds sample size");

    const std::size_t blocks = data.n() / block_size;
    SampleMatrix out(blocks, data.components(), data.scale());
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t j = 0; j < data.components(); ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < block_size; ++r)
                best = std::max(best, data.at(b * block_size + r, j));
            out.at(b, j) = best;
        }
    return out;
}

EstimateReport est_madogram(const SampleMatrix &maxima, std::size_t i, std::size_t j) {
    require_pair_columns(maxima, i, j, "est_madogram");
    if (maxima.n() < 2) throw TooFewExceedances("est_madogram: need at least 2 blocks");

    const std::vector<double> fi = average_ranks(maxima.column(i));
    const std::vector<double> fj = average_ranks(maxima.column(j));
    const double denom = static_cast<double>(maxima.n()) + 1.0;

    double nu = 0.0;
    for (std::size_t r = 0; r < maxima.n(); ++r) nu += 0.5 * std::abs(fi[r] - fj[r]) / denom;
    nu /= static_cast<double>(maxima.n());

    const double raw_theta = (1.0 + 2.0 * nu) / (1.0 - 2.0 * nu);

    EstimateReport rep;
    rep.estimator = "mado";
    rep.count = maxima.n();
    rep.clamped = raw_theta < 1.0 || raw_theta > 2.0;
    rep.theta = std::clamp(raw_theta, 1.0, 2.0);
    if (rep.theta >= 2.0) {
        rep.lambda_sq = std::numeric_limits<double>::infinity();
    } else {
        const double lam = std_normal_quantile(0.5 * rep.theta);
        rep.lambda_sq = lam * lam;
        ParameterMatrix mirror(2);
        mirror.set(0, 1, rep.lambda_sq);
        rep.lambda = mirror;
    }
    return rep;
}

EstimateReport est_hr_blockml(const SampleMatrix &maxima, std::size_t i, std::size_t j) {
    require_pair_columns(maxima, i, j, "est_hr_blockml");
    if (maxima.n() < 2) throw TooFewExceedances("est_hr_blockml: need at least 2 blocks");

    const std::vector<double> x = rank_gumbel(maxima.column(i));
    const std::vector<double> y = rank_gumbel(maxima.column(j));

    auto objective = [&](const std::vector<double> &t) {
        const double lambda_sq = std::exp(t[0]);
        double nll = 0.0;
        for (std::size_t r = 0; r < x.size(); ++r)
            nll -= hr_logdensity_bivariate(x[r], y[r], lambda_sq);
        return nll;
    };

    OptimResult opt = nelder_mead(objective, {std::log(0.5)});

    EstimateReport rep;
    rep.estimator = "block-ml";
    rep.count = maxima.n();
    rep.lambda_sq = std::exp(opt.x[0]);
    rep.theta = extremal_coefficient(rep.lambda_sq);
    ParameterMatrix mirror(2);
    mirror.set(0, 1, rep.lambda_sq);
    rep.lambda = mirror;
    rep.iterations = opt.iterations;
    rep.evaluations = opt.evaluations;
    rep.converged = opt.converged;
    rep.objective = opt.value;
    return rep;
}

} // namespace hrpot
