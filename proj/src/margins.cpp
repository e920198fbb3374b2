#include "hrpot/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hrpot {

std::vector<double> SampleMatrix::column(std::size_t j) const {
    if (j >= c_) throw DomainError("SampleMatrix::column: index out of range");
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = at(i, j);
    return out;
}

SampleMatrix select_components(const SampleMatrix &data, const std::vector<std::size_t> &keep) {
    SampleMatrix out(data.n(), keep.size(), data.scale());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        if (keep[j] >= data.components()) {
            throw DomainError("select_components: index out of range");
        }
        for (std::size_t i = 0; i < data.n(); ++i) out.at(i, j) = data.at(i, keep[j]);
    }
    return out;
}

double ThresholdSpec::resolve(std::size_t n) const {
    double level = q;
    if (count) {
        if (*count == 0 || *count >= n) {
            throw DomainError("ThresholdSpec: exceedance count must lie in (0, n)");
        }
        level = 1.0 - static_cast<double>(*count) / static_cast<double>(n);
    }
    if (!(level > 0.0) || !(level < 1.0)) {
        throw DomainError("ThresholdSpec: quantile level must lie in (0,1)");
    }
    return level;
}

std::vector<double> average_ranks(const std::vector<double> &values) {
    const std::size_t n = values.size();
    if (n == 0) throw DomainError("average_ranks: empty column");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (values[order.front()] == values[order.back()]) {
        throw DegenerateColumn("average_ranks: column is constant");
    }
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Ties share the average of the ranks they would occupy.
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

SampleMatrix empirical_standardize(const SampleMatrix &data, MarginScale target) {
    if (target != MarginScale::exponential && target != MarginScale::frechet) {
        throw DomainError("empirical_standardize: target must be exponential or frechet");
    }
    const std::size_t n = data.n();
    SampleMatrix out(n, data.components(), target);
    for (std::size_t j = 0; j < data.components(); ++j) {
        const std::vector<double> ranks = average_ranks(data.column(j));
        for (std::size_t i = 0; i < n; ++i) {
            const double u = ranks[i] / static_cast<double>(n + 1);
            const double e = -std::log1p(-u);
            out.at(i, j) = (target == MarginScale::exponential) ? e : std::exp(e);
        }
    }
    return out;
}

namespace {

double gumbel_to_exponential_value(double x) {
    // -log(1 - exp(-exp(-x))), stable in both tails.
    const double t = std::exp(-x);
    return -std::log(-std::expm1(-t));
}

} // namespace

SampleMatrix convert_margins(const SampleMatrix &data, MarginScale target) {
    if (data.scale() == MarginScale::raw || target == MarginScale::raw) {
        throw DomainError("convert_margins: raw data has no known distribution");
    }
    if (data.scale() == target) return data;

    SampleMatrix out(data.n(), data.components(), target);
    auto apply = [&](auto &&f) {
        for (std::size_t i = 0; i < data.n(); ++i)
            for (std::size_t j = 0; j < data.components(); ++j) out.at(i, j) = f(data.at(i, j));
    };
    if (data.scale() == MarginScale::gumbel && target == MarginScale::exponential) {
        apply(gumbel_to_exponential_value);
    } else if (data.scale() == MarginScale::gumbel && target == MarginScale::frechet) {
        apply([](double x) { return std::exp(gumbel_to_exponential_value(x)); });
    } else if (data.scale() == MarginScale::exponential && target == MarginScale::frechet) {
        apply([](double x) { return std::exp(x); });
    } else if (data.scale() == MarginScale::frechet && target == MarginScale::exponential) {
        apply([](double x) {
            if (!(x > 0.0)) throw DomainError("convert_margins: frechet data must be positive");
            return std::log(x);
        });
    } else {
        throw DomainError("convert_margins: unsupported conversion");
    }
    return out;
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DomainError("empirical_quantile: empty sample");
    if (!(q > 0.0) || !(q < 1.0)) throw DomainError("empirical_quantile: q outside (0,1)");
    const std::size_t n = values.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    if (rank > n) rank = n;
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

namespace {

void require_scale(const SampleMatrix &data, MarginScale scale, const char *where) {
    if (data.scale() != scale) {
        throw DomainError(std::string(where) + ": data is on the wrong margin scale");
    }
}

void require_min_count(std::size_t got, std::size_t min_count, const char *where) {
    if (got < min_count) {
        throw TooFewExceedances(std::string(where) + ": only " + std::to_string(got) +
                                " exceedances, need at least " + std::to_string(min_count));
    }
}

} // namespace

ExceedanceSet select_exceedances_component(const SampleMatrix &data, std::size_t pivot,
                                           const ThresholdSpec &spec) {
    require_scale(data, MarginScale::exponential, "select_exceedances_component");
    if (pivot >= data.components()) {
        throw DomainError("select_exceedances_component: pivot out of range");
    }
    if (data.components() < 2) {
        throw DomainError("select_exceedances_component: need at least two components");
    }
    ExceedanceSet out;
    out.region = ExtremalRegion::component_pivot;
    out.pivot = pivot;
    out.components = data.components();
    out.sample_size = data.n();
    out.q = spec.resolve(data.n());
    out.threshold = empirical_quantile(data.column(pivot), out.q);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double base = data.at(i, pivot);
        if (base > out.threshold) {
            out.indices.push_back(i);
            std::vector<double> inc;
            inc.reserve(data.components() - 1);
            for (std::size_t j = 0; j < data.components(); ++j) {
                if (j != pivot) inc.push_back(data.at(i, j) - base);
            }
            out.increments.push_back(std::move(inc));
        }
    }
    require_min_count(out.size(), spec.min_count, "select_exceedances_component");
    return out;
}

ExceedanceSet select_exceedances_union(const SampleMatrix &data, const ThresholdSpec &spec) {
    require_scale(data, MarginScale::exponential, "select_exceedances_union");
    if (data.components() != 2) {
        throw DomainError("select_exceedances_union: defined for exactly two components");
    }
    ExceedanceSet out;
    out.region = ExtremalRegion::union_pair;
    out.components = 2;
    out.sample_size = data.n();
    out.q = spec.resolve(data.n());
    const double u0 = empirical_quantile(data.column(0), out.q);
    const double u1 = empirical_quantile(data.column(1), out.q);
    out.threshold = u0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double x0 = data.at(i, 0);
        const double x1 = data.at(i, 1);
        if (x0 > u0) ++out.marginal_count;
        if (x0 > u0 || x1 > u1) {
            out.indices.push_back(i);
            out.increments.push_back({x1 - x0});
        }
    }
    require_min_count(out.size(), spec.min_count, "select_exceedances_union");
    return out;
}

ExceedanceSet select_exceedances_sum(const SampleMatrix &data, const ThresholdSpec &spec) {
    require_scale(data, MarginScale::frechet, "select_exceedances_sum");
    if (data.components() < 2) {
        throw DomainError("select_exceedances_sum: need at least two components");
    }
    ExceedanceSet out;
    out.region = ExtremalRegion::sum_radius;
    out.components = data.components();
    out.sample_size = data.n();
    out.q = spec.resolve(data.n());
    std::vector<double> sums(data.n(), 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < data.components(); ++j) s += data.at(i, j);
        sums[i] = s;
    }
    out.threshold = empirical_quantile(sums, out.q);
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (sums[i] > out.threshold) {
            std::vector<double> w(data.components());
            for (std::size_t j = 0; j < data.components(); ++j) {
                const double v = data.at(i, j);
                if (!(v >= 0.0)) {
                    throw DomainError("select_exceedances_sum: negative coordinate; "
                                      "data is not on the frechet scale");
                }
                w[j] = v / sums[i];
            }
            out.indices.push_back(i);
            out.radii.push_back(sums[i]);
            out.angles.push_back(std::move(w));
        }
    }
    require_min_count(out.size(), spec.min_count, "select_exceedances_sum");
    return out;
}

} // namespace hrpot
