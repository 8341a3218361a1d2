#include "cityscale/spacing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "cityscale/error.hpp"
#include "cityscale/statistics.hpp"
#include "parallel.hpp"

namespace cityscale {

namespace {

[[noreturn]] void missing(const std::string& a, const std::string& b) {
    throw Error(ErrorCode::MissingDistance, fmt::format("no distance between {} and {}", a, b));
}

void check_ranks(RankRange ranks) {
    if (ranks.min < 2) throw Error(ErrorCode::TooFewCities, fmt::format("r_min = {}", ranks.min));
    if (ranks.max < ranks.min) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("r_max {} below r_min {}", ranks.max, ranks.min));
    }
}

std::vector<std::string> point_ids(const std::vector<CityPoint>& cities) {
    std::vector<std::string> ids;
    ids.reserve(cities.size());
    for (const auto& c : cities) ids.push_back(c.point_id);
    return ids;
}

// Unbiased integer in [0, n).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % n;
    }
}

}  // namespace

double spacing_index(const std::vector<CityPoint>& cities, const DistanceProvider& distances) {
    if (cities.size() < 2) throw Error(ErrorCode::TooFewCities, fmt::format("{} cities", cities.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < cities.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cities.size(); ++j) {
            if (i == j) continue;
            auto d = distances.distance(cities[i].point_id, cities[j].point_id);
            if (!d) missing(cities[i].point_id, cities[j].point_id);
            nearest = std::min(nearest, *d);
        }
        total += nearest;
    }
    return total / static_cast<double>(cities.size());
}

std::vector<CityPoint> top_r_set(std::vector<CityPoint> cities, std::size_t r) {
    if (r > cities.size()) {
        throw Error(ErrorCode::RankExceedsCount, fmt::format("r = {} exceeds {} cities", r, cities.size()));
    }
    std::sort(cities.begin(), cities.end(), [](const CityPoint& a, const CityPoint& b) {
        if (a.population != b.population) return a.population > b.population;
        return a.city_id < b.city_id;
    });
    cities.resize(r);
    return cities;
}

std::vector<SpacingPoint> spacing_ratio_curve(const std::vector<CityPoint>& base,
                                              const std::vector<CityPoint>& comp, RankRange ranks,
                                              const DistanceProvider& distances) {
    check_ranks(ranks);
    const auto base_sorted = top_r_set(base, ranks.max);
    const auto comp_sorted = top_r_set(comp, ranks.max);
    std::vector<SpacingPoint> out;
    for (std::size_t r = ranks.min; r <= ranks.max; ++r) {
        SpacingPoint p;
        p.r = r;
        p.d_base = spacing_index({base_sorted.begin(), base_sorted.begin() + static_cast<std::ptrdiff_t>(r)}, distances);
        p.d_comp = spacing_index({comp_sorted.begin(), comp_sorted.begin() + static_cast<std::ptrdiff_t>(r)}, distances);
        if (!(p.d_base > 0)) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("base-year spacing is zero at r = {}", r));
        }
        p.ratio = p.d_comp / p.d_base;
        out.push_back(p);
    }
    return out;
}

std::vector<CounterfactualBand> counterfactual_bands(const std::vector<CityPoint>& pool,
                                                     const std::vector<CityPoint>& base, RankRange ranks,
                                                     const CounterfactualOptions& options,
                                                     const DistanceProvider& distances) {
    check_ranks(ranks);
    if (pool.size() < ranks.max) {
        throw Error(ErrorCode::PoolTooSmall, fmt::format("pool of {} cities, r_max = {}", pool.size(), ranks.max));
    }
    if (options.draws < 1) throw Error(ErrorCode::InvalidArgument, "draws must be at least 1");

    // Observed base-year denominators.
    const auto base_sorted = top_r_set(base, ranks.max);
    const std::size_t n_ranks = ranks.max - ranks.min + 1;
    std::vector<double> denominators(n_ranks);
    for (std::size_t k = 0; k < n_ranks; ++k) {
        const std::size_t r = ranks.min + k;
        denominators[k] =
            spacing_index({base_sorted.begin(), base_sorted.begin() + static_cast<std::ptrdiff_t>(r)}, distances);
        if (!(denominators[k] > 0)) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("base-year spacing is zero at r = {}", r));
        }
    }

    const auto ids = point_ids(pool);
    const Eigen::MatrixXd d = distances.materialize(ids);
    const std::size_t n = pool.size();

    // samples(k, draw) = spacing ratio for r = ranks.min + k
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(n_ranks), static_cast<Eigen::Index>(options.draws));
    detail::parallel_for(options.draws, options.threads, [&](std::size_t draw) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
        std::mt19937_64 rng(seq);

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::vector<double> nearest(ranks.max, std::numeric_limits<double>::infinity());
        for (std::size_t m = 0; m < ranks.max; ++m) {
            // Partial Fisher-Yates: position m receives a uniform pick from the rest.
            const auto pick = m + static_cast<std::size_t>(bounded(rng, n - m));
            std::swap(order[m], order[pick]);
            const auto newcomer = static_cast<Eigen::Index>(order[m]);
            for (std::size_t i = 0; i < m; ++i) {
                const double dij = d(static_cast<Eigen::Index>(order[i]), newcomer);
                if (std::isnan(dij)) missing(ids[order[i]], ids[order[m]]);
                nearest[i] = std::min(nearest[i], dij);
                nearest[m] = std::min(nearest[m], dij);
            }
            const std::size_t r = m + 1;
            if (r >= ranks.min) {
                double total = 0.0;
                for (std::size_t i = 0; i < r; ++i) total += nearest[i];
                const std::size_t k = r - ranks.min;
                samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(draw)) =
                    total / static_cast<double>(r) / denominators[k];
            }
        }
    });

    std::vector<CounterfactualBand> out;
    out.reserve(n_ranks);
    for (std::size_t k = 0; k < n_ranks; ++k) {
        const Eigen::VectorXd row = samples.row(static_cast<Eigen::Index>(k)).transpose();
        const auto sorted = stats::sorted_copy(row);
        CounterfactualBand b;
        b.r = ranks.min + k;
        b.mean = row.mean();
        b.p01 = stats::sorted_nearest_rank(sorted, 0.01);
        b.p99 = stats::sorted_nearest_rank(sorted, 0.99);
        b.std_dev = row.size() > 1
                        ? std::sqrt((row.array() - b.mean).square().sum() / static_cast<double>(row.size() - 1))
                        : 0.0;
        out.push_back(b);
    }
    return out;
}

std::vector<SpacingResult> spacing_analysis(const std::vector<CityPoint>& base,
                                            const std::vector<CityPoint>& comp,
                                            const std::vector<CityPoint>& pool, RankRange ranks,
                                            const CounterfactualOptions& options,
                                            const DistanceProvider& distances) {
    const auto curve = spacing_ratio_curve(base, comp, ranks, distances);
    const auto bands = counterfactual_bands(pool, base, ranks, options, distances);
    std::vector<SpacingResult> out;
    out.reserve(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        out.push_back({curve[k].r, curve[k].d_base, curve[k].d_comp, curve[k].ratio, bands[k].mean, bands[k].p01,
                       bands[k].p99, options.draws, options.seed});
    }
    return out;
}

}  // namespace cityscale
