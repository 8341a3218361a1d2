#pragma once

// Spacing among the r largest cities: the mean, over the set, of each
// city's road distance to its nearest neighbour within the set, its
// comparison/base ratio, and random-subset counterfactual bands.

#include <cstdint>
#include <string>
#include <vector>

#include "cityscale/distance_provider.hpp"
#include "cityscale/grid.hpp"

namespace cityscale {

struct CityPoint {
    int city_id = 0;
    std::string point_id;  // representative (peak) cell
    Population population = 0;
    Year year = 0;
};

/// Mean nearest-neighbour distance within `cities` (meters). Throws
/// TooFewCities below two cities and MissingDistance for unknown pairs.
double spacing_index(const std::vector<CityPoint>& cities, const DistanceProvider& distances);

/// The r most populous cities; ties go to the smaller city id.
std::vector<CityPoint> top_r_set(std::vector<CityPoint> cities, std::size_t r);

struct RankRange {
    std::size_t min = 5;
    std::size_t max = 100;
};

struct SpacingPoint {
    std::size_t r = 0;
    double d_base = 0.0;
    double d_comp = 0.0;
    double ratio = 0.0;
};

std::vector<SpacingPoint> spacing_ratio_curve(const std::vector<CityPoint>& base,
                                              const std::vector<CityPoint>& comp, RankRange ranks,
                                              const DistanceProvider& distances);

struct CounterfactualBand {
    std::size_t r = 0;
    double mean = 0.0;
    double p01 = 0.0;
    double p99 = 0.0;
    double std_dev = 0.0;  // sample standard deviation across draws
};

struct CounterfactualOptions {
    std::size_t draws = 1000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

/// For every r, `draws` uniform r-subsets of the pool; each draw's spacing
/// is divided by the observed base-year spacing of the top r. Percentiles
/// are nearest-rank. Draw k uses an RNG stream seeded from (seed, k) and
/// takes nested prefixes of one random permutation, so the result does not
/// depend on the thread count.
std::vector<CounterfactualBand> counterfactual_bands(const std::vector<CityPoint>& pool,
                                                     const std::vector<CityPoint>& base, RankRange ranks,
                                                     const CounterfactualOptions& options,
                                                     const DistanceProvider& distances);

struct SpacingResult {
    std::size_t r = 0;
    double d_base = 0.0;
    double d_comp = 0.0;
    double ratio = 0.0;
    double mc_mean = 0.0;
    double mc_p01 = 0.0;
    double mc_p99 = 0.0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
};

std::vector<SpacingResult> spacing_analysis(const std::vector<CityPoint>& base,
                                            const std::vector<CityPoint>& comp,
                                            const std::vector<CityPoint>& pool, RankRange ranks,
                                            const CounterfactualOptions& options,
                                            const DistanceProvider& distances);

}  // namespace cityscale
