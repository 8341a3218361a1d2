#pragma once

#include <vector>

#include "cityscale/extraction.hpp"
#include "cityscale/matching.hpp"
#include "cityscale/statistics.hpp"

namespace cityscale {

/// city_population / national_total. Throws ZeroNationalTotal when the
/// total is not positive, InvalidArgument outside 0 <= city <= total.
double national_share(Population city_population, Population national_total);

/// Comparison-year over base-year ratios for one matched pair. `pop_ratio`
/// compares national shares; the remaining ratios compare raw values.
struct CityRatioRecord {
    MatchedCityPair pair;
    double pop_ratio = 0.0;
    double pop_ratio_raw = 0.0;
    double area_ratio = 0.0;
    double peak_density_ratio = 0.0;
    double mean_density_ratio = 0.0;
    double base_share = 0.0;
    double comp_share = 0.0;
    Population base_population = 0;
    Population comp_population = 0;
};

/// Records ordered by descending comparison-year population (ties by
/// comparison city id). Throws MissingCity if a pair references an
/// unknown city.
std::vector<CityRatioRecord> ratio_records(const std::vector<MatchedCityPair>& pairs,
                                           const std::vector<City>& base, const std::vector<City>& comp,
                                           Population base_national, Population comp_national);

struct PanelSummary {
    std::size_t n = 0;
    stats::Summary<double> pop_ratio;
    stats::Summary<double> pop_ratio_raw;
    stats::Summary<double> area_ratio;
    stats::Summary<double> peak_density_ratio;
    stats::Summary<double> mean_density_ratio;
    // Ratio of aggregates: sum of comparison shares over sum of base shares.
    double aggregate_pop_ratio = 0.0;
    double aggregate_pop_ratio_raw = 0.0;
};

PanelSummary panel_summary(const std::vector<CityRatioRecord>& records);

}  // namespace cityscale
