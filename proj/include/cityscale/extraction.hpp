#pragma once

#include <vector>

#include "cityscale/grid.hpp"

namespace cityscale {

enum class Connectivity { Four = 4, Eight = 8 };

struct ExtractionConfig {
    double density_threshold = 1000.0;    // people / km^2, inclusive
    double population_threshold = 10000.0;  // people, inclusive
    Connectivity connectivity = Connectivity::Four;
};

/// One extracted city. `cell_ids` is sorted; `cell_populations` follows the
/// same order.
struct City {
    int city_id = 0;
    Year year = 0;
    std::vector<CellId> cell_ids;
    std::vector<Population> cell_populations;
    Population population = 0;
    double area_km2 = 0.0;
    CellId peak_cell;
    double peak_density = 0.0;
    double mean_density = 0.0;
    LatLon peak_location;

    std::size_t cell_count() const { return cell_ids.size(); }
};

/// Cities of one census year together with that year's national total.
struct YearCities {
    Year year = 0;
    Population national_total = 0;
    std::vector<City> cities;
};

/// Maximal connected components of cells with density >= density_threshold
/// whose population reaches population_threshold. Output is sorted by
/// descending population (ties: smaller peak cell id); city_id is the
/// 1-based rank in that order.
std::vector<City> extract_cities(const PopulationGrid& grid, const ExtractionConfig& config = {});

/// Member cell with the highest density; ties go to the smaller cell id.
/// Throws EmptyCity for a city without members and InvalidArgument when a
/// member is not in the grid.
CellId peak_cell_of(const City& city, const PopulationGrid& grid);

}  // namespace cityscale
