#pragma once

// Readers and writers for the toolkit's CSV tables.
//
//   grid          CELL_ID, POP, YEAR [, ROW, COL]
//   city          CITY, POP, NORM_POP, YEAR
//   membership    CELL_ID, CITY, POP, NORM_POP, YEAR   (POP is the cell's population)
//   city detail   CITY, YEAR, POP, AREA_KM2, N_CELLS, PEAK_CELL, PEAK_DENSITY,
//                 MEAN_DENSITY, PEAK_LAT, PEAK_LON
//   national      YEAR, NATIONAL_POP
//   points        CELL_ID [, LAT, LON]
//   distances     ID_A, ID_B, DIST_M                   (meters)

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cityscale/distance_matrix.hpp"
#include "cityscale/extraction.hpp"
#include "cityscale/grid.hpp"

namespace cityscale {

enum class CellIdMapping {
    Auto,     // ROW/COL columns when present, else mesh codes if the first id is one, else row_col
    Columns,  // explicit ROW and COL columns
    RowCol,   // cell id "row_col"
    Mesh,     // 8-digit standard grid-square mesh code
};

struct GridSchema {
    std::string cell_id_column = "CELL_ID";
    std::string population_column = "POP";
    std::string year_column = "YEAR";
    std::string row_column = "ROW";
    std::string col_column = "COL";
    CellIdMapping mapping = CellIdMapping::Auto;
    CellAreaModel area_model{};
};

/// Rows whose YEAR differs from `year` are ignored, so one file may carry
/// several census years.
PopulationGrid load_grid(const std::filesystem::path& path, Year year, const GridSchema& schema = {});

/// Distinct years present in a grid file, ascending.
std::vector<Year> grid_years(const std::filesystem::path& path, const GridSchema& schema = {});

/// Mirrors one-directional records and forces a zero diagonal. Both
/// directions present and differing by more than `tolerance_m` is an
/// AsymmetricConflict.
DistanceMatrix load_distance_matrix(const std::filesystem::path& path, double tolerance_m = 1.0);
DistanceMatrix parse_distance_matrix(const std::string& text, double tolerance_m = 1.0);
void write_distance_matrix(const DistanceMatrix& m, const std::filesystem::path& path);

struct CityTableRow {
    int city_id = 0;
    Population population = 0;
    double norm_pop = 0.0;
    Year year = 0;
};

void write_city_table(const std::vector<City>& cities, Population national_total,
                      const std::filesystem::path& path);
void write_city_table(const std::vector<YearCities>& years, const std::filesystem::path& path);
std::vector<CityTableRow> read_city_table(const std::filesystem::path& path);

struct MembershipRow {
    CellId cell_id;
    int city_id = 0;
    Population population = 0;
    double norm_pop = 0.0;
    Year year = 0;
};

void write_membership_table(const std::vector<YearCities>& years, const std::filesystem::path& path);
std::vector<MembershipRow> read_membership_table(const std::filesystem::path& path);

void write_city_detail(const std::vector<YearCities>& years, const std::filesystem::path& path);
void write_national_totals(const std::vector<YearCities>& years, const std::filesystem::path& path);
std::map<Year, Population> read_national_totals(const std::filesystem::path& path);

/// Reassembles per-year cities from the detail, membership and national tables.
std::vector<YearCities> read_cities(const std::filesystem::path& detail,
                                    const std::filesystem::path& membership,
                                    const std::filesystem::path& national);

struct NamedPoint {
    std::string id;
    std::optional<LatLon> location;
};

void write_points(const std::vector<NamedPoint>& points, const std::filesystem::path& path);
std::vector<NamedPoint> read_points(const std::filesystem::path& path);

}  // namespace cityscale
