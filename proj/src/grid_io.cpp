#include "cityscale/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "cityscale/error.hpp"
#include "csv.hpp"

namespace cityscale {

namespace fs = std::filesystem;

PopulationGrid load_grid(const fs::path& path, Year year, const GridSchema& schema) {
    const auto t = csv::Table::read(path);
    const auto id_col = t.column(schema.cell_id_column);
    const auto pop_col = t.column(schema.population_column);
    const auto year_col = t.column(schema.year_column);

    CellIdMapping mapping = schema.mapping;
    std::optional<std::size_t> row_col, col_col;
    if (mapping == CellIdMapping::Auto) {
        row_col = t.find_column(schema.row_column);
        col_col = t.find_column(schema.col_column);
        if (row_col && col_col) {
            mapping = CellIdMapping::Columns;
        } else if (t.rows() > 0 && !decode_row_col(t.get(0, id_col)) && decode_mesh_code(t.get(0, id_col))) {
            mapping = CellIdMapping::Mesh;
        } else {
            mapping = CellIdMapping::RowCol;
        }
    } else if (mapping == CellIdMapping::Columns) {
        row_col = t.column(schema.row_column);
        col_col = t.column(schema.col_column);
    }

    std::vector<GridCell> cells;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        if (t.get_int(r, year_col) != year) continue;
        GridCell c;
        c.cell_id = CellId(t.get(r, id_col));
        c.year = year;
        c.population = t.get_int(r, pop_col);
        if (c.population < 0) {
            throw Error(ErrorCode::NegativePopulation,
                        fmt::format("{}:{}: cell {} has population {}", t.source(), t.line_of(r),
                                    c.cell_id.value, c.population));
        }
        std::optional<GridPosition> pos;
        switch (mapping) {
            case CellIdMapping::Columns:
                pos = GridPosition{t.get_int(r, *row_col), t.get_int(r, *col_col)};
                break;
            case CellIdMapping::Mesh:
                pos = decode_mesh_code(c.cell_id.value);
                break;
            default:
                pos = decode_row_col(c.cell_id.value);
                break;
        }
        if (!pos) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("{}:{}: cannot derive row/col from cell id '{}'", t.source(),
                                    t.line_of(r), c.cell_id.value));
        }
        c.row = pos->row;
        c.col = pos->col;
        cells.push_back(std::move(c));
    }
    return PopulationGrid(year, std::move(cells), schema.area_model);
}

std::vector<Year> grid_years(const fs::path& path, const GridSchema& schema) {
    const auto t = csv::Table::read(path);
    const auto year_col = t.column(schema.year_column);
    std::set<Year> years;
    for (std::size_t r = 0; r < t.rows(); ++r) years.insert(static_cast<Year>(t.get_int(r, year_col)));
    return {years.begin(), years.end()};
}

namespace {

DistanceMatrix distance_matrix_from(const csv::Table& t, double tolerance_m) {
    const auto a_col = t.column("ID_A");
    const auto b_col = t.column("ID_B");
    const auto d_col = t.column("DIST_M");

    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = index.emplace(id, ids.size());
        if (inserted) ids.push_back(id);
        return it->second;
    };

    struct Record {
        std::size_t i, j;
        double d;
        std::size_t line;
    };
    std::vector<Record> records;
    records.reserve(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double d = t.get_double(r, d_col);
        if (d < 0 || std::isnan(d)) {
            throw Error(ErrorCode::NegativeDistance,
                        fmt::format("{}:{}: distance {} between {} and {}", t.source(), t.line_of(r),
                                    d, t.get(r, a_col), t.get(r, b_col)));
        }
        const auto i = intern(t.get(r, a_col));
        const auto j = intern(t.get(r, b_col));
        records.push_back({i, j, d, t.line_of(r)});
    }

    DistanceMatrix m(ids);
    for (const auto& rec : records) {
        if (rec.i == rec.j) continue;
        if (auto prev = m.at(rec.i, rec.j)) {
            if (std::abs(*prev - rec.d) > tolerance_m) {
                throw Error(ErrorCode::AsymmetricConflict,
                            fmt::format("{}:{}: d({}, {}) = {} conflicts with {}", t.source(), rec.line,
                                        ids[rec.i], ids[rec.j], rec.d, *prev));
            }
            continue;
        }
        m.set(rec.i, rec.j, rec.d);
    }
    return m;
}

}  // namespace

DistanceMatrix load_distance_matrix(const fs::path& path, double tolerance_m) {
    return distance_matrix_from(csv::Table::read(path), tolerance_m);
}

DistanceMatrix parse_distance_matrix(const std::string& text, double tolerance_m) {
    return distance_matrix_from(csv::Table::parse(text), tolerance_m);
}

void write_distance_matrix(const DistanceMatrix& m, const fs::path& path) {
    csv::Writer w(path, {"ID_A", "ID_B", "DIST_M"});
    const auto& ids = m.point_ids();
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (auto d = m.at(i, j)) {
                w.field(ids[i]).field(ids[j]).field(*d);
                w.end_row();
            }
        }
    }
    w.close();
}

void write_city_table(const std::vector<City>& cities, Population national_total, const fs::path& path) {
    YearCities y;
    y.year = cities.empty() ? 0 : cities.front().year;
    y.national_total = national_total;
    y.cities = cities;
    if (national_total <= 0) {
        throw Error(ErrorCode::ZeroNationalTotal, "national total must be positive");
    }
    write_city_table(std::vector<YearCities>{std::move(y)}, path);
}

void write_city_table(const std::vector<YearCities>& years, const fs::path& path) {
    for (const auto& y : years) {
        if (y.national_total <= 0 && !y.cities.empty()) {
            throw Error(ErrorCode::ZeroNationalTotal,
                        fmt::format("national total for {} must be positive", y.year));
        }
    }
    csv::Writer w(path, {"CITY", "POP", "NORM_POP", "YEAR"});
    for (const auto& y : years) {
        for (const auto& c : y.cities) {
            w.field(c.city_id)
                .field(c.population)
                .field(static_cast<double>(c.population) / static_cast<double>(y.national_total))
                .field(c.year);
            w.end_row();
        }
    }
    w.close();
}

std::vector<CityTableRow> read_city_table(const fs::path& path) {
    const auto t = csv::Table::read(path);
    const auto c_city = t.column("CITY"), c_pop = t.column("POP"), c_norm = t.column("NORM_POP"),
               c_year = t.column("YEAR");
    std::vector<CityTableRow> out;
    out.reserve(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out.push_back({static_cast<int>(t.get_int(r, c_city)), t.get_int(r, c_pop), t.get_double(r, c_norm),
                       static_cast<Year>(t.get_int(r, c_year))});
    }
    return out;
}

void write_membership_table(const std::vector<YearCities>& years, const fs::path& path) {
    csv::Writer w(path, {"CELL_ID", "CITY", "POP", "NORM_POP", "YEAR"});
    for (const auto& y : years) {
        for (const auto& c : y.cities) {
            for (std::size_t k = 0; k < c.cell_ids.size(); ++k) {
                const double norm = y.national_total > 0
                                        ? static_cast<double>(c.cell_populations[k]) /
                                              static_cast<double>(y.national_total)
                                        : 0.0;
                w.field(c.cell_ids[k].value).field(c.city_id).field(c.cell_populations[k]).field(norm).field(c.year);
                w.end_row();
            }
        }
    }
    w.close();
}

std::vector<MembershipRow> read_membership_table(const fs::path& path) {
    const auto t = csv::Table::read(path);
    const auto c_cell = t.column("CELL_ID"), c_city = t.column("CITY"), c_pop = t.column("POP"),
               c_norm = t.column("NORM_POP"), c_year = t.column("YEAR");
    std::vector<MembershipRow> out;
    out.reserve(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out.push_back({CellId(t.get(r, c_cell)), static_cast<int>(t.get_int(r, c_city)), t.get_int(r, c_pop),
                       t.get_double(r, c_norm), static_cast<Year>(t.get_int(r, c_year))});
    }
    return out;
}

void write_city_detail(const std::vector<YearCities>& years, const fs::path& path) {
    csv::Writer w(path, {"CITY", "YEAR", "POP", "AREA_KM2", "N_CELLS", "PEAK_CELL", "PEAK_DENSITY",
                         "MEAN_DENSITY", "PEAK_LAT", "PEAK_LON"});
    for (const auto& y : years) {
        for (const auto& c : y.cities) {
            w.field(c.city_id)
                .field(c.year)
                .field(c.population)
                .field(c.area_km2)
                .field(static_cast<std::int64_t>(c.cell_count()))
                .field(c.peak_cell.value)
                .field(c.peak_density)
                .field(c.mean_density)
                .field(c.peak_location.lat)
                .field(c.peak_location.lon);
            w.end_row();
        }
    }
    w.close();
}

void write_national_totals(const std::vector<YearCities>& years, const fs::path& path) {
    csv::Writer w(path, {"YEAR", "NATIONAL_POP"});
    for (const auto& y : years) {
        w.field(y.year).field(y.national_total);
        w.end_row();
    }
    w.close();
}

std::map<Year, Population> read_national_totals(const fs::path& path) {
    const auto t = csv::Table::read(path);
    const auto c_year = t.column("YEAR"), c_pop = t.column("NATIONAL_POP");
    std::map<Year, Population> out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out[static_cast<Year>(t.get_int(r, c_year))] = t.get_int(r, c_pop);
    }
    return out;
}

std::vector<YearCities> read_cities(const fs::path& detail, const fs::path& membership,
                                    const fs::path& national) {
    const auto totals = read_national_totals(national);
    std::map<Year, YearCities> by_year;
    for (const auto& [year, total] : totals) by_year[year] = YearCities{year, total, {}};

    const auto t = csv::Table::read(detail);
    const auto c_city = t.column("CITY"), c_year = t.column("YEAR"), c_pop = t.column("POP"),
               c_area = t.column("AREA_KM2"), c_peak = t.column("PEAK_CELL"),
               c_pd = t.column("PEAK_DENSITY"), c_md = t.column("MEAN_DENSITY"),
               c_lat = t.column("PEAK_LAT"), c_lon = t.column("PEAK_LON");
    std::map<std::pair<Year, int>, City> cities;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        City c;
        c.city_id = static_cast<int>(t.get_int(r, c_city));
        c.year = static_cast<Year>(t.get_int(r, c_year));
        c.population = t.get_int(r, c_pop);
        c.area_km2 = t.get_double(r, c_area);
        c.peak_cell = CellId(t.get(r, c_peak));
        c.peak_density = t.get_double(r, c_pd);
        c.mean_density = t.get_double(r, c_md);
        c.peak_location = {t.get_double(r, c_lat), t.get_double(r, c_lon)};
        if (!cities.emplace(std::pair{c.year, c.city_id}, std::move(c)).second) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("{}:{}: duplicate city", t.source(), t.line_of(r)));
        }
    }

    for (auto& m : read_membership_table(membership)) {
        auto it = cities.find({m.year, m.city_id});
        if (it == cities.end()) {
            throw Error(ErrorCode::MissingCity,
                        fmt::format("membership references city {} in {} absent from detail table",
                                    m.city_id, m.year));
        }
        it->second.cell_ids.push_back(std::move(m.cell_id));
        it->second.cell_populations.push_back(m.population);
    }

    for (auto& [key, city] : cities) {
        std::vector<std::size_t> order(city.cell_ids.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](auto a, auto b) { return city.cell_ids[a] < city.cell_ids[b]; });
        std::vector<CellId> ids;
        std::vector<Population> pops;
        for (auto i : order) {
            ids.push_back(city.cell_ids[i]);
            pops.push_back(city.cell_populations[i]);
        }
        city.cell_ids = std::move(ids);
        city.cell_populations = std::move(pops);

        auto y = by_year.find(key.first);
        if (y == by_year.end()) {
            throw Error(ErrorCode::MissingCity,
                        fmt::format("no national total for year {}", key.first));
        }
        y->second.cities.push_back(std::move(city));
    }

    std::vector<YearCities> out;
    for (auto& [year, yc] : by_year) out.push_back(std::move(yc));
    return out;
}

void write_points(const std::vector<NamedPoint>& points, const fs::path& path) {
    csv::Writer w(path, {"CELL_ID", "LAT", "LON"});
    for (const auto& p : points) {
        w.field(p.id);
        if (p.location) {
            w.field(p.location->lat).field(p.location->lon);
        } else {
            w.field(std::string_view{}).field(std::string_view{});
        }
        w.end_row();
    }
    w.close();
}

std::vector<NamedPoint> read_points(const fs::path& path) {
    const auto t = csv::Table::read(path);
    auto c_id = t.find_column("CELL_ID");
    if (!c_id) c_id = t.column("ID");
    const auto c_lat = t.find_column("LAT"), c_lon = t.find_column("LON");
    std::vector<NamedPoint> out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        NamedPoint p{t.get(r, *c_id), std::nullopt};
        if (c_lat && c_lon && !t.get(r, *c_lat).empty() && !t.get(r, *c_lon).empty()) {
            p.location = LatLon{t.get_double(r, *c_lat), t.get_double(r, *c_lon)};
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace cityscale
