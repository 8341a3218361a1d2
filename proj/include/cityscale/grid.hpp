#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cityscale {

/// Opaque cell identifier. Ordered lexicographically; for fixed-width codes
/// (e.g. 8-digit grid-square mesh codes) this coincides with numeric order.
struct CellId {
    std::string value;

    CellId() = default;
    CellId(std::string v) : value(std::move(v)) {}
    CellId(const char* v) : value(v) {}

    auto operator<=>(const CellId&) const = default;
    bool operator==(const CellId&) const = default;
};

using Population = std::int64_t;
using Year = int;

struct GridPosition {
    std::int64_t row = 0;
    std::int64_t col = 0;

    auto operator<=>(const GridPosition&) const = default;
    bool operator==(const GridPosition&) const = default;
};

struct GridCell {
    CellId cell_id;
    std::int64_t row = 0;
    std::int64_t col = 0;
    Population population = 0;
    Year year = 0;

    GridPosition position() const { return {row, col}; }
};

struct LatLon {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
};

/// Maps integer (row, col) onto the globe. Rows grow northwards, columns
/// eastwards. Defaults describe the 30"-by-45" third-level standard mesh.
struct GridGeometry {
    double origin_lat_deg = 0.0;
    double origin_lon_deg = 100.0;
    double cell_lat_deg = 30.0 / 3600.0;
    double cell_lon_deg = 45.0 / 3600.0;

    LatLon cell_center(std::int64_t row, std::int64_t col) const;
};

enum class AreaModelKind { Unit, Latitude };

/// Unit: every cell is exactly 1 km^2, so population equals density.
/// Latitude: exact spherical area of the cell's lat/lon rectangle.
struct CellAreaModel {
    AreaModelKind kind = AreaModelKind::Unit;
    GridGeometry geometry{};

    double area_km2(std::int64_t row) const;
};

// Standard grid-square (JIS X 0410) third-level mesh codes, "ppuuqvrw".
std::optional<GridPosition> decode_mesh_code(const std::string& code);
std::string encode_mesh_code(GridPosition pos);

// "row_col" mapping, e.g. "12_40".
std::optional<GridPosition> decode_row_col(const std::string& code);
std::string encode_row_col(GridPosition pos);

class PopulationGrid {
public:
    PopulationGrid() = default;

    /// Validates invariants: shared year, unique ids and positions, populations >= 0.
    PopulationGrid(Year year, std::vector<GridCell> cells, CellAreaModel area_model = {});

    Year year() const { return year_; }
    const std::vector<GridCell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    Population total_population() const { return total_; }
    const CellAreaModel& area_model() const { return area_model_; }

    double area_km2(const GridCell& cell) const { return area_model_.area_km2(cell.row); }
    double density(const GridCell& cell) const {
        return static_cast<double>(cell.population) / area_km2(cell);
    }
    LatLon center(const GridCell& cell) const {
        return area_model_.geometry.cell_center(cell.row, cell.col);
    }

    const GridCell* find(const CellId& id) const;
    const GridCell* find(GridPosition pos) const;
    std::optional<std::size_t> index_of(GridPosition pos) const;

private:
    Year year_ = 0;
    std::vector<GridCell> cells_;
    CellAreaModel area_model_;
    Population total_ = 0;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::uint64_t, std::size_t> by_pos_;
};

std::uint64_t pack_position(GridPosition pos);

}  // namespace cityscale

template <>
struct std::hash<cityscale::CellId> {
    std::size_t operator()(const cityscale::CellId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
