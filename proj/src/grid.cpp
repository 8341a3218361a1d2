#include "cityscale/grid.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cityscale/error.hpp"

namespace cityscale {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

bool parse_i64(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

LatLon GridGeometry::cell_center(std::int64_t row, std::int64_t col) const {
    return {origin_lat_deg + (static_cast<double>(row) + 0.5) * cell_lat_deg,
            origin_lon_deg + (static_cast<double>(col) + 0.5) * cell_lon_deg};
}

double CellAreaModel::area_km2(std::int64_t row) const {
    if (kind == AreaModelKind::Unit) return 1.0;
    const double south = deg2rad(geometry.origin_lat_deg + static_cast<double>(row) * geometry.cell_lat_deg);
    const double north = deg2rad(geometry.origin_lat_deg + static_cast<double>(row + 1) * geometry.cell_lat_deg);
    return kEarthRadiusKm * kEarthRadiusKm * deg2rad(geometry.cell_lon_deg) *
           std::abs(std::sin(north) - std::sin(south));
}

std::optional<GridPosition> decode_mesh_code(const std::string& code) {
    if (code.size() != 8) return std::nullopt;
    for (char c : code) {
        if (c < '0' || c > '9') return std::nullopt;
    }
    auto d = [&](std::size_t i) { return static_cast<std::int64_t>(code[i] - '0'); };
    const std::int64_t pp = d(0) * 10 + d(1);
    const std::int64_t uu = d(2) * 10 + d(3);
    const std::int64_t q = d(4), v = d(5), r = d(6), w = d(7);
    if (q > 7 || v > 7) return std::nullopt;
    return GridPosition{pp * 80 + q * 10 + r, uu * 80 + v * 10 + w};
}

std::string encode_mesh_code(GridPosition pos) {
    if (pos.row < 0 || pos.col < 0 || pos.row >= 100 * 80 || pos.col >= 100 * 80) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("position ({}, {}) outside mesh code range", pos.row, pos.col));
    }
    const auto pp = pos.row / 80, q = (pos.row % 80) / 10, r = pos.row % 10;
    const auto uu = pos.col / 80, v = (pos.col % 80) / 10, w = pos.col % 10;
    return fmt::format("{:02d}{:02d}{}{}{}{}", pp, uu, q, v, r, w);
}

std::optional<GridPosition> decode_row_col(const std::string& code) {
    auto sep = code.find('_', 1);
    if (sep == std::string::npos) return std::nullopt;
    GridPosition p;
    if (!parse_i64(std::string_view(code).substr(0, sep), p.row)) return std::nullopt;
    if (!parse_i64(std::string_view(code).substr(sep + 1), p.col)) return std::nullopt;
    return p;
}

std::string encode_row_col(GridPosition pos) { return fmt::format("{}_{}", pos.row, pos.col); }

std::uint64_t pack_position(GridPosition pos) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(pos.row)) << 32) |
           static_cast<std::uint32_t>(pos.col);
}

PopulationGrid::PopulationGrid(Year year, std::vector<GridCell> cells, CellAreaModel area_model)
    : year_(year), cells_(std::move(cells)), area_model_(area_model) {
    by_id_.reserve(cells_.size());
    by_pos_.reserve(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const GridCell& c = cells_[i];
        if (c.year != year_) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("cell {} has year {}, grid year is {}", c.cell_id.value, c.year, year_));
        }
        if (c.population < 0) {
            throw Error(ErrorCode::NegativePopulation,
                        fmt::format("cell {} has population {}", c.cell_id.value, c.population));
        }
        if (!by_id_.emplace(c.cell_id.value, i).second) {
            throw Error(ErrorCode::DuplicateCell, fmt::format("cell {} appears twice", c.cell_id.value));
        }
        if (!by_pos_.emplace(pack_position(c.position()), i).second) {
            throw Error(ErrorCode::DuplicateCell,
                        fmt::format("cell {} repeats position ({}, {})", c.cell_id.value, c.row, c.col));
        }
        total_ += c.population;
    }
}

const GridCell* PopulationGrid::find(const CellId& id) const {
    auto it = by_id_.find(id.value);
    return it == by_id_.end() ? nullptr : &cells_[it->second];
}

const GridCell* PopulationGrid::find(GridPosition pos) const {
    auto i = index_of(pos);
    return i ? &cells_[*i] : nullptr;
}

std::optional<std::size_t> PopulationGrid::index_of(GridPosition pos) const {
    auto it = by_pos_.find(pack_position(pos));
    if (it == by_pos_.end()) return std::nullopt;
    return it->second;
}

}  // namespace cityscale
