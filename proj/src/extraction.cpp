#include "cityscale/extraction.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "cityscale/error.hpp"

namespace cityscale {

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

struct Offset {
    std::int64_t dr, dc;
};

// Forward half of the neighbourhood; each adjacent pair is visited once.
constexpr std::array<Offset, 2> kForward4{{{0, 1}, {1, 0}}};
constexpr std::array<Offset, 4> kForward8{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

}  // namespace

std::vector<City> extract_cities(const PopulationGrid& grid, const ExtractionConfig& config) {
    if (!(config.density_threshold > 0) || !(config.population_threshold > 0)) {
        throw Error(ErrorCode::InvalidArgument, "extraction thresholds must be positive");
    }
    const auto& cells = grid.cells();

    // Dense cells, addressed by position.
    std::vector<std::size_t> dense;
    std::unordered_map<std::uint64_t, std::size_t> slot;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (grid.density(cells[i]) >= config.density_threshold) {
            slot.emplace(pack_position(cells[i].position()), dense.size());
            dense.push_back(i);
        }
    }

    DisjointSet sets(dense.size());
    auto link = [&](const auto& offsets) {
        for (std::size_t k = 0; k < dense.size(); ++k) {
            const GridCell& c = cells[dense[k]];
            for (const auto& o : offsets) {
                auto it = slot.find(pack_position({c.row + o.dr, c.col + o.dc}));
                if (it != slot.end()) sets.unite(k, it->second);
            }
        }
    };
    if (config.connectivity == Connectivity::Eight) {
        link(kForward8);
    } else {
        link(kForward4);
    }

    std::unordered_map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t k = 0; k < dense.size(); ++k) components[sets.find(k)].push_back(dense[k]);

    std::vector<City> cities;
    for (auto& [root, members] : components) {
        Population pop = 0;
        for (auto i : members) pop += cells[i].population;
        if (static_cast<double>(pop) < config.population_threshold) continue;

        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return cells[a].cell_id < cells[b].cell_id; });

        City city;
        city.year = grid.year();
        city.population = pop;
        city.cell_ids.reserve(members.size());
        city.cell_populations.reserve(members.size());
        const GridCell* peak = nullptr;
        double peak_density = -1.0;
        for (auto i : members) {
            const GridCell& c = cells[i];
            city.cell_ids.push_back(c.cell_id);
            city.cell_populations.push_back(c.population);
            city.area_km2 += grid.area_km2(c);
            // Members are in ascending id order, so strict > keeps the smallest id on ties.
            const double d = grid.density(c);
            if (d > peak_density) {
                peak_density = d;
                peak = &c;
            }
        }
        city.peak_cell = peak->cell_id;
        city.peak_density = peak_density;
        city.mean_density = static_cast<double>(pop) / city.area_km2;
        city.peak_location = grid.center(*peak);
        cities.push_back(std::move(city));
    }

    std::sort(cities.begin(), cities.end(), [](const City& a, const City& b) {
        if (a.population != b.population) return a.population > b.population;
        return a.peak_cell < b.peak_cell;
    });
    for (std::size_t i = 0; i < cities.size(); ++i) cities[i].city_id = static_cast<int>(i + 1);
    return cities;
}

CellId peak_cell_of(const City& city, const PopulationGrid& grid) {
    if (city.cell_ids.empty()) {
        throw Error(ErrorCode::EmptyCity, fmt::format("city {} has no cells", city.city_id));
    }
    const GridCell* best = nullptr;
    double best_density = 0.0;
    for (const auto& id : city.cell_ids) {
        const GridCell* c = grid.find(id);
        if (c == nullptr) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("city {} member {} not in grid", city.city_id, id.value));
        }
        const double d = grid.density(*c);
        if (best == nullptr || d > best_density || (d == best_density && c->cell_id < best->cell_id)) {
            best = c;
            best_density = d;
        }
    }
    return best->cell_id;
}

}  // namespace cityscale
