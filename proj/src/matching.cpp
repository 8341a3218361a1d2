#include "cityscale/matching.hpp"

#include <algorithm>
#include <unordered_map>

namespace cityscale {

namespace {

// True when `a` is a better partner than `b`; `counterpart` selects the id
// on the other side of the match.
template <typename Counterpart>
bool better(const OverlapCandidate& a, const OverlapCandidate& b, Counterpart counterpart) {
    if (a.overlap_cells != b.overlap_cells) return a.overlap_cells > b.overlap_cells;
    // Shares are compared by cross-multiplication to stay exact.
    const auto lhs = a.overlap_cells * std::min(b.base_size, b.comp_size);
    const auto rhs = b.overlap_cells * std::min(a.base_size, a.comp_size);
    if (lhs != rhs) return lhs > rhs;
    return counterpart(a) < counterpart(b);
}

}  // namespace

std::vector<OverlapCandidate> overlap_candidates(const std::vector<City>& base, const std::vector<City>& comp) {
    std::unordered_map<CellId, std::size_t> comp_of_cell;
    for (std::size_t k = 0; k < comp.size(); ++k) {
        for (const auto& id : comp[k].cell_ids) comp_of_cell.emplace(id, k);
    }

    std::vector<OverlapCandidate> out;
    for (const auto& b : base) {
        std::unordered_map<std::size_t, std::size_t> counts;
        for (const auto& id : b.cell_ids) {
            auto it = comp_of_cell.find(id);
            if (it != comp_of_cell.end()) ++counts[it->second];
        }
        for (const auto& [k, n] : counts) {
            out.push_back({b.city_id, comp[k].city_id, n, b.cell_count(), comp[k].cell_count()});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.base_city != b.base_city ? a.base_city < b.base_city : a.comp_city < b.comp_city;
    });
    return out;
}

MatchResult match_cities(const std::vector<City>& base, const std::vector<City>& comp) {
    MatchResult result;
    result.candidates = overlap_candidates(base, comp);

    std::unordered_map<int, const OverlapCandidate*> best_for_base, best_for_comp;
    for (const auto& c : result.candidates) {
        auto& b = best_for_base[c.base_city];
        if (b == nullptr || better(c, *b, [](const auto& x) { return x.comp_city; })) b = &c;
        auto& m = best_for_comp[c.comp_city];
        if (m == nullptr || better(c, *m, [](const auto& x) { return x.base_city; })) m = &c;
    }
    for (const auto& c : result.candidates) {
        if (best_for_base[c.base_city] == &c && best_for_comp[c.comp_city] == &c) {
            result.pairs.push_back(c);
        }
    }
    return result;
}

}  // namespace cityscale
