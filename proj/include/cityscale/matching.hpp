#pragma once

#include <cstddef>
#include <vector>

#include "cityscale/extraction.hpp"

namespace cityscale {

struct MatchedCityPair {
    int base_city = 0;
    int comp_city = 0;
    std::size_t overlap_cells = 0;
    std::size_t base_size = 0;
    std::size_t comp_size = 0;

    bool operator==(const MatchedCityPair&) const = default;
};

/// Every base/comparison city pair sharing at least one cell position.
/// Splits and merges show up here as one city with several candidates.
using OverlapCandidate = MatchedCityPair;

struct MatchResult {
    std::vector<MatchedCityPair> pairs;        // mutual-best, sorted by base_city
    std::vector<OverlapCandidate> candidates;  // all nonzero overlaps, sorted by (base, comp)
};

/// Cell-overlap counts between two city sets; cell ids identify positions.
std::vector<OverlapCandidate> overlap_candidates(const std::vector<City>& base, const std::vector<City>& comp);

/// Mutual-best matching on cell overlap. A candidate ranks above another
/// when it has more shared cells, then a larger share of the smaller city,
/// then a smaller counterpart city id.
MatchResult match_cities(const std::vector<City>& base, const std::vector<City>& comp);

}  // namespace cityscale
