#include "cityscale/city_stats.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "cityscale/error.hpp"

namespace cityscale {

double national_share(Population city_population, Population national_total) {
    if (national_total <= 0) {
        throw Error(ErrorCode::ZeroNationalTotal, fmt::format("national total {}", national_total));
    }
    if (city_population < 0 || city_population > national_total) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("city population {} outside [0, {}]", city_population, national_total));
    }
    return static_cast<double>(city_population) / static_cast<double>(national_total);
}

std::vector<CityRatioRecord> ratio_records(const std::vector<MatchedCityPair>& pairs,
                                           const std::vector<City>& base, const std::vector<City>& comp,
                                           Population base_national, Population comp_national) {
    std::map<int, const City*> base_by_id, comp_by_id;
    for (const auto& c : base) base_by_id[c.city_id] = &c;
    for (const auto& c : comp) comp_by_id[c.city_id] = &c;

    std::vector<CityRatioRecord> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        auto b = base_by_id.find(p.base_city);
        if (b == base_by_id.end()) {
            throw Error(ErrorCode::MissingCity, fmt::format("base city {}", p.base_city));
        }
        auto c = comp_by_id.find(p.comp_city);
        if (c == comp_by_id.end()) {
            throw Error(ErrorCode::MissingCity, fmt::format("comparison city {}", p.comp_city));
        }
        const City& bc = *b->second;
        const City& cc = *c->second;

        CityRatioRecord r;
        r.pair = p;
        r.base_population = bc.population;
        r.comp_population = cc.population;
        r.base_share = national_share(bc.population, base_national);
        r.comp_share = national_share(cc.population, comp_national);
        r.pop_ratio = r.comp_share / r.base_share;
        r.pop_ratio_raw = static_cast<double>(cc.population) / static_cast<double>(bc.population);
        r.area_ratio = cc.area_km2 / bc.area_km2;
        r.peak_density_ratio = cc.peak_density / bc.peak_density;
        r.mean_density_ratio = cc.mean_density / bc.mean_density;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.comp_population != b.comp_population) return a.comp_population > b.comp_population;
        return a.pair.comp_city < b.pair.comp_city;
    });
    return out;
}

PanelSummary panel_summary(const std::vector<CityRatioRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyPanel, "no ratio records");
    const auto n = static_cast<Eigen::Index>(records.size());
    Eigen::VectorXd pop(n), raw(n), area(n), peak(n), mean(n);
    double base_shares = 0, comp_shares = 0, base_pop = 0, comp_pop = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = records[static_cast<std::size_t>(i)];
        pop(i) = r.pop_ratio;
        raw(i) = r.pop_ratio_raw;
        area(i) = r.area_ratio;
        peak(i) = r.peak_density_ratio;
        mean(i) = r.mean_density_ratio;
        base_shares += r.base_share;
        comp_shares += r.comp_share;
        base_pop += static_cast<double>(r.base_population);
        comp_pop += static_cast<double>(r.comp_population);
    }
    PanelSummary s;
    s.n = records.size();
    s.pop_ratio = stats::summarize(pop);
    s.pop_ratio_raw = stats::summarize(raw);
    s.area_ratio = stats::summarize(area);
    s.peak_density_ratio = stats::summarize(peak);
    s.mean_density_ratio = stats::summarize(mean);
    s.aggregate_pop_ratio = comp_shares / base_shares;
    s.aggregate_pop_ratio_raw = comp_pop / base_pop;
    return s;
}

}  // namespace cityscale
