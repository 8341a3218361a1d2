// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Criteria 8-12
// read census grids from $CITYSCALE_REPLICATION_DIR and are skipped when
// it is unset or incomplete.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include <fmt/format.h>

#include "cityscale/city_stats.hpp"
#include "cityscale/distribution.hpp"
#include "cityscale/error.hpp"
#include "cityscale/extraction.hpp"
#include "cityscale/grid_io.hpp"
#include "cityscale/matching.hpp"
#include "cityscale/routing.hpp"
#include "cityscale/spacing.hpp"
#include "oracles.hpp"

using namespace cityscale;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Verdict skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

oracle::Partition partition_of(const std::vector<City>& cities) {
    oracle::Partition p;
    for (const auto& c : cities) {
        std::set<std::string> members;
        for (const auto& id : c.cell_ids) members.insert(id.value);
        p.insert(std::move(members));
    }
    return p;
}

MatrixDistanceProvider provider_of(const std::vector<std::vector<double>>& d) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < d.size(); ++i) ids.push_back(std::to_string(i));
    DistanceMatrix m(ids);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) m.set(i, j, d[i][j]);
    return MatrixDistanceProvider(std::move(m));
}

std::vector<CityPoint> points_of(std::size_t n) {
    std::vector<CityPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({static_cast<int>(i + 1), std::to_string(i), static_cast<Population>(100000 - i), 0});
    }
    return out;
}

std::vector<std::vector<double>> planar_metric(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 500000.0);
    std::vector<std::pair<double, double>> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(p[i].first - p[j].first, p[i].second - p[j].second);
    return d;
}

// ---- property suite -------------------------------------------------------

Verdict extraction_oracle() {
    std::mt19937_64 rng(20240501);
    std::size_t cities = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto raster = oracle::random_raster(rng, 50, 3000);
        const auto grid = oracle::to_grid(raster);
        for (bool eight : {false, true}) {
            ExtractionConfig cfg;
            cfg.connectivity = eight ? Connectivity::Eight : Connectivity::Four;
            const auto got = extract_cities(grid, cfg);
            cities += got.size();
            if (partition_of(got) != oracle::flood_fill_cities(raster, 1000, 10000, eight)) {
                return fail(fmt::format("grid {} ({}x{}) differs under {}-connectivity", trial, raster.rows,
                                        raster.cols, eight ? 8 : 4));
            }
        }
    }
    return pass(fmt::format("500 grids x 2 connectivities identical to flood fill ({} cities)", cities));
}

Verdict threshold_boundary() {
    auto one_cell = [](Population pop) {
        return extract_cities(PopulationGrid(2000, {{CellId("0_0"), 0, 0, pop, 2000}})).size();
    };
    const auto at = one_cell(10000), below = one_cell(9999);
    if (at == 1 && below == 0) return pass("10000 -> 1 city, 9999 -> 0 cities");
    return fail(fmt::format("10000 -> {} cities, 9999 -> {} cities", at, below));
}

Verdict spacing_exactness() {
    const auto collinear = provider_of({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}});
    const double s = spacing_index(points_of(3), collinear);
    if (s != 4.0 / 3.0) return fail(fmt::format("collinear fixture gives {:.17g}", s));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        const auto d = planar_metric(rng, n);
        const auto p = provider_of(d);
        auto pts = points_of(n);
        const double v = spacing_index(pts, p);
        double lo = INFINITY, hi = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) lo = std::min(lo, d[i][j]), hi = std::max(hi, d[i][j]);
        if (v < lo || v > hi) return fail(fmt::format("set {}: {} outside [{}, {}]", trial, v, lo, hi));
        std::shuffle(pts.begin(), pts.end(), rng);
        const double w = spacing_index(pts, p);
        if (std::abs(w - v) > 1e-12 * v) return fail(fmt::format("set {}: permutation changed {} to {}", trial, v, w));
    }
    return pass("collinear = 4/3 exactly; 200 random sets bounded and permutation-invariant");
}

Verdict counterfactual_convergence() {
    std::mt19937_64 rng(11);
    const auto d = planar_metric(rng, 6);
    const auto p = provider_of(d);
    const auto pool = points_of(6);
    const double denom = spacing_index(top_r_set(pool, 3), p);

    std::vector<double> values;
    oracle::for_each_subset(6, 3, [&](const std::vector<int>& s) { values.push_back(oracle::spacing_direct(d, s) / denom); });
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());

    const std::size_t draws = 100000;
    const CounterfactualOptions opts{draws, 42, 4};
    const auto a = counterfactual_bands(pool, pool, {3, 3}, opts, p);
    const auto b = counterfactual_bands(pool, pool, {3, 3}, opts, p);
    const auto c = counterfactual_bands(pool, pool, {3, 3}, {draws, 42, 1}, p);
    const double se = std::sqrt(var / static_cast<double>(draws));
    const double z = std::abs(a[0].mean - mean) / se;
    const bool identical = a[0].mean == b[0].mean && a[0].p01 == b[0].p01 && a[0].p99 == b[0].p99 &&
                           a[0].mean == c[0].mean && a[0].p01 == c[0].p01 && a[0].p99 == c[0].p99;
    const auto detail = fmt::format("MC mean {:.6f} vs exhaustive {:.6f} ({:.2f} SE); seeds {}", a[0].mean, mean, z,
                                    identical ? "bit-identical" : "DIFFER");
    return (z <= 3.0 && identical) ? pass(detail) : fail(detail);
}

Verdict routing_oracle() {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 49);
        auto edges = oracle::random_connected_graph(rng, n, static_cast<int>(rng() % static_cast<unsigned>(2 * n)));
        std::erase_if(edges, [](const oracle::Edge& e) { return e.a == e.b; });
        std::vector<std::pair<NodeId, LatLon>> nodes;
        for (int i = 0; i < n; ++i) nodes.push_back({i, {0.01 * i, 0.0}});
        std::vector<RoadEdge> re;
        for (const auto& e : edges) re.push_back({e.a, e.b, e.len});
        const RoadGraph g(nodes, re);
        const auto fw = oracle::floyd_warshall(n, edges);

        std::vector<std::vector<double>> d(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) {
                const auto v = shortest_path_distance(s, t, g);
                const auto su = static_cast<std::size_t>(s), tu = static_cast<std::size_t>(t);
                if (!v || *v != fw[su][tu]) {
                    return fail(fmt::format("graph {}: d({}, {}) = {} vs Floyd-Warshall {}", trial, s, t,
                                            v ? *v : -1.0, fw[su][tu]));
                }
                d[su][tu] = *v;
            }
        for (std::size_t a = 0; a < d.size(); ++a)
            for (std::size_t b = 0; b < d.size(); ++b) {
                if (d[a][b] != d[b][a]) return fail(fmt::format("graph {}: asymmetric at ({}, {})", trial, a, b));
                for (std::size_t c = 0; c < d.size(); ++c) {
                    if (d[a][c] > d[a][b] + d[b][c]) {
                        return fail(fmt::format("graph {}: triangle violated at ({}, {}, {})", trial, a, b, c));
                    }
                }
            }
    }
    return pass("200 graphs exact vs Floyd-Warshall; symmetry and triangle inequality hold");
}

Verdict kde_checks() {
    Eigen::VectorXd one(1);
    one << 0.0;
    const auto curve = gaussian_kde<double>(one, 1.0);
    double worst = 0;
    for (Eigen::Index i = 0; i < curve.grid_points.size(); ++i) {
        const double x = curve.grid_points(i);
        worst = std::max(worst, std::abs(curve.densities(i) - std::exp(-x * x / 2) / std::sqrt(2 * M_PI)));
    }
    if (curve.grid_points.size() != 512 || worst > 1e-9) {
        return fail(fmt::format("{} points, max pdf error {:.3g}", curve.grid_points.size(), worst));
    }

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> size(1, 1000);
    std::lognormal_distribution<double> draw(0.0, 1.0);
    double lo = 2, hi = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd s(size(rng));
        for (auto& v : s) v = draw(rng);
        const double integral = gaussian_kde<double>(s).integral();
        lo = std::min(lo, integral);
        hi = std::max(hi, integral);
    }
    const auto detail = fmt::format("max pdf error {:.2g}; integrals over 200 sample sets in [{:.6f}, {:.6f}]", worst, lo, hi);
    return (lo >= 0.99 && hi <= 1.0) ? pass(detail) : fail(detail);
}

Verdict ols_checks() {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coef(-5, 5), xs(-100, 100);
    std::normal_distribution<double> noise(0, 1);
    double coef_err = 0, orth = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 50;
        const double slope = coef(rng), intercept = coef(rng);
        Eigen::VectorXd x(n), y(n), yn(n);
        for (int i = 0; i < n; ++i) {
            x(i) = xs(rng);
            y(i) = slope * x(i) + intercept;
            yn(i) = y(i) + noise(rng);
        }
        const auto exact = fit_ols<double>(x, y);
        coef_err = std::max({coef_err, std::abs(exact.slope - slope), std::abs(exact.intercept - intercept)});
        if (n >= 3) {
            const auto fit = fit_ols<double>(x, yn);
            const Eigen::VectorXd res = yn.array() - (fit.slope * x.array() + fit.intercept);
            orth = std::max({orth, std::abs(res.sum()), std::abs(res.dot(x))});
        }
    }
    const auto detail = fmt::format("max coefficient error {:.2g}; max |sum e|, |sum e x| {:.2g}", coef_err, orth);
    return (coef_err <= 1e-10 && orth <= 1e-8) ? pass(detail) : fail(detail);
}

// ---- replication data -----------------------------------------------------

struct Replication {
    std::vector<fs::path> grids;
    std::optional<fs::path> distances;
};

std::optional<Replication> find_replication(std::string& why) {
    const char* env = std::getenv("CITYSCALE_REPLICATION_DIR");
    if (!env || !*env) {
        why = "CITYSCALE_REPLICATION_DIR not set";
        return std::nullopt;
    }
    const fs::path dir(env);
    if (!fs::is_directory(dir)) {
        why = fmt::format("{} is not a directory", dir.string());
        return std::nullopt;
    }
    Replication r;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("grid", 0) == 0 && e.path().extension() == ".csv") r.grids.push_back(e.path());
    }
    std::sort(r.grids.begin(), r.grids.end());
    if (r.grids.empty()) {
        why = fmt::format("no grid*.csv census grids in {}", dir.string());
        return std::nullopt;
    }
    if (fs::exists(dir / "bilateral_distances.csv")) r.distances = dir / "bilateral_distances.csv";
    return r;
}

struct YearData {
    std::vector<City> cities;
    Population national = 0;
};

YearData extract_year(const std::vector<fs::path>& grids, Year year, Connectivity conn) {
    // Each grid file may hold one or both census years.
    for (const auto& g : grids) {
        const auto years = grid_years(g);
        if (std::find(years.begin(), years.end(), year) == years.end()) continue;
        const auto grid = load_grid(g, year);
        ExtractionConfig cfg;
        cfg.connectivity = conn;
        return {extract_cities(grid, cfg), grid.total_population()};
    }
    throw Error(ErrorCode::MissingPath, fmt::format("no grid holds year {}", year));
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    int failures = 0;
    auto report = [&](int id, const char* name, const Verdict& v) {
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        if (v.outcome == Outcome::Fail) ++failures;
        std::cout << fmt::format("[{}] {:>2} {}: {}", tag, id, name, v.detail) << std::endl;
    };
    auto guarded = [](auto&& fn) -> Verdict {
        try {
            return fn();
        } catch (const std::exception& e) {
            return fail(fmt::format("exception: {}", e.what()));
        }
    };

    report(1, "extraction oracle", guarded(extraction_oracle));
    report(2, "threshold boundary", guarded(threshold_boundary));
    report(3, "spacing index", guarded(spacing_exactness));
    report(4, "counterfactual convergence", guarded(counterfactual_convergence));
    report(5, "routing oracle", guarded(routing_oracle));
    report(6, "kernel density", guarded(kde_checks));
    report(7, "least squares", guarded(ols_checks));

    std::string why;
    const auto data = find_replication(why);
    if (!data) {
        for (auto [id, name] : std::initializer_list<std::pair<int, const char*>>{
                 {8, "city counts"}, {9, "balanced panel"}, {10, "ratio means"}, {11, "spacing ratio"}, {12, "growth regression"}}) {
            report(id, name, skip(why));
        }
    } else {
        // City counts under both connectivities; later criteria use the matching one (4 if neither).
        Connectivity chosen = Connectivity::Four;
        std::map<int, YearData> base_by, comp_by;
        report(8, "city counts", guarded([&] {
                   std::string detail;
                   bool any = false;
                   for (auto conn : {Connectivity::Four, Connectivity::Eight}) {
                       base_by[static_cast<int>(conn)] = extract_year(data->grids, 1970, conn);
                       comp_by[static_cast<int>(conn)] = extract_year(data->grids, 2015, conn);
                       const auto nb = base_by[static_cast<int>(conn)].cities.size();
                       const auto nc = comp_by[static_cast<int>(conn)].cities.size();
                       const bool ok = nb == 503 && nc == 450;
                       if (ok && !any) chosen = conn;
                       any = any || ok;
                       detail += fmt::format("{}-connectivity: {} / {}{}; ", static_cast<int>(conn), nb, nc, ok ? " (match)" : "");
                   }
                   detail += "expected 503 / 450";
                   return any ? pass(detail) : fail(detail);
               }));

        const int key = static_cast<int>(chosen);
        std::vector<MatchedCityPair> pairs;
        std::vector<CityRatioRecord> records;
        report(9, "balanced panel", guarded([&] {
                   if (!base_by.count(key)) return fail("extraction failed");
                   pairs = match_cities(base_by[key].cities, comp_by[key].cities).pairs;
                   const auto n = static_cast<long>(pairs.size());
                   const auto detail = fmt::format("{} pairs under {}-connectivity (expected 302 +- 5)", n, key);
                   return std::abs(n - 302) <= 5 ? pass(detail) : fail(detail);
               }));

        report(10, "ratio means", guarded([&] {
                   if (pairs.empty()) return fail("no matched pairs");
                   records = ratio_records(pairs, base_by[key].cities, comp_by[key].cities, base_by[key].national,
                                           comp_by[key].national);
                   const auto s = panel_summary(records);
                   const bool ok = std::abs(s.pop_ratio.mean - 1.21) <= 0.03 && std::abs(s.area_ratio.mean - 2.0) <= 0.15 &&
                                   std::abs(s.peak_density_ratio.mean - 0.5) <= 0.08 &&
                                   std::abs(s.mean_density_ratio.mean - 0.65) <= 0.05;
                   const auto detail = fmt::format(
                       "pop {:.4f} (1.21+-0.03), area {:.4f} (2.0+-0.15), peak density {:.4f} (0.5+-0.08), "
                       "mean density {:.4f} (0.65+-0.05)",
                       s.pop_ratio.mean, s.area_ratio.mean, s.peak_density_ratio.mean, s.mean_density_ratio.mean);
                   return ok ? pass(detail) : fail(detail);
               }));

        report(11, "spacing ratio", guarded([&] {
                   if (!data->distances) return skip("bilateral_distances.csv not present");
                   if (!base_by.count(key)) return fail("extraction failed");
                   auto to_points = [](const std::vector<City>& cities, Year year) {
                       std::vector<CityPoint> out;
                       for (const auto& c : cities) out.push_back({c.city_id, c.peak_cell.value, c.population, year});
                       return out;
                   };
                   const MatrixDistanceProvider provider(load_distance_matrix(*data->distances));
                   const auto curve = spacing_ratio_curve(to_points(base_by[key].cities, 1970),
                                                          to_points(comp_by[key].cities, 2015), {5, 100}, provider);
                   double min_ratio = INFINITY, small = 0, large = 0;
                   for (const auto& p : curve) {
                       min_ratio = std::min(min_ratio, p.ratio);
                       if (p.r <= 20) small += p.ratio / 16.0;
                       if (p.r >= 81) large += p.ratio / 20.0;
                   }
                   const auto detail = fmt::format("min d_r over r in [5,100] = {:.4f}; mean r<=20 {:.4f} vs r>=81 {:.4f}",
                                                   min_ratio, small, large);
                   return (min_ratio > 1.0 && small > large) ? pass(detail) : fail(detail);
               }));

        report(12, "growth regression", guarded([&] {
                   if (records.empty()) return fail("no ratio records");
                   std::map<int, double> base, comp;
                   for (const auto& r : records) {
                       base[r.pair.comp_city] = r.base_share;
                       comp[r.pair.comp_city] = r.comp_share;
                   }
                   const auto g = fit_growth_regression(base, comp);
                   const auto detail = fmt::format("slope {:.4f}, intercept {:.4f}, r^2 {:.4f}, n {}", g.fit.slope,
                                                   g.fit.intercept, g.fit.r_squared, g.fit.n);
                   return g.fit.slope > 0 ? pass(detail) : fail(detail);
               }));
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("{} failed; {:.1f} s", failures, secs) << std::endl;
    return failures == 0 ? 0 : 1;
}
