#include "cityscale/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "cityscale/city_stats.hpp"
#include "cityscale/distance_provider.hpp"
#include "cityscale/distribution.hpp"
#include "cityscale/error.hpp"
#include "cityscale/matching.hpp"
#include "cityscale/routing.hpp"
#include "csv.hpp"
#include "json.hpp"

namespace cityscale::pipeline {

using nlohmann::ordered_json;

namespace {

// Numbers in JSON carry the same nine significant digits as the CSVs.
ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(csv::format_number(v));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoFailure, fmt::format("cannot create directory '{}'", dir.string()));
    }
}

void write_json(const ordered_json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path.string()));
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("failed writing '{}'", path.string()));
}

void require_file(const fs::path& p, std::string_view what) {
    if (!fs::is_regular_file(p)) {
        throw Error(ErrorCode::MissingPath, fmt::format("{} '{}' does not exist", what, p.string()));
    }
}

std::vector<CityPoint> city_points(const YearCities& y) {
    std::vector<CityPoint> out;
    out.reserve(y.cities.size());
    for (const auto& c : y.cities) out.push_back({c.city_id, c.peak_cell.value, c.population, c.year});
    return out;
}

std::string_view mapping_name(CellIdMapping m) {
    switch (m) {
        case CellIdMapping::Columns: return "columns";
        case CellIdMapping::RowCol: return "row_col";
        case CellIdMapping::Mesh: return "mesh";
        default: return "auto";
    }
}

CellIdMapping parse_mapping(const std::string& s) {
    if (s == "auto") return CellIdMapping::Auto;
    if (s == "columns") return CellIdMapping::Columns;
    if (s == "row_col") return CellIdMapping::RowCol;
    if (s == "mesh") return CellIdMapping::Mesh;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown cell mapping '{}'", s));
}

AreaModelKind parse_area_model(const std::string& s) {
    if (s == "unit") return AreaModelKind::Unit;
    if (s == "latitude") return AreaModelKind::Latitude;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown area model '{}'", s));
}

Connectivity parse_connectivity(int c) {
    if (c == 4) return Connectivity::Four;
    if (c == 8) return Connectivity::Eight;
    throw Error(ErrorCode::InvalidArgument, fmt::format("connectivity must be 4 or 8, got {}", c));
}

}  // namespace

// ---------------------------------------------------------------------------

DistanceSource DistanceSource::parse(const std::string& spec) {
    DistanceSource s;
    if (spec == "haversine") return s;
    if (spec.rfind("matrix:", 0) == 0) {
        s.kind = Kind::Matrix;
        s.matrix = spec.substr(7);
        return s;
    }
    if (spec.rfind("graph:", 0) == 0) {
        const auto rest = spec.substr(6);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "graph distances need 'graph:<nodes.csv>,<edges.csv>'");
        }
        s.kind = Kind::Graph;
        s.nodes = rest.substr(0, comma);
        s.edges = rest.substr(comma + 1);
        return s;
    }
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown distance source '{}'", spec));
}

std::string DistanceSource::describe() const {
    switch (kind) {
        case Kind::Matrix: return "matrix:" + matrix.string();
        case Kind::Graph: return "graph:" + nodes.string() + "," + edges.string();
        default: return "haversine";
    }
}

// ---------------------------------------------------------------------------

Written run_extract(const std::vector<GridInput>& grids, const GridSchema& schema, const ExtractionConfig& config,
                    const fs::path& out_dir) {
    std::map<Year, YearCities> by_year;
    for (const auto& input : grids) {
        require_file(input.path, "grid file");
        const auto years = input.year ? std::vector<Year>{*input.year} : grid_years(input.path, schema);
        for (Year year : years) {
            const auto grid = load_grid(input.path, year, schema);
            YearCities yc{year, grid.total_population(), extract_cities(grid, config)};
            if (!by_year.emplace(year, std::move(yc)).second) {
                throw Error(ErrorCode::InvalidArgument, fmt::format("year {} supplied more than once", year));
            }
        }
    }
    std::vector<YearCities> years;
    for (auto& [y, yc] : by_year) years.push_back(std::move(yc));

    ensure_dir(out_dir);
    write_city_table(years, out_dir / kCityTable);
    write_membership_table(years, out_dir / kMembership);
    write_city_detail(years, out_dir / kCityDetail);
    write_national_totals(years, out_dir / kNational);

    std::map<std::string, LatLon> peaks;
    for (const auto& y : years) {
        for (const auto& c : y.cities) peaks.emplace(c.peak_cell.value, c.peak_location);
    }
    std::vector<NamedPoint> pool;
    for (const auto& [id, loc] : peaks) pool.push_back({id, loc});
    write_points(pool, out_dir / kAllCities);

    return {kCityTable, kMembership, kCityDetail, kNational, kAllCities};
}

std::vector<YearCities> load_extraction(const fs::path& dir) {
    for (const char* f : {kCityDetail, kMembership, kNational}) require_file(dir / f, "extraction output");
    return read_cities(dir / kCityDetail, dir / kMembership, dir / kNational);
}

const YearCities& year_of(const std::vector<YearCities>& years, Year year) {
    for (const auto& y : years) {
        if (y.year == year) return y;
    }
    throw Error(ErrorCode::InvalidArgument, fmt::format("no extracted cities for year {}", year));
}

// ---------------------------------------------------------------------------

Written run_match(const fs::path& cities_dir, Year base_year, Year comp_year, const fs::path& out_dir) {
    const auto years = load_extraction(cities_dir);
    const auto& base = year_of(years, base_year);
    const auto& comp = year_of(years, comp_year);
    const auto result = match_cities(base.cities, comp.cities);

    ensure_dir(out_dir);
    {
        csv::Writer w(out_dir / kPairs,
                      {"BASE_CITY", "COMP_CITY", "OVERLAP_CELLS", "BASE_SIZE", "COMP_SIZE", "BASE_YEAR", "COMP_YEAR"});
        for (const auto& p : result.pairs) {
            w.field(p.base_city)
                .field(p.comp_city)
                .field(static_cast<std::int64_t>(p.overlap_cells))
                .field(static_cast<std::int64_t>(p.base_size))
                .field(static_cast<std::int64_t>(p.comp_size))
                .field(base_year)
                .field(comp_year);
            w.end_row();
        }
        w.close();
    }
    {
        std::map<int, int> per_base, per_comp;
        for (const auto& c : result.candidates) {
            ++per_base[c.base_city];
            ++per_comp[c.comp_city];
        }
        std::set<std::pair<int, int>> matched;
        for (const auto& p : result.pairs) matched.emplace(p.base_city, p.comp_city);

        csv::Writer w(out_dir / kMatchDiagnostics,
                      {"BASE_CITY", "COMP_CITY", "OVERLAP_CELLS", "BASE_SIZE", "COMP_SIZE", "BASE_CANDIDATES",
                       "COMP_CANDIDATES", "MUTUAL_BEST"});
        for (const auto& c : result.candidates) {
            w.field(c.base_city)
                .field(c.comp_city)
                .field(static_cast<std::int64_t>(c.overlap_cells))
                .field(static_cast<std::int64_t>(c.base_size))
                .field(static_cast<std::int64_t>(c.comp_size))
                .field(per_base[c.base_city])
                .field(per_comp[c.comp_city])
                .field(matched.count({c.base_city, c.comp_city}) ? 1 : 0);
            w.end_row();
        }
        w.close();
    }
    return {kPairs, kMatchDiagnostics};
}

std::vector<MatchedCityPair> read_pairs(const fs::path& path) {
    require_file(path, "pairs file");
    const auto t = csv::Table::read(path);
    const auto cb = t.column("BASE_CITY"), cc = t.column("COMP_CITY"), co = t.column("OVERLAP_CELLS"),
               bs = t.column("BASE_SIZE"), cs = t.column("COMP_SIZE");
    std::vector<MatchedCityPair> out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out.push_back({static_cast<int>(t.get_int(r, cb)), static_cast<int>(t.get_int(r, cc)),
                       static_cast<std::size_t>(t.get_int(r, co)), static_cast<std::size_t>(t.get_int(r, bs)),
                       static_cast<std::size_t>(t.get_int(r, cs))});
    }
    return out;
}

// ---------------------------------------------------------------------------

Written run_stats(const fs::path& cities_dir, const fs::path& pairs_path, Year base_year, Year comp_year,
                  const fs::path& out_dir) {
    const auto years = load_extraction(cities_dir);
    const auto& base = year_of(years, base_year);
    const auto& comp = year_of(years, comp_year);
    const auto records =
        ratio_records(read_pairs(pairs_path), base.cities, comp.cities, base.national_total, comp.national_total);

    ensure_dir(out_dir);
    csv::Writer w(out_dir / kRatios, {"BASE_CITY", "COMP_CITY", "BASE_POP", "COMP_POP", "BASE_SHARE", "COMP_SHARE",
                                      "POP_RATIO", "POP_RATIO_RAW", "AREA_RATIO", "PEAK_DENSITY_RATIO",
                                      "MEAN_DENSITY_RATIO"});
    for (const auto& r : records) {
        w.field(r.pair.base_city)
            .field(r.pair.comp_city)
            .field(r.base_population)
            .field(r.comp_population)
            .field(r.base_share)
            .field(r.comp_share)
            .field(r.pop_ratio)
            .field(r.pop_ratio_raw)
            .field(r.area_ratio)
            .field(r.peak_density_ratio)
            .field(r.mean_density_ratio);
        w.end_row();
    }
    w.close();

    const auto s = panel_summary(records);
    auto family = [](const stats::Summary<double>& f) {
        return ordered_json{{"mean", num(f.mean)},     {"geometric_mean", num(f.geometric_mean)},
                            {"median", num(f.median)}, {"q1", num(f.q1)},
                            {"q3", num(f.q3)},         {"min", num(f.min)},
                            {"max", num(f.max)}};
    };
    ordered_json j;
    j["base_year"] = base_year;
    j["comp_year"] = comp_year;
    j["n"] = s.n;
    j["pop_ratio"] = family(s.pop_ratio);
    j["pop_ratio_raw"] = family(s.pop_ratio_raw);
    j["area_ratio"] = family(s.area_ratio);
    j["peak_density_ratio"] = family(s.peak_density_ratio);
    j["mean_density_ratio"] = family(s.mean_density_ratio);
    j["aggregate_pop_ratio"] = num(s.aggregate_pop_ratio);
    j["aggregate_pop_ratio_raw"] = num(s.aggregate_pop_ratio_raw);
    write_json(j, out_dir / kStatsSummary);
    return {kRatios, kStatsSummary};
}

// ---------------------------------------------------------------------------

Written run_kde(const fs::path& cities_dir, const fs::path& pairs_path, Year base_year, Year comp_year,
                const KdeSettings& settings, const fs::path& out_dir) {
    const auto years = load_extraction(cities_dir);
    const auto& base = year_of(years, base_year);
    const auto& comp = year_of(years, comp_year);
    std::map<int, const City*> base_by_id, comp_by_id;
    for (const auto& c : base.cities) base_by_id[c.city_id] = &c;
    for (const auto& c : comp.cities) comp_by_id[c.city_id] = &c;

    struct Selected {
        const City* base;
        const City* comp;
    };
    std::vector<Selected> chosen;
    for (const auto& p : read_pairs(pairs_path)) {
        auto b = base_by_id.find(p.base_city);
        auto c = comp_by_id.find(p.comp_city);
        if (b == base_by_id.end() || c == comp_by_id.end()) {
            throw Error(ErrorCode::MissingCity, fmt::format("pair ({}, {})", p.base_city, p.comp_city));
        }
        chosen.push_back({b->second, c->second});
    }
    std::sort(chosen.begin(), chosen.end(), [](const Selected& a, const Selected& b) {
        if (a.comp->population != b.comp->population) return a.comp->population > b.comp->population;
        return a.comp->city_id < b.comp->city_id;
    });
    if (chosen.size() > settings.top) chosen.resize(settings.top);

    const fs::path dir = out_dir / kKdeDir;
    ensure_dir(dir);
    Written written;
    csv::Writer index(dir / "kde_index.csv",
                      {"COMP_CITY", "BASE_CITY", "YEAR", "N_CELLS", "BANDWIDTH", "NORMALIZER", "FILE"});
    for (const auto& sel : chosen) {
        auto to_vec = [](const std::vector<Population>& pops) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(pops.size()));
            for (std::size_t i = 0; i < pops.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(pops[i]);
            return v;
        };
        const Eigen::VectorXd raw_base = to_vec(sel.base->cell_populations);
        const auto [nb, nc] = normalize_city_samples<double>(raw_base, to_vec(sel.comp->cell_populations));
        const auto name = fmt::format("kde_city_{}.csv", sel.comp->city_id);

        csv::Writer w(dir / name, {"X", "DENSITY", "YEAR"});
        for (const auto& [samples, year] : {std::pair{nb, base_year}, std::pair{nc, comp_year}}) {
            const auto curve = gaussian_kde<double>(samples, settings.bandwidth);
            for (Eigen::Index i = 0; i < curve.grid_points.size(); ++i) {
                w.field(curve.grid_points(i)).field(curve.densities(i)).field(year);
                w.end_row();
            }
            index.field(sel.comp->city_id)
                .field(sel.base->city_id)
                .field(year)
                .field(static_cast<std::int64_t>(samples.size()))
                .field(curve.bandwidth)
                .field(raw_base.maxCoeff())
                .field(name);
            index.end_row();
        }
        w.close();
        written.push_back(fs::path(kKdeDir) / name);
    }
    index.close();
    written.insert(written.begin(), fs::path(kKdeDir) / "kde_index.csv");
    return written;
}

// ---------------------------------------------------------------------------

Written run_regress(const fs::path& cities_dir, const fs::path& pairs_path, Year base_year, Year comp_year,
                    const fs::path& out_dir) {
    const auto years = load_extraction(cities_dir);
    const auto& base = year_of(years, base_year);
    const auto& comp = year_of(years, comp_year);
    const auto records =
        ratio_records(read_pairs(pairs_path), base.cities, comp.cities, base.national_total, comp.national_total);

    std::map<int, double> shares_base, shares_comp;
    std::map<int, int> base_of;
    for (const auto& r : records) {
        shares_base[r.pair.comp_city] = r.base_share;
        shares_comp[r.pair.comp_city] = r.comp_share;
        base_of[r.pair.comp_city] = r.pair.base_city;
    }
    const auto reg = fit_growth_regression(shares_base, shares_comp);

    ensure_dir(out_dir);
    ordered_json j;
    j["base_year"] = base_year;
    j["comp_year"] = comp_year;
    j["x"] = "ln(comp share)";
    j["y"] = "ln(comp share / base share)";
    j["slope"] = num(reg.fit.slope);
    j["intercept"] = num(reg.fit.intercept);
    j["r_squared"] = num(reg.fit.r_squared);
    j["n"] = reg.fit.n;
    write_json(j, out_dir / kRegression);

    csv::Writer w(out_dir / kRegressionPoints, {"COMP_CITY", "BASE_CITY", "LOG_SHARE_COMP", "LOG_SHARE_RATIO"});
    for (const auto& p : reg.points) {
        w.field(p.city).field(base_of[p.city]).field(p.log_share_comp).field(p.log_share_ratio);
        w.end_row();
    }
    w.close();
    return {kRegression, kRegressionPoints};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<RoutePoint> route_points(const std::vector<NamedPoint>& points) {
    std::vector<RoutePoint> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!p.location) {
            throw Error(ErrorCode::ParseError, fmt::format("point {} has no LAT/LON", p.id));
        }
        out.push_back({p.id, *p.location});
    }
    return out;
}

}  // namespace

Written run_distances(const fs::path& nodes, const fs::path& edges, const fs::path& points, const fs::path& out_path,
                      unsigned threads) {
    require_file(nodes, "nodes file");
    require_file(edges, "edges file");
    require_file(points, "points file");
    const auto graph = load_road_graph(nodes, edges);
    const auto matrix = bulk_distances(route_points(read_points(points)), graph, threads);
    if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
    write_distance_matrix(matrix, out_path);
    return {out_path.filename()};
}

Written run_spacing(const fs::path& cities_dir, Year base_year, Year comp_year, const SpacingSettings& settings,
                    const fs::path& out_path) {
    const auto years = load_extraction(cities_dir);
    const auto& base = year_of(years, base_year);
    const auto& comp = year_of(years, comp_year);

    const fs::path pool_path = settings.pool ? *settings.pool : cities_dir / kAllCities;
    require_file(pool_path, "city pool file");
    const auto pool_points = read_points(pool_path);

    std::vector<CityPoint> pool;
    std::map<std::string, LatLon> locations;
    for (std::size_t i = 0; i < pool_points.size(); ++i) {
        pool.push_back({static_cast<int>(i + 1), pool_points[i].id, 1, 0});
        if (pool_points[i].location) locations.emplace(pool_points[i].id, *pool_points[i].location);
    }
    for (const auto* y : {&base, &comp}) {
        for (const auto& c : y->cities) locations.emplace(c.peak_cell.value, c.peak_location);
    }

    std::unique_ptr<DistanceProvider> provider;
    switch (settings.distances.kind) {
        case DistanceSource::Kind::Matrix:
            require_file(settings.distances.matrix, "distance matrix");
            provider = std::make_unique<MatrixDistanceProvider>(load_distance_matrix(settings.distances.matrix));
            break;
        case DistanceSource::Kind::Graph: {
            require_file(settings.distances.nodes, "nodes file");
            require_file(settings.distances.edges, "edges file");
            const auto graph = load_road_graph(settings.distances.nodes, settings.distances.edges);
            std::vector<RoutePoint> pts;
            for (const auto& [id, loc] : locations) pts.push_back({id, loc});
            provider = std::make_unique<GraphDistanceProvider>(graph, pts, settings.mc.threads);
            break;
        }
        default:
            provider = std::make_unique<HaversineDistanceProvider>(
                std::unordered_map<std::string, LatLon>(locations.begin(), locations.end()));
            break;
    }

    const auto results =
        spacing_analysis(city_points(base), city_points(comp), pool, settings.ranks, settings.mc, *provider);

    if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
    csv::Writer w(out_path, {"R", "D_BASE", "D_COMP", "RATIO", "MC_MEAN", "MC_P01", "MC_P99"});
    for (const auto& r : results) {
        w.field(static_cast<std::int64_t>(r.r))
            .field(r.d_base)
            .field(r.d_comp)
            .field(r.ratio)
            .field(r.mc_mean)
            .field(r.mc_p01)
            .field(r.mc_p99);
        w.end_row();
    }
    w.close();
    return {out_path.filename()};
}

// ---------------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json_file(const fs::path& path) {
    require_file(path, "config file");
    std::ifstream in(path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("{}: {}", path.string(), e.what()));
    }
    const fs::path root = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : root / p; };

    PipelineConfig c;
    try {
        for (const auto& g : j.at("grids")) {
            if (g.is_string()) {
                c.grids.push_back({resolve(g.get<std::string>()), std::nullopt});
            } else {
                GridInput in_{resolve(g.at("path").get<std::string>()), std::nullopt};
                if (g.contains("year")) in_.year = g.at("year").get<Year>();
                c.grids.push_back(in_);
            }
        }
        c.base_year = j.value("base_year", c.base_year);
        c.comp_year = j.value("comp_year", c.comp_year);
        if (j.contains("schema")) {
            const auto& s = j["schema"];
            if (s.contains("mapping")) c.schema.mapping = parse_mapping(s["mapping"].get<std::string>());
            if (s.contains("area_model")) c.schema.area_model.kind = parse_area_model(s["area_model"].get<std::string>());
        }
        if (j.contains("extraction")) {
            const auto& e = j["extraction"];
            c.extraction.density_threshold = e.value("density_threshold", c.extraction.density_threshold);
            c.extraction.population_threshold = e.value("population_threshold", c.extraction.population_threshold);
            if (e.contains("connectivity")) c.extraction.connectivity = parse_connectivity(e["connectivity"].get<int>());
        }
        if (j.contains("kde")) {
            const auto& k = j["kde"];
            c.kde.top = k.value("top", c.kde.top);
            if (k.contains("bandwidth") && !k["bandwidth"].is_null()) c.kde.bandwidth = k["bandwidth"].get<double>();
        }
        if (j.contains("spacing")) {
            const auto& s = j["spacing"];
            c.spacing.ranks.min = s.value("r_min", c.spacing.ranks.min);
            c.spacing.ranks.max = s.value("r_max", c.spacing.ranks.max);
            c.spacing.mc.draws = s.value("draws", c.spacing.mc.draws);
            c.spacing.mc.seed = s.value("seed", c.spacing.mc.seed);
            if (s.contains("pool")) c.spacing.pool = resolve(s["pool"].get<std::string>());
        }
        if (j.contains("distances")) {
            auto src = DistanceSource::parse(j["distances"].get<std::string>());
            if (src.kind == DistanceSource::Kind::Matrix) src.matrix = resolve(src.matrix.string());
            if (src.kind == DistanceSource::Kind::Graph) {
                src.nodes = resolve(src.nodes.string());
                src.edges = resolve(src.edges.string());
            }
            c.spacing.distances = src;
        }
        c.threads = j.value("threads", default_thread_count());
        if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("{}: {}", path.string(), e.what()));
    }
    return c;
}

void PipelineConfig::validate() const {
    if (grids.empty()) throw Error(ErrorCode::InvalidArgument, "no grid inputs configured");
    for (const auto& g : grids) require_file(g.path, "grid file");
    if (spacing.pool) require_file(*spacing.pool, "city pool file");
    switch (spacing.distances.kind) {
        case DistanceSource::Kind::Matrix: require_file(spacing.distances.matrix, "distance matrix"); break;
        case DistanceSource::Kind::Graph:
            require_file(spacing.distances.nodes, "nodes file");
            require_file(spacing.distances.edges, "edges file");
            break;
        default: break;
    }
    if (base_year == comp_year) throw Error(ErrorCode::InvalidArgument, "base and comparison years are equal");
    if (spacing.ranks.min < 2) throw Error(ErrorCode::InvalidArgument, "r_min must be at least 2");
    if (spacing.ranks.max < spacing.ranks.min) throw Error(ErrorCode::InvalidArgument, "r_max below r_min");
    if (spacing.mc.draws < 1) throw Error(ErrorCode::InvalidArgument, "draws must be at least 1");
    if (!(extraction.density_threshold > 0) || !(extraction.population_threshold > 0)) {
        throw Error(ErrorCode::InvalidArgument, "extraction thresholds must be positive");
    }
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec || !fs::is_directory(output_dir)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("output directory '{}' is not writable", output_dir.string()));
    }
}

namespace {

template <typename Fn>
auto stage(std::string_view name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("[{}] {}", name, e.what()));
    }
}

}  // namespace

ReportBundle run_report(const PipelineConfig& config) {
    config.validate();
    const fs::path out = config.output_dir;
    ReportBundle bundle;
    bundle.output_dir = out;
    auto add = [&](const Written& w) { bundle.files.insert(bundle.files.end(), w.begin(), w.end()); };

    add(stage("extract", [&] { return run_extract(config.grids, config.schema, config.extraction, out); }));
    add(stage("match", [&] { return run_match(out, config.base_year, config.comp_year, out); }));
    add(stage("stats", [&] { return run_stats(out, out / kPairs, config.base_year, config.comp_year, out); }));
    add(stage("kde", [&] { return run_kde(out, out / kPairs, config.base_year, config.comp_year, config.kde, out); }));
    add(stage("regress", [&] { return run_regress(out, out / kPairs, config.base_year, config.comp_year, out); }));

    SpacingSettings spacing = config.spacing;
    spacing.mc.threads = config.threads;
    add(stage("spacing", [&] {
        const auto years = load_extraction(out);
        const fs::path pool = spacing.pool ? *spacing.pool : out / kAllCities;
        const std::size_t available =
            std::min({year_of(years, config.base_year).cities.size(), year_of(years, config.comp_year).cities.size(),
                      read_points(pool).size()});
        spacing.ranks.max = std::min(spacing.ranks.max, available);
        if (spacing.ranks.max < spacing.ranks.min) {
            throw Error(ErrorCode::TooFewCities,
                        fmt::format("only {} cities available, r_min = {}", available, spacing.ranks.min));
        }
        return run_spacing(out, config.base_year, config.comp_year, spacing, out / kSpacing);
    }));
    bundle.r_max_used = spacing.ranks.max;

    ordered_json manifest;
    manifest["tool"] = "cityscale";
    manifest["version"] = CITYSCALE_VERSION;
    manifest["created_at"] = fmt::format("{}", std::chrono::duration_cast<std::chrono::seconds>(
                                                     std::chrono::system_clock::now().time_since_epoch())
                                                     .count());
    ordered_json cfg;
    cfg["base_year"] = config.base_year;
    cfg["comp_year"] = config.comp_year;
    cfg["cell_mapping"] = mapping_name(config.schema.mapping);
    cfg["area_model"] = config.schema.area_model.kind == AreaModelKind::Unit ? "unit" : "latitude";
    cfg["density_threshold"] = num(config.extraction.density_threshold);
    cfg["population_threshold"] = num(config.extraction.population_threshold);
    cfg["connectivity"] = static_cast<int>(config.extraction.connectivity);
    cfg["kde_top"] = config.kde.top;
    cfg["kde_bandwidth"] = config.kde.bandwidth ? num(*config.kde.bandwidth) : ordered_json(nullptr);
    cfg["r_min"] = config.spacing.ranks.min;
    cfg["r_max"] = config.spacing.ranks.max;
    cfg["r_max_used"] = bundle.r_max_used;
    cfg["draws"] = config.spacing.mc.draws;
    cfg["seed"] = config.spacing.mc.seed;
    cfg["distances"] = config.spacing.distances.describe();
    manifest["config"] = cfg;

    ordered_json inputs = ordered_json::array();
    auto add_input = [&](const fs::path& p) { inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}}); };
    for (const auto& g : config.grids) add_input(g.path);
    if (config.spacing.pool) add_input(*config.spacing.pool);
    if (config.spacing.distances.kind == DistanceSource::Kind::Matrix) add_input(config.spacing.distances.matrix);
    if (config.spacing.distances.kind == DistanceSource::Kind::Graph) {
        add_input(config.spacing.distances.nodes);
        add_input(config.spacing.distances.edges);
    }
    manifest["inputs"] = inputs;

    ordered_json outputs = ordered_json::array();
    for (const auto& f : bundle.files) {
        outputs.push_back({{"path", f.generic_string()}, {"sha256", sha256_file(out / f)}});
    }
    manifest["outputs"] = outputs;
    bundle.manifest = out / kManifest;
    write_json(manifest, bundle.manifest);
    return bundle;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, fmt::format("cannot read '{}'", path.string()));
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("CITYSCALE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace cityscale::pipeline
