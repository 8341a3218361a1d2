// cityscale: command-line front end for the city extraction and spacing
// analysis pipeline. Exit codes: 0 success, 1 validation, 2 data, 3 internal.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cityscale/error.hpp"
#include "cityscale/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cityscale;

namespace {

enum Exit { kOk = 0, kValidation = 1, kData = 2, kInternal = 3 };

struct ExtractFlags {
    double density_threshold = 1000.0;
    double pop_threshold = 10000.0;
    int connectivity = 4;
    std::string mapping = "auto";
    std::string area_model = "unit";
};

void add_extract_flags(CLI::App* app, ExtractFlags& f) {
    app->add_option("--density-threshold", f.density_threshold, "Minimum cell density, people/km^2")
        ->check(CLI::PositiveNumber);
    app->add_option("--pop-threshold", f.pop_threshold, "Minimum city population")->check(CLI::PositiveNumber);
    app->add_option("--connectivity", f.connectivity, "Cell adjacency")->check(CLI::IsMember({4, 8}));
    app->add_option("--cell-mapping", f.mapping, "How cell ids map to row/col")
        ->check(CLI::IsMember({"auto", "columns", "row_col", "mesh"}));
    app->add_option("--area-model", f.area_model, "Cell area model")->check(CLI::IsMember({"unit", "latitude"}));
}

GridSchema schema_of(const ExtractFlags& f) {
    GridSchema s;
    if (f.mapping == "columns") s.mapping = CellIdMapping::Columns;
    if (f.mapping == "row_col") s.mapping = CellIdMapping::RowCol;
    if (f.mapping == "mesh") s.mapping = CellIdMapping::Mesh;
    s.area_model.kind = f.area_model == "latitude" ? AreaModelKind::Latitude : AreaModelKind::Unit;
    return s;
}

ExtractionConfig config_of(const ExtractFlags& f) {
    return {f.density_threshold, f.pop_threshold, f.connectivity == 8 ? Connectivity::Eight : Connectivity::Four};
}

void print_written(const fs::path& dir, const pipeline::Written& files) {
    for (const auto& f : files) std::cout << (dir / f).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"City extraction, matching, density and spacing analysis over gridded population counts"};
    app.require_subcommand(1);
    unsigned threads = pipeline::default_thread_count();
    app.add_option("--threads", threads, "Worker threads (default: $CITYSCALE_THREADS or hardware)")
        ->check(CLI::PositiveNumber);

    // extract
    auto* extract = app.add_subcommand("extract", "Extract cities from population grid CSVs");
    std::vector<std::string> grid_paths;
    std::vector<int> extract_years;
    fs::path extract_out;
    ExtractFlags eflags;
    extract->add_option("--grid", grid_paths, "Grid CSV (CELL_ID, POP, YEAR [, ROW, COL]); repeatable")->required();
    extract->add_option("--year", extract_years, "Restrict to these census years");
    extract->add_option("--out", extract_out, "Output directory")->required();
    add_extract_flags(extract, eflags);

    // match / stats / kde / regress share their inputs
    fs::path cities_dir, pairs_path, out_dir;
    int base_year = 1970, comp_year = 2015;
    auto add_years = [&](CLI::App* sub) {
        sub->add_option("--cities", cities_dir, "Directory written by 'extract'")->required();
        sub->add_option("--base-year", base_year, "Base census year");
        sub->add_option("--comp-year", comp_year, "Comparison census year");
    };

    auto* match = app.add_subcommand("match", "Match cities across two years (balanced_city_set.csv)");
    add_years(match);
    match->add_option("--out", out_dir, "Output directory")->required();

    auto* stats = app.add_subcommand("stats", "Per-pair ratios and panel summary");
    add_years(stats);
    stats->add_option("--pairs", pairs_path, "balanced_city_set.csv (default: <cities>/balanced_city_set.csv)");
    stats->add_option("--out", out_dir, "Output directory")->required();

    auto* kde = app.add_subcommand("kde", "Kernel density curves of normalized cell populations");
    add_years(kde);
    pipeline::KdeSettings kde_settings;
    double bandwidth = 0.0;
    kde->add_option("--pairs", pairs_path, "balanced_city_set.csv (default: <cities>/balanced_city_set.csv)");
    kde->add_option("--top", kde_settings.top, "Number of largest matched cities");
    kde->add_option("--bandwidth", bandwidth, "Fixed bandwidth (default: Silverman's rule)")
        ->check(CLI::PositiveNumber);
    kde->add_option("--out", out_dir, "Output directory")->required();

    auto* regress = app.add_subcommand("regress", "Share-growth regression");
    add_years(regress);
    regress->add_option("--pairs", pairs_path, "balanced_city_set.csv (default: <cities>/balanced_city_set.csv)");
    regress->add_option("--out", out_dir, "Output directory")->required();

    // distances
    auto* distances = app.add_subcommand("distances", "Road-network distances between points");
    fs::path nodes, edges, points, dist_out;
    distances->add_option("--nodes", nodes, "Nodes CSV (ID, LAT, LON)")->required();
    distances->add_option("--edges", edges, "Edges CSV (A, B [, LEN_M])")->required();
    distances->add_option("--points", points, "Points CSV (CELL_ID, LAT, LON)")->required();
    distances->add_option("--out", dist_out, "Output bilateral_distances.csv")->required();

    // spacing
    auto* spacing = app.add_subcommand("spacing", "Spacing ratio curve with counterfactual bands");
    add_years(spacing);
    pipeline::SpacingSettings sp;
    std::string dist_spec = "haversine";
    fs::path pool_path, spacing_out;
    spacing->add_option("--r-min", sp.ranks.min, "Smallest rank");
    spacing->add_option("--r-max", sp.ranks.max, "Largest rank");
    spacing->add_option("--draws", sp.mc.draws, "Monte Carlo draws per rank")->check(CLI::PositiveNumber);
    spacing->add_option("--seed", sp.mc.seed, "RNG seed");
    spacing->add_option("--pool", pool_path, "Counterfactual pool (default: <cities>/all_cities.csv)");
    spacing->add_option("--distances", dist_spec, "matrix:<path> | graph:<nodes>,<edges> | haversine");
    spacing->add_option("--out", spacing_out, "Output spacing CSV")->required();

    // report
    auto* report = app.add_subcommand("report", "Run every stage into one directory with a manifest");
    fs::path config_path;
    std::vector<std::string> report_grids;
    fs::path report_out;
    std::optional<std::size_t> o_draws, o_rmin, o_rmax, o_top;
    std::optional<std::uint64_t> o_seed;
    std::optional<std::string> o_dist;
    std::optional<int> o_base, o_comp, o_conn;
    std::optional<double> o_density, o_pop, o_bw;
    report->add_option("--config", config_path, "JSON pipeline config");
    report->add_option("--grid", report_grids, "Grid CSV; overrides the config's grids");
    report->add_option("--out", report_out, "Output directory");
    report->add_option("--base-year", o_base);
    report->add_option("--comp-year", o_comp);
    report->add_option("--draws", o_draws);
    report->add_option("--seed", o_seed);
    report->add_option("--r-min", o_rmin);
    report->add_option("--r-max", o_rmax);
    report->add_option("--top", o_top);
    report->add_option("--distances", o_dist);
    report->add_option("--connectivity", o_conn)->check(CLI::IsMember({4, 8}));
    report->add_option("--density-threshold", o_density)->check(CLI::PositiveNumber);
    report->add_option("--pop-threshold", o_pop)->check(CLI::PositiveNumber);
    report->add_option("--bandwidth", o_bw)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    auto pairs_or_default = [&] { return pairs_path.empty() ? cities_dir / pipeline::kPairs : pairs_path; };

    try {
        if (*extract) {
            std::vector<pipeline::GridInput> inputs;
            for (const auto& g : grid_paths) {
                if (extract_years.empty()) {
                    inputs.push_back({g, std::nullopt});
                } else {
                    for (int y : extract_years) inputs.push_back({g, y});
                }
            }
            print_written(extract_out, pipeline::run_extract(inputs, schema_of(eflags), config_of(eflags), extract_out));
        } else if (*match) {
            print_written(out_dir, pipeline::run_match(cities_dir, base_year, comp_year, out_dir));
        } else if (*stats) {
            print_written(out_dir, pipeline::run_stats(cities_dir, pairs_or_default(), base_year, comp_year, out_dir));
        } else if (*kde) {
            if (bandwidth > 0) kde_settings.bandwidth = bandwidth;
            print_written(out_dir,
                          pipeline::run_kde(cities_dir, pairs_or_default(), base_year, comp_year, kde_settings, out_dir));
        } else if (*regress) {
            print_written(out_dir, pipeline::run_regress(cities_dir, pairs_or_default(), base_year, comp_year, out_dir));
        } else if (*distances) {
            pipeline::run_distances(nodes, edges, points, dist_out, threads);
            std::cout << dist_out.string() << '\n';
        } else if (*spacing) {
            sp.distances = pipeline::DistanceSource::parse(dist_spec);
            sp.mc.threads = threads;
            if (!pool_path.empty()) sp.pool = pool_path;
            pipeline::run_spacing(cities_dir, base_year, comp_year, sp, spacing_out);
            std::cout << spacing_out.string() << '\n';
        } else if (*report) {
            pipeline::PipelineConfig cfg;
            cfg.threads = threads;
            if (!config_path.empty()) cfg = pipeline::PipelineConfig::from_json_file(config_path);
            if (app.count("--threads")) cfg.threads = threads;
            if (!report_grids.empty()) {
                cfg.grids.clear();
                for (const auto& g : report_grids) cfg.grids.push_back({g, std::nullopt});
            }
            if (!report_out.empty()) cfg.output_dir = report_out;
            if (o_base) cfg.base_year = *o_base;
            if (o_comp) cfg.comp_year = *o_comp;
            if (o_draws) cfg.spacing.mc.draws = *o_draws;
            if (o_seed) cfg.spacing.mc.seed = *o_seed;
            if (o_rmin) cfg.spacing.ranks.min = *o_rmin;
            if (o_rmax) cfg.spacing.ranks.max = *o_rmax;
            if (o_top) cfg.kde.top = *o_top;
            if (o_dist) cfg.spacing.distances = pipeline::DistanceSource::parse(*o_dist);
            if (o_conn) cfg.extraction.connectivity = *o_conn == 8 ? Connectivity::Eight : Connectivity::Four;
            if (o_density) cfg.extraction.density_threshold = *o_density;
            if (o_pop) cfg.extraction.population_threshold = *o_pop;
            if (o_bw) cfg.kde.bandwidth = *o_bw;
            const auto bundle = pipeline::run_report(cfg);
            print_written(bundle.output_dir, bundle.files);
            std::cout << bundle.manifest.string() << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "cityscale: " << e.what() << '\n';
        return is_validation_error(e.code()) ? kValidation : kData;
    } catch (const std::exception& e) {
        std::cerr << "cityscale: internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
