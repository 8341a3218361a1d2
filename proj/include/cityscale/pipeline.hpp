#pragma once

// File-level pipeline stages. Each CLI subcommand is one stage; `report`
// chains them over a single output directory, so its outputs equal those
// of running the subcommands by hand in order.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cityscale/extraction.hpp"
#include "cityscale/grid_io.hpp"
#include "cityscale/matching.hpp"
#include "cityscale/spacing.hpp"

namespace cityscale::pipeline {

namespace fs = std::filesystem;

// Canonical file names inside an output directory.
inline constexpr const char* kCityTable = "city_population.csv";
inline constexpr const char* kMembership = "cells_in_cities.csv";
inline constexpr const char* kCityDetail = "city_detail.csv";
inline constexpr const char* kNational = "national_totals.csv";
inline constexpr const char* kAllCities = "all_cities.csv";
inline constexpr const char* kPairs = "balanced_city_set.csv";
inline constexpr const char* kMatchDiagnostics = "match_diagnostics.csv";
inline constexpr const char* kRatios = "city_ratios.csv";
inline constexpr const char* kStatsSummary = "stats_summary.json";
inline constexpr const char* kKdeDir = "kde";
inline constexpr const char* kRegression = "regression.json";
inline constexpr const char* kRegressionPoints = "regression_points.csv";
inline constexpr const char* kSpacing = "spacing.csv";
inline constexpr const char* kDistances = "bilateral_distances.csv";
inline constexpr const char* kManifest = "manifest.json";

struct GridInput {
    fs::path path;
    std::optional<Year> year;  // all years in the file when unset
};

/// Parses "matrix:<path>", "graph:<nodes>,<edges>" or "haversine".
struct DistanceSource {
    enum class Kind { Haversine, Matrix, Graph } kind = Kind::Haversine;
    fs::path matrix;
    fs::path nodes;
    fs::path edges;

    static DistanceSource parse(const std::string& spec);
    std::string describe() const;
};

/// Files written by a stage, relative to its output directory.
using Written = std::vector<fs::path>;

Written run_extract(const std::vector<GridInput>& grids, const GridSchema& schema,
                    const ExtractionConfig& config, const fs::path& out_dir);

/// Cities written by run_extract into `dir`.
std::vector<YearCities> load_extraction(const fs::path& dir);
const YearCities& year_of(const std::vector<YearCities>& years, Year year);

Written run_match(const fs::path& cities_dir, Year base_year, Year comp_year, const fs::path& out_dir);

std::vector<MatchedCityPair> read_pairs(const fs::path& path);

Written run_stats(const fs::path& cities_dir, const fs::path& pairs, Year base_year, Year comp_year,
                  const fs::path& out_dir);

struct KdeSettings {
    std::size_t top = 8;
    std::optional<double> bandwidth;
};

Written run_kde(const fs::path& cities_dir, const fs::path& pairs, Year base_year, Year comp_year,
                const KdeSettings& settings, const fs::path& out_dir);

Written run_regress(const fs::path& cities_dir, const fs::path& pairs, Year base_year, Year comp_year,
                    const fs::path& out_dir);

Written run_distances(const fs::path& nodes, const fs::path& edges, const fs::path& points,
                      const fs::path& out_path, unsigned threads);

struct SpacingSettings {
    RankRange ranks{};
    CounterfactualOptions mc{};
    std::optional<fs::path> pool;  // defaults to all_cities.csv in the cities directory
    DistanceSource distances{};
};

Written run_spacing(const fs::path& cities_dir, Year base_year, Year comp_year, const SpacingSettings& settings,
                    const fs::path& out_path);

struct PipelineConfig {
    std::vector<GridInput> grids;
    Year base_year = 1970;
    Year comp_year = 2015;
    GridSchema schema{};
    ExtractionConfig extraction{};
    KdeSettings kde{};
    SpacingSettings spacing{};
    unsigned threads = 1;
    fs::path output_dir = "report";

    /// Reads a JSON config; relative paths resolve against the file's directory.
    static PipelineConfig from_json_file(const fs::path& path);
    /// Throws MissingPath / InvalidArgument before any stage runs.
    void validate() const;
};

struct ReportBundle {
    fs::path output_dir;
    Written files;  // every data file written, excluding the manifest
    fs::path manifest;
    std::size_t r_max_used = 0;
};

ReportBundle run_report(const PipelineConfig& config);

std::string sha256_file(const fs::path& path);

unsigned default_thread_count();

}  // namespace cityscale::pipeline
