#pragma once

// Minimal RFC-4180-style CSV reading and writing for the toolkit's tables:
// comma separator, optional double-quoted fields, mandatory header row.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cityscale::csv {

class Table {
public:
    static Table read(const std::filesystem::path& path);
    static Table parse(std::string_view text, std::string source = "<memory>");

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

    // Throws MissingColumn when absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;

    // 1-based line number in the source file, for error messages.
    std::size_t line_of(std::size_t row) const { return lines_[row]; }
    const std::string& source() const { return source_; }

    std::int64_t get_int(std::size_t row, std::size_t col) const;
    double get_double(std::size_t row, std::size_t col) const;
    const std::string& get(std::size_t row, std::size_t col) const { return rows_[row][col]; }

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

    Writer& field(std::string_view s);
    Writer& field(std::int64_t v);
    Writer& field(int v) { return field(static_cast<std::int64_t>(v)); }
    Writer& field(double v);
    void end_row();
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool first_ = true;
};

// Nine significant digits, shortest form; the toolkit's numeric output format.
std::string format_number(double v);

}  // namespace cityscale::csv
