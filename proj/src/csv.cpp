#include "csv.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "cityscale/error.hpp"

namespace cityscale::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_record(std::string_view line, const std::string& source,
                                      std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: unterminated quoted field", source, lineno));
    }
    out.push_back(was_quoted ? cur : std::string(trim(cur)));
    return out;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

Table Table::parse(std::string_view text, std::string source) {
    Table t;
    t.source_ = std::move(source);
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    bool have_header = false;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        if (trim(line).empty()) continue;

        auto fields = split_record(line, t.source_, lineno);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header_.size()) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("{}:{}: expected {} fields, found {}", t.source_, lineno,
                                    t.header_.size(), fields.size()));
        }
        t.rows_.push_back(std::move(fields));
        t.lines_.push_back(lineno);
    }
    if (!have_header) {
        throw Error(ErrorCode::ParseError, fmt::format("{}: missing header row", t.source_));
    }
    return t;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw Error(ErrorCode::MissingColumn,
                fmt::format("{}: required column '{}' not found", source_, name));
}

std::int64_t Table::get_int(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        // Accept integral values written in floating form, e.g. "1200.0".
        double d = 0;
        auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec2 == std::errc() && p2 == s.data() + s.size() && d == static_cast<double>(static_cast<std::int64_t>(d))) {
            return static_cast<std::int64_t>(d);
        }
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: column '{}' expects an integer, got '{}'", source_,
                                lines_[row], header_[col], s));
    }
    return v;
}

double Table::get_double(std::size_t row, std::size_t col) const {
    const std::string& s = rows_[row][col];
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: column '{}' expects a number, got '{}'", source_,
                                lines_[row], header_[col], s));
    }
    return v;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
        throw Error(ErrorCode::IoFailure, fmt::format("cannot write '{}'", path.string()));
    }
    for (const auto& h : header) field(h);
    end_row();
}

Writer& Writer::field(std::string_view s) {
    if (!first_) out_ << ',';
    first_ = false;
    if (s.find_first_of(",\"\n") != std::string_view::npos) {
        out_ << '"';
        for (char c : s) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << s;
    }
    return *this;
}

Writer& Writer::field(std::int64_t v) { return field(std::string_view(fmt::format("{}", v))); }

Writer& Writer::field(double v) { return field(std::string_view(format_number(v))); }

void Writer::end_row() {
    out_ << '\n';
    first_ = true;
}

void Writer::close() {
    out_.close();
    if (out_.fail()) {
        throw Error(ErrorCode::IoFailure, fmt::format("failed writing '{}'", path_.string()));
    }
}

std::string format_number(double v) { return fmt::format("{:.9g}", v); }

}  // namespace cityscale::csv
