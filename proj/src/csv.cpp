#include "mtswarm/csv.hpp"

#include <charconv>
#include <cstdio>

#include "mtswarm/errors.hpp"

namespace mtswarm {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

CsvReader::CsvReader(const std::filesystem::path& path) : path_(path.string()), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open " + path_);
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            comments_.push_back(line.substr(1));
            continue;
        }
        header_line_ = line;
        header_ = split_csv_line(line);
        return;
    }
    fail("missing header");
}

void CsvReader::fail(const std::string& what) const {
    throw FormatError(path_ + ":" + std::to_string(line_no_) + ": " + what);
}

std::optional<std::vector<std::string>> CsvReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header_.size()) {
            fail("expected " + std::to_string(header_.size()) + " fields, found " + std::to_string(fields.size()));
        }
        return fields;
    }
    return std::nullopt;
}

double CsvReader::to_double(std::string_view field, std::size_t column) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        fail("column " + header_.at(column) + ": not a number '" + std::string(field) + "'");
    }
    return v;
}

std::uint64_t CsvReader::to_uint(std::string_view field, std::size_t column) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        fail("column " + header_.at(column) + ": not an unsigned integer '" + std::string(field) + "'");
    }
    return v;
}

void CsvReader::expect_header(const std::vector<std::string>& expected) const {
    if (header_ == expected) return;
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
    throw FormatError(path_ + ": expected header " + want + "; found " + header_line_);
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace mtswarm
