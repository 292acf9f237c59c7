#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtswarm {

/// Minimal reader for the comma-separated files written by this library
/// (no quoting). Lines starting with '#' before the header are collected as comments.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    const std::string& header_line() const { return header_line_; }
    const std::vector<std::string>& comments() const { return comments_; }

    /// Next data row; throws FormatError when the field count differs from the header.
    std::optional<std::vector<std::string>> next();

    double to_double(std::string_view field, std::size_t column) const;
    std::uint64_t to_uint(std::string_view field, std::size_t column) const;
    std::size_t line_number() const { return line_no_; }

    /// Throws FormatError unless the header equals `expected` exactly.
    void expect_header(const std::vector<std::string>& expected) const;

private:
    [[noreturn]] void fail(const std::string& what) const;

    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::string header_line_;
    std::vector<std::string> comments_;
    std::size_t line_no_ = 0;
};

std::vector<std::string> split_csv_line(std::string_view line);

/// printf-style %.17g (round-trip) and %.9g formatting.
std::string fmt_g17(double v);
std::string fmt_g9(double v);

}  // namespace mtswarm
