#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace epifamily::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based source line of each row, for error messages.
    std::vector<std::size_t> lines;

    /// Index of column `name`; throws InputError if absent.
    std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting. Blank lines and lines starting with '#' are skipped.
Table parse(std::string_view text, std::string_view origin);
Table read(const std::filesystem::path& path);

double to_double(std::string_view field, std::string_view origin, std::size_t line);
long to_long(std::string_view field, std::string_view origin, std::size_t line);

/// Shortest round-trip decimal representation; stable across runs.
std::string format_number(double value);

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view line, char sep);

} // namespace epifamily::csv
