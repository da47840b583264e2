#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "epifamily/series.hpp"

namespace epifamily::io {

std::string sha256_hex(std::string_view data);
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

enum class Format { csv, json };
Format parse_format(std::string_view name);
std::string_view extension(Format format) noexcept;

using Cell = std::variant<std::string, double, std::int64_t>;

struct OutTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string to_csv() const;
    /// Array of row objects.
    nlohmann::json to_json() const;
    std::string render(Format format) const;
};

/// `date,<column>` rows.
OutTable series_table(const DailySeries& series, std::string_view column = "value");
/// Date column plus one column per series; all series must share their dates.
OutTable series_bundle_table(const std::vector<std::pair<std::string, const DailySeries*>>& columns);

/// Canonical JSON text: two-space indent, sorted keys, trailing newline.
std::string dump_json(const nlohmann::json& j);

/// Writes artifacts into one directory and records them for manifest.json.
class ArtifactWriter {
  public:
    ArtifactWriter(std::filesystem::path dir, Format format);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    Format format() const noexcept { return format_; }

    /// Writes `<stem>.csv` or `<stem>.json` depending on the format.
    void write_table(std::string_view stem, const OutTable& table);
    void write_json(std::string_view file, const nlohmann::json& j);
    void write_text(std::string_view file, std::string_view content);

    /// Records a consumed file with its hash.
    void add_input(const std::filesystem::path& path);
    /// Sets a top-level manifest field.
    void set(const std::string& key, nlohmann::json value);
    /// Writes manifest.json: inputs and outputs with SHA-256, seeds, command.
    void finish();

    const std::map<std::string, std::string>& outputs() const noexcept { return outputs_; }

  private:
    void record(const std::string& file, std::string_view content);

    std::filesystem::path dir_;
    Format format_;
    std::map<std::string, std::string> outputs_;
    std::map<std::string, std::string> inputs_;
    nlohmann::json fields_ = nlohmann::json::object();
};

} // namespace epifamily::io
