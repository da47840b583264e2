#include "epifamily/io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <unistd.h>

#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"

namespace epifamily::io {

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InputError("cannot write '" + path.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw InputError("failed writing '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InputError("cannot move output into place at '" + path.string() + "'");
    }
}

Format parse_format(std::string_view name)
{
    if (name == "csv")
        return Format::csv;
    if (name == "json")
        return Format::json;
    throw InputError("unknown output format '" + std::string(name) + "' (expected csv or json)");
}

std::string_view extension(Format format) noexcept { return format == Format::csv ? ".csv" : ".json"; }

std::string OutTable::to_csv() const
{
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i)
            out += ',';
        out += columns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::string>)
                        out += v;
                    else if constexpr (std::is_same_v<T, double>)
                        out += csv::format_number(v);
                    else
                        out += std::to_string(v);
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json OutTable::to_json() const
{
    auto out = nlohmann::json::array();
    for (const auto& row : rows) {
        auto obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i)
            std::visit([&](const auto& v) { obj[columns[i]] = v; }, row[i]);
        out.push_back(std::move(obj));
    }
    return out;
}

std::string OutTable::render(Format format) const
{
    return format == Format::csv ? to_csv() : dump_json(to_json());
}

OutTable series_table(const DailySeries& series, std::string_view column)
{
    return series_bundle_table({{std::string(column), &series}});
}

OutTable series_bundle_table(const std::vector<std::pair<std::string, const DailySeries*>>& columns)
{
    if (columns.empty())
        throw InputError("a series table needs at least one column");
    const auto& first = *columns.front().second;
    OutTable table;
    table.columns.push_back("date");
    for (const auto& [name, s] : columns) {
        if (s->start() != first.start() || s->size() != first.size())
            throw AlignmentError("series '" + name + "' does not share the dates of '" + columns.front().first + "'");
        table.columns.push_back(name);
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
        auto& row = table.rows.emplace_back();
        row.emplace_back(format_date(first.start() + static_cast<long>(i)));
        for (const auto& col : columns)
            row.emplace_back((*col.second)[i]);
    }
    return table;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, Format format) : dir_(std::move(dir)), format_(format)
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw InputError("cannot create output directory '" + dir_.string() + "'");
}

void ArtifactWriter::record(const std::string& file, std::string_view content)
{
    if (file.find('/') != std::string::npos || file == "manifest.json")
        throw InputError("invalid artifact name '" + file + "'");
    if (outputs_.count(file))
        throw InputError("artifact '" + file + "' written twice");
    write_file_atomic(dir_ / file, content);
    outputs_.emplace(file, sha256_hex(content));
}

void ArtifactWriter::write_table(std::string_view stem, const OutTable& table)
{
    record(std::string(stem) + std::string(extension(format_)), table.render(format_));
}

void ArtifactWriter::write_json(std::string_view file, const nlohmann::json& j)
{
    record(std::string(file), dump_json(j));
}

void ArtifactWriter::write_text(std::string_view file, std::string_view content)
{
    record(std::string(file), content);
}

void ArtifactWriter::add_input(const std::filesystem::path& path)
{
    inputs_[path.lexically_normal().string()] = sha256_hex(read_file(path));
}

void ArtifactWriter::set(const std::string& key, nlohmann::json value) { fields_[key] = std::move(value); }

void ArtifactWriter::finish()
{
    nlohmann::json manifest = fields_;
    manifest["format"] = format_ == Format::csv ? "csv" : "json";
    manifest["inputs"] = nlohmann::json::array();
    for (const auto& [path, hash] : inputs_)
        manifest["inputs"].push_back({{"path", path}, {"sha256", hash}});
    manifest["outputs"] = nlohmann::json::array();
    for (const auto& [file, hash] : outputs_)
        manifest["outputs"].push_back({{"file", file}, {"sha256", hash}});
    write_file_atomic(dir_ / "manifest.json", dump_json(manifest));
}

} // namespace epifamily::io
