#include "epifamily/csv.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epifamily/error.hpp"

namespace epifamily::csv {

std::string_view trim(std::string_view text) noexcept
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    while (true) {
        const auto pos = line.find(sep, begin);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(begin)));
            break;
        }
        fields.push_back(trim(line.substr(begin, pos - begin)));
        begin = pos + 1;
    }
    return fields;
}

std::size_t Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw InputError("missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text, std::string_view origin)
{
    Table table;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    bool have_header = false;
    while (begin <= text.size()) {
        auto end = text.find('\n', begin);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        const auto line = trim(text.substr(begin, end - begin));
        begin = end + 1;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        auto fields = split(line, ',');
        if (!have_header) {
            for (auto f : fields) {
                table.header.emplace_back(f);
            }
            have_header = true;
        }
        else {
            if (fields.size() != table.header.size()) {
                throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            auto& row = table.rows.emplace_back();
            for (auto f : fields) {
                row.emplace_back(f);
            }
            table.lines.push_back(line_no);
        }
        if (end == text.size()) {
            break;
        }
    }
    if (!have_header) {
        throw InputError(std::string(origin) + ": empty CSV");
    }
    return table;
}

Table read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

double to_double(std::string_view field, std::string_view origin, std::size_t line)
{
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw InputError(std::string(origin) + ":" + std::to_string(line) + ": not a finite number: '" +
                         std::string(field) + "'");
    }
    return value;
}

long to_long(std::string_view field, std::string_view origin, std::size_t line)
{
    long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw InputError(std::string(origin) + ":" + std::to_string(line) + ": not an integer: '" +
                         std::string(field) + "'");
    }
    return value;
}

std::string format_number(double value)
{
    if (value == 0.0) {
        return "0"; // folds -0
    }
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

} // namespace epifamily::csv
