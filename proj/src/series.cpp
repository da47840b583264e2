#include "epifamily/series.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"

namespace epifamily {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len)
{
    int value = 0;
    const auto* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw InputError("invalid date '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

Date parse_date(std::string_view text)
{
    using namespace std::chrono;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw InputError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const year_month_day ymd{year{parse_field(text, 0, 4)}, month{static_cast<unsigned>(parse_field(text, 5, 2))},
                             day{static_cast<unsigned>(parse_field(text, 8, 2))}};
    if (!ymd.ok()) {
        throw InputError("invalid date '" + std::string(text) + "'");
    }
    return sys_days{ymd};
}

std::string format_date(Date date)
{
    using namespace std::chrono;
    const year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

DailySeries::DailySeries(Date start, std::vector<double> values)
    : start_{start}
    , values_{std::move(values)}
{
    if (values_.empty()) {
        throw InputError("daily series starting " + format_date(start_) + " is empty");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InputError("non-finite value on " + format_date(start_ + static_cast<long>(i)));
        }
    }
}

DailySeries DailySeries::constant(Date start, std::size_t length, double value)
{
    return DailySeries(start, std::vector<double>(length, value));
}

double DailySeries::at(Date date) const
{
    if (!covers(date)) {
        throw InputError("date " + format_date(date) + " outside series [" + format_date(start_) + ", " +
                         format_date(last()) + "]");
    }
    return values_[static_cast<std::size_t>(days_between(start_, date))];
}

double DailySeries::value_or(Date date, double fallback) const noexcept
{
    return covers(date) ? values_[static_cast<std::size_t>(days_between(start_, date))] : fallback;
}

DailySeries DailySeries::slice(Date from, Date to) const
{
    if (to <= from || !covers(from) || !covers(to + (-1))) {
        throw InputError("slice [" + format_date(from) + ", " + format_date(to) + ") outside series [" +
                         format_date(start_) + ", " + format_date(last()) + "]");
    }
    const auto first = values_.begin() + days_between(start_, from);
    return DailySeries(from, std::vector<double>(first, first + days_between(from, to)));
}

double DailySeries::sum() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

bool DailySeries::nonnegative() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

DailySeries align_and_concat(const DailySeries& history, const std::optional<DailySeries>& forecast)
{
    if (!forecast) {
        return history;
    }
    if (forecast->start() != history.end()) {
        throw AlignmentError("forecast starts " + format_date(forecast->start()) + " but history ends " +
                             format_date(history.last()) + "; expected forecast start " +
                             format_date(history.end()));
    }
    std::vector<double> joined = history.values();
    joined.insert(joined.end(), forecast->values().begin(), forecast->values().end());
    return DailySeries(history.start(), std::move(joined));
}

namespace {

DailySeries series_from_table(const csv::Table& table, std::string_view origin)
{
    const auto date_col = table.column("date");
    const auto value_col = table.column("value");
    if (table.rows.empty()) {
        throw InputError(std::string(origin) + ": no rows");
    }
    const Date start = parse_date(table.rows.front()[date_col]);
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Date date = parse_date(table.rows[r][date_col]);
        if (date != start + static_cast<long>(r)) {
            throw InputError(std::string(origin) + ":" + std::to_string(table.lines[r]) + ": date " +
                             format_date(date) + " breaks the daily sequence (expected " +
                             format_date(start + static_cast<long>(r)) + ")");
        }
        values.push_back(csv::to_double(table.rows[r][value_col], origin, table.lines[r]));
    }
    return DailySeries(start, std::move(values));
}

} // namespace

DailySeries parse_series_csv(std::string_view text, std::string_view origin)
{
    return series_from_table(csv::parse(text, origin), origin);
}

DailySeries read_series_csv(const std::filesystem::path& path)
{
    return series_from_table(csv::read(path), path.string());
}

std::string series_to_csv(const DailySeries& series, std::string_view value_column)
{
    std::string out = "date,";
    out += value_column;
    out += '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_date(series.start() + static_cast<long>(i));
        out += ',';
        out += csv::format_number(series[i]);
        out += '\n';
    }
    return out;
}

} // namespace epifamily
