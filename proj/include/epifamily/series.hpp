#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epifamily {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(std::string_view text);
std::string format_date(Date date);

inline Date operator+(Date date, long offset) { return date + std::chrono::days{offset}; }

/// Signed day difference `to - from`.
inline long days_between(Date from, Date to) { return static_cast<long>((to - from).count()); }

/// Calendar-dated daily series. Day i of `values()` is `start() + i`; there are
/// no gaps and every value is finite. Immutable after construction.
class DailySeries {
  public:
    DailySeries(Date start, std::vector<double> values);

    /// Constant series of `length` days.
    static DailySeries constant(Date start, std::size_t length, double value);

    Date start() const noexcept { return start_; }
    /// One past the last day.
    Date end() const noexcept { return start_ + static_cast<long>(values_.size()); }
    Date last() const noexcept { return end() + (-1); }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool covers(Date date) const noexcept { return date >= start_ && date < end(); }
    /// Value on `date`; throws InputError when the date lies outside the series.
    double at(Date date) const;
    /// Value on `date`, or `fallback` outside the series.
    double value_or(Date date, double fallback) const noexcept;
    /// Days [from, to) as a new series; throws when not covered.
    DailySeries slice(Date from, Date to) const;

    double sum() const noexcept;
    bool nonnegative() const noexcept;

    friend bool operator==(const DailySeries&, const DailySeries&) = default;

  private:
    Date start_;
    std::vector<double> values_;
};

/// History followed by forecast. The forecast must start the day after the
/// history ends; a missing forecast returns the history unchanged.
DailySeries align_and_concat(const DailySeries& history, const std::optional<DailySeries>& forecast);

/// Reads the `date,value` CSV format. Rows must be strictly consecutive days.
DailySeries read_series_csv(const std::filesystem::path& path);
DailySeries parse_series_csv(std::string_view text, std::string_view origin = "<memory>");
std::string series_to_csv(const DailySeries& series, std::string_view value_column = "value");

} // namespace epifamily
