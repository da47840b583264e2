#include <doctest.h>

#include <cmath>
#include <numeric>

#include "epifamily/error.hpp"
#include "epifamily/random.hpp"
#include "epifamily/series.hpp"

using namespace epifamily;

namespace {
const Date d0 = parse_date("2022-05-16");
}

TEST_CASE("dates round-trip through ISO text")
{
    CHECK(format_date(d0) == "2022-05-16");
    CHECK(format_date(d0 + 20) == "2022-06-05");
    CHECK(days_between(parse_date("2020-02-28"), parse_date("2020-03-01")) == 2);
    CHECK_THROWS_AS(parse_date("2022-02-30"), InputError);
    CHECK_THROWS_AS(parse_date("2022/02/01"), InputError);
}

TEST_CASE("daily series rejects empty and non-finite values")
{
    CHECK_THROWS_AS(DailySeries(d0, {}), InputError);
    CHECK_THROWS_AS(DailySeries(d0, {1.0, std::nan("")}), InputError);
    DailySeries s(d0, {1, 2, 3});
    CHECK(s.last() == d0 + 2);
    CHECK(s.at(d0 + 1) == 2);
    CHECK_THROWS_AS(s.at(d0 + 3), InputError);
    CHECK(s.value_or(d0 + 7, -1.0) == -1.0);
    CHECK(s.slice(d0 + 1, d0 + 3) == DailySeries(d0 + 1, {2, 3}));
}

TEST_CASE("align_and_concat")
{
    const DailySeries history(d0, {1, 2});

    SUBCASE("abutting forecast is appended")
    {
        const auto joined = align_and_concat(history, DailySeries(d0 + 2, {3}));
        CHECK(joined == DailySeries(d0, {1, 2, 3}));
    }
    SUBCASE("overlap is rejected with both boundary dates")
    {
        try {
            align_and_concat(history, DailySeries(d0 + 1, {3}));
            FAIL("expected AlignmentError");
        }
        catch (const AlignmentError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("2022-05-17") != std::string::npos);
            CHECK(msg.find("2022-05-18") != std::string::npos);
        }
    }
    SUBCASE("gap is rejected") { CHECK_THROWS_AS(align_and_concat(history, DailySeries(d0 + 5, {3})), AlignmentError); }
    SUBCASE("no forecast returns history") { CHECK(align_and_concat(history, std::nullopt) == history); }
}

TEST_CASE("series CSV parsing")
{
    const auto s = parse_series_csv("date,value\n2022-05-16,1.5\n2022-05-17,2\n\n# trailing comment\n");
    CHECK(s == DailySeries(d0, {1.5, 2.0}));
    CHECK(parse_series_csv(series_to_csv(s)) == s);
    CHECK_THROWS_AS(parse_series_csv("date,value\n2022-05-16,1\n2022-05-18,2\n"), InputError);
    CHECK_THROWS_AS(parse_series_csv("date,value\n2022-05-16,abc\n"), InputError);
    CHECK_THROWS_AS(parse_series_csv("day,value\n2022-05-16,1\n"), InputError);
}

TEST_CASE("stochastic_round keeps integers fixed for every seed")
{
    const std::vector<double> in{2.0, 0.0, 7.0};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto rng = make_rng(seed);
        CHECK(stochastic_round(in, rng) == std::vector<std::int64_t>{2, 0, 7});
    }
}

TEST_CASE("stochastic_round rejects negative input")
{
    auto rng = make_rng(1);
    const std::vector<double> in{1.0, -0.5};
    CHECK_THROWS_AS(stochastic_round(in, rng), DomainError);
}

TEST_CASE("stochastic_round of 0.3 is unbiased over 1e5 seeds")
{
    // Bernoulli(0.3): sigma of the mean over 1e5 draws is ~0.00145, so 3 sigma < 0.005.
    constexpr int draws = 100000;
    long total = 0;
    for (int seed = 0; seed < draws; ++seed) {
        auto rng = make_rng(static_cast<std::uint64_t>(seed));
        total += stochastic_round(0.3, rng);
    }
    CHECK(std::abs(static_cast<double>(total) / draws - 0.3) < 0.005);
}

TEST_CASE("stochastic_round preserves the sum of a long series in expectation")
{
    std::vector<double> in(200);
    for (std::size_t i = 0; i < in.size(); ++i) {
        in[i] = std::fmod(0.37 * static_cast<double>(i) + 0.11, 5.0);
    }
    const double target = std::accumulate(in.begin(), in.end(), 0.0);
    // Binomial-sum oracle: variance of one rounded sum is sum frac (1 - frac).
    double var = 0.0;
    for (double r : in) {
        const double f = r - std::floor(r);
        var += f * (1.0 - f);
    }
    constexpr int seeds = 10000;
    double mean = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        auto rng = make_rng(static_cast<std::uint64_t>(seed), 7);
        const auto out = stochastic_round(in, rng);
        mean += static_cast<double>(std::accumulate(out.begin(), out.end(), std::int64_t{0}));
    }
    mean /= seeds;
    CHECK(std::abs(mean - target) < 3.0 * std::sqrt(var / seeds));
}
