#include <doctest.h>

#include <cmath>

#include "epifamily/error.hpp"
#include "epifamily/scenario.hpp"

using namespace epifamily;
using namespace epifamily::scenario;

namespace {

ScenarioSpec basic()
{
    ScenarioSpec spec;
    spec.start = parse_date("2022-01-03");
    spec.horizon = 150;
    spec.population = 1e6;
    spec.initial_S = 9e5;
    spec.initial_I = 1e3;
    spec.initial_R = 1e6 - 9e5 - 1e3;
    spec.transmission = 0.25;
    spec.recovery = 0.1;
    spec.waning = 0.005;
    return spec;
}

} // namespace

TEST_CASE("subcritical epidemic decays monotonically")
{
    auto spec = basic();
    spec.transmission = 0.08;
    spec.waning = 0.0;
    const auto sc = generate_scenarios(spec, 1).at(0);
    for (std::size_t t = 1; t < sc.total.size(); ++t) CHECK(sc.total[t] < sc.total[t - 1]);
}

TEST_CASE("takeover share crosses one half at its start day")
{
    auto spec = basic();
    spec.takeovers = {Takeover{"omicron", 30.0, 0.3, 1.5}};
    CHECK(variant_shares(spec, 30.0)[1] == doctest::Approx(0.5));
    CHECK(variant_shares(spec, 29.0)[1] < 0.5);
    CHECK(variant_shares(spec, 31.0)[1] > 0.5);
    const auto sc = generate_scenarios(spec, 1).at(0);
    CHECK(sc.cases[1][29] < sc.cases[0][29]);
    CHECK(sc.cases[1][31] > sc.cases[0][31]);
}

TEST_CASE("shares stay on the simplex and totals stay bounded")
{
    auto spec = basic();
    spec.seasonal_amplitude = 0.4;
    spec.takeovers = {Takeover{"a", 40.0, 0.2, 1.3}, Takeover{"b", 90.0, 0.15, 1.8}};
    spec.jitter = 0.1;
    spec.seed = 17;
    for (double t = 0.0; t < 150.0; t += 1.0) {
        const auto s = variant_shares(spec, t);
        double sum = 0.0;
        for (double v : s) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto all = generate_scenarios(spec, 4);
    REQUIRE(all.size() == 4);
    for (const auto& sc : all) {
        CHECK(sc.total.nonnegative());
        CHECK(sc.total.sum() <= spec.population * 10.0);
        for (std::size_t t = 0; t < sc.total.size(); ++t) {
            double sum = 0.0;
            for (const auto& v : sc.cases) sum += v[t];
            CHECK(sum == doctest::Approx(sc.total[t]).epsilon(1e-12));
        }
    }
    CHECK(all[0].transmission != all[1].transmission);
}

TEST_CASE("same seed gives identical scenarios")
{
    auto spec = basic();
    spec.jitter = 0.2;
    spec.seed = 5;
    const auto a = generate_scenarios(spec, 3);
    const auto b = generate_scenarios(spec, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(a[k].total == b[k].total);
        CHECK(scenario_to_csv(a[k]) == scenario_to_csv(b[k]));
    }
}

TEST_CASE("explosive parameters are clipped to the susceptible pool")
{
    auto spec = basic();
    spec.initial_S = 5e5;
    spec.initial_I = 5e5;
    spec.initial_R = 0.0;
    spec.transmission = 50.0;
    spec.recovery = 1.0;
    const auto sc = generate_scenarios(spec, 1).at(0);
    CHECK(sc.clipped_days > 0);
    CHECK(sc.total[0] == doctest::Approx(5e5));
}

TEST_CASE("scenario validation")
{
    auto spec = basic();
    spec.initial_S = 1.0;
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = basic();
    spec.takeovers = {Takeover{"baseline", 3.0, 0.1, 1.0}};
    CHECK_THROWS_AS(spec.validate(), InputError);
}
