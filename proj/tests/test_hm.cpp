#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "epifamily/error.hpp"
#include "epifamily/hm.hpp"
#include "oracles/hm_oracle.hpp"

using namespace epifamily;
using namespace epifamily::hm;

namespace {

const Date d0 = parse_date("2021-01-01");

HmParams delta_params()
{
    HmParams params;
    params.p = 0.1;
    params.mu_a = 2.0;
    params.mu_b = 3.0;
    params.shape_a = {KernelFamily::delta};
    params.shape_b = {KernelFamily::delta};
    params.support = 10;
    return params;
}

double max_rel(const std::vector<double>& got, const std::vector<double>& want)
{
    double scale = 0.0;
    for (double w : want) {
        scale = std::max(scale, std::abs(w));
    }
    double dev = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        dev = std::max(dev, std::abs(got[i] - want[i]));
    }
    return scale > 0.0 ? dev / scale : dev;
}

} // namespace

TEST_CASE("zero cases give zero output")
{
    const auto out = hm_forward(DailySeries::constant(d0, 30, 0.0), delta_params());
    for (double u : out.admissions.values()) CHECK(u == 0.0);
    for (double v : out.releases.values()) CHECK(v == 0.0);
    for (double y : out.occupancy.values()) CHECK(y == 0.0);
    CHECK(out.occupancy.size() == 31);
}

TEST_CASE("delta kernels reach a steady state of rate times stay")
{
    const auto out = hm_forward(DailySeries::constant(d0, 40, 100.0), delta_params());
    // Day index 0 is day 1.
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(out.admissions[i] == doctest::Approx(i >= 2 ? 10.0 : 0.0));
        CHECK(out.releases[i] == doctest::Approx(i >= 5 ? 10.0 : 0.0));
    }
    CHECK(out.occupancy[0] == 0.0);
    for (std::size_t i = 6; i < out.occupancy.size(); ++i) {
        CHECK(out.occupancy[i] == doctest::Approx(30.0));
    }
}

TEST_CASE("forward model rejects invalid input")
{
    CHECK_THROWS_AS(hm_forward(DailySeries(d0, {1.0, -1.0}), delta_params()), DomainError);
    auto params = delta_params();
    params.xi = DailySeries::constant(d0, 2, 20.0);
    CHECK_THROWS_AS(hm_forward(DailySeries(d0, {1.0, 1.0}), params), InputError);
    params.xi = DailySeries::constant(d0, 1, 1.0);
    CHECK_THROWS_AS(hm_forward(DailySeries(d0, {1.0, 1.0}), params), InputError);
}

TEST_CASE("forward model matches the double-loop oracle on random instances")
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> cases(0.0, 5000.0);
    std::uniform_real_distribution<double> scale(1.0, 20.0);
    std::uniform_real_distribution<double> factor(0.5, 1.5);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(400), xi(400);
        for (auto& c : x) c = cases(gen);
        for (auto& f : xi) f = factor(gen);
        HmParams params;
        params.p = 0.03;
        params.mu_a = scale(gen);
        params.mu_b = scale(gen);
        params.xi = DailySeries(d0, xi);
        const auto out = hm_forward(DailySeries(d0, x), params);

        std::vector<double> rate(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) rate[i] = params.p * xi[i];
        const auto ref = oracle::hm_double_loop(x, rate, params.kernel_a().mass(), params.kernel_b().mass());
        CHECK(max_rel(out.admissions.values(), ref.u) <= 1e-12);
        CHECK(max_rel(out.releases.values(), ref.v) <= 1e-12);
        CHECK(max_rel(out.occupancy.values(), ref.y) <= 1e-12);
    }
}

TEST_CASE("forward model properties")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> cases(0.0, 1000.0);
    std::vector<double> x(200);
    for (auto& c : x) c = cases(gen);
    HmParams params;
    params.p = 0.05;
    params.mu_a = 6.0;
    params.mu_b = 11.0;
    const auto base = hm_forward(DailySeries(d0, x), params);

    SUBCASE("stock-flow identity")
    {
        const auto& y = base.occupancy.values();
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(y[i + 1] - y[i] == doctest::Approx(base.admissions[i] - base.releases[i]).epsilon(1e-12));
        }
    }
    SUBCASE("linearity")
    {
        std::vector<double> scaled = x;
        for (auto& c : scaled) c *= 2.5;
        const auto out = hm_forward(DailySeries(d0, scaled), params);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(out.admissions[i] == doctest::Approx(2.5 * base.admissions[i]).epsilon(1e-12));
            CHECK(out.occupancy[i + 1] == doctest::Approx(2.5 * base.occupancy[i + 1]).epsilon(1e-12));
        }
    }
    SUBCASE("monotone in xi")
    {
        std::vector<double> xi(x.size(), 1.0);
        for (std::size_t i = 50; i < 80; ++i) xi[i] = 1.4;
        auto raised = params;
        raised.xi = DailySeries(d0, xi);
        const auto out = hm_forward(DailySeries(d0, x), raised);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(out.admissions[i] >= base.admissions[i]);
        }
    }
    SUBCASE("conservation on a padded tail")
    {
        std::vector<double> padded = x;
        padded.resize(x.size() + 2 * params.support + 2, 0.0);
        const auto out = hm_forward(DailySeries(d0, padded), params);
        const double hospitalised = params.p * std::accumulate(x.begin(), x.end(), 0.0);
        CHECK(out.admissions.sum() == doctest::Approx(hospitalised).epsilon(1e-12));
        CHECK(out.releases.sum() == doctest::Approx(out.admissions.sum()).epsilon(1e-12));
        CHECK(std::abs(out.occupancy[out.occupancy.size() - 1]) < 1e-9 * hospitalised);
    }
}

TEST_CASE("hm_error examples")
{
    const auto ref = DailySeries::constant(d0, 5, 100.0);
    CHECK(hm_error(ref, ref, 5) == 0.0);
    CHECK(hm_error(DailySeries::constant(d0, 5, 101.0), ref, 5) == doctest::Approx(5e-4));
    CHECK(hm_error(DailySeries(d0, {2.0}), DailySeries(d0, {0.0}), 1) == doctest::Approx(4.0));
    CHECK_THROWS_AS(hm_error(ref, ref, 6), InputError);
    CHECK_THROWS_AS(hm_error(ref, ref, 0), InputError);
    // Only the last tau reference days count.
    const DailySeries y(d0, {0.0, 0.0, 100.0, 100.0, 100.0});
    CHECK(hm_error(y, ref, 3) == 0.0);
}

TEST_CASE("hm_anchor_shift")
{
    const auto y = DailySeries::constant(d0, 10, 50.0);
    const auto same = hm_anchor_shift(y, DailySeries(d0 + 9, {50.0}));
    CHECK(same == y);
    CHECK(hm_anchor_shift(y, DailySeries(d0 + 3, {1.0, 60.0})) == DailySeries::constant(d0, 10, 60.0));

    const DailySeries ramp(d0, {0.1, 0.7, 1.9, 3.3, 4.0});
    const DailySeries ref(d0, {0.0, 0.0, 0.0, 2.3});
    const auto shifted = hm_anchor_shift(ramp, ref);
    CHECK(shifted.at(ref.last()) == 2.3);
    for (std::size_t i = 0; i + 1 < ramp.size(); ++i) {
        CHECK(shifted[i + 1] - shifted[i] == doctest::Approx(ramp[i + 1] - ramp[i]).epsilon(1e-12));
    }
}

TEST_CASE("calibration of a flat problem returns the starting point")
{
    const auto zeros = DailySeries::constant(d0, 200, 0.0);
    HmParams fixed;
    const auto fit = hm_calibrate(zeros, DailySeries::constant(d0, 150, 0.0), 20, fixed);
    CHECK(fit.err == 0.0);
    CHECK(fit.params.p == 0.01);
    CHECK(fit.params.mu_a == 5.0);
    CHECK(fit.params.mu_b == 10.0);
}

TEST_CASE("calibration recovers generating parameters")
{
    std::vector<double> x(260);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i);
        x[i] = 2000.0 + 1500.0 * std::sin(t / 25.0) + 800.0 * std::exp(-std::pow((t - 150.0) / 20.0, 2));
    }
    const DailySeries cases(d0, x);
    HmParams truth;
    truth.p = 0.02;
    truth.mu_a = 5.0;
    truth.mu_b = 9.0;
    const auto full = hm_forward(cases, truth).occupancy;
    // Reference ends 30 days before the case series; tau leaves 2n+10 transient days.
    const auto reference = full.slice(d0, d0 + 230);
    const std::size_t tau = 230 - 2 * truth.support - 10;
    HmParams fixed;
    const auto fit = hm_calibrate(cases, reference, tau, fixed);
    CHECK(fit.transient_ok);
    CHECK(std::abs(fit.params.p - truth.p) < 0.1 * truth.p);
    const auto fitted = hm_forward(cases, fit.params).occupancy;
    for (std::size_t i = 230; i < 260; ++i) {
        CHECK(std::abs(fitted[i] - full[i]) <= 0.02 * full[i]);
    }
}

TEST_CASE("calibration warns on a short transient and stays deterministic")
{
    const auto cases = DailySeries::constant(d0, 120, 500.0);
    HmParams truth;
    truth.p = 0.02;
    truth.mu_a = 4.0;
    truth.mu_b = 7.0;
    const auto reference = hm_forward(cases, truth).occupancy.slice(d0, d0 + 100);
    const auto a = hm_calibrate(cases, reference, 60, HmParams{});
    const auto b = hm_calibrate(cases, reference, 60, HmParams{});
    CHECK_FALSE(a.transient_ok);
    CHECK(a.params.p == b.params.p);
    CHECK(a.err == b.err);
    CHECK(a.iterations == b.iterations);
}
