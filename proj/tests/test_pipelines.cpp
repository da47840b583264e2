#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epifamily/error.hpp"
#include "epifamily/pipelines.hpp"
#include "epifamily/random.hpp"
#include "oracles/iwm_oracle.hpp"

using namespace epifamily;
using namespace epifamily::pipelines;

namespace {

const Date d0 = parse_date("2021-09-01");

hm::HmParams delta_params()
{
    hm::HmParams p;
    p.p = 0.1;
    p.mu_a = 2.0;
    p.mu_b = 3.0;
    p.shape_a = {KernelFamily::delta};
    p.shape_b = {KernelFamily::delta};
    p.support = 10;
    return p;
}

hm::HmParams gamma_params()
{
    hm::HmParams p;
    p.p = 0.02;
    p.mu_a = 5.0;
    p.mu_b = 9.0;
    p.support = 60;
    return p;
}

DailySeries wave(Date start, std::size_t days, double peak, double center)
{
    std::vector<double> v(days);
    for (std::size_t i = 0; i < days; ++i) {
        const double x = (static_cast<double>(i) - center) / 15.0;
        v[i] = 20.0 + peak * std::exp(-x * x);
    }
    return DailySeries(start, std::move(v));
}

iwm::IwmConfig iwm_config(std::size_t N, std::size_t T)
{
    iwm::IwmConfig c;
    c.N = N;
    c.T = T;
    c.start = d0;
    c.observables = {"infection", "severe"};
    iwm::Variant v;
    v.id = "wt";
    v.infection_observable = 0;
    v.recovery = {{0.6, 0.9}, {90.0, 200.0}, {}};
    c.variants = {v};
    for (auto& s : c.shots)
        s = {{0.0, 0.0}, {1.0, 1.0}, {}};
    c.undetected_factor = 0.0;
    c.p_rd = DelayDistribution::point_mass(10);
    c.p_ru = DelayDistribution::point_mass(10);
    return c;
}

asm_model::AsmParams asm_params(const asm_model::AgeMesh& mesh)
{
    asm_model::AsmParams p;
    p.kappa = asm_model::Kernel::constant(mesh.size(), 0.0);
    for (std::size_t i = 0; i < mesh.size(); ++i)
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            const double d = mesh.node(i) - mesh.node(j);
            p.kappa(i, j) = 0.2 + 2.0 * std::exp(-d * d / 128.0);
        }
    p.beta_hat.assign(mesh.size(), 1.0);
    p.gamma.assign(mesh.size(), 0.1);
    p.beta_steps = {0.18, 0.2, 0.22, 0.2, 0.16, 0.15, 0.14};
    return p;
}

asm_model::AsmState asm_state(const asm_model::AgeMesh& mesh, double old_vaccinated)
{
    std::vector<asm_model::AgeBin> bins;
    for (int a = 0; a < 90; a += 10) {
        const double people = 1e5;
        const double vacc = a >= 60 ? old_vaccinated * people : 0.0;
        bins.push_back({double(a), double(a + 10), {people - vacc - 20.0, vacc, 20.0, 0.0, 0.0}});
    }
    return asm_model::asm_initialize(bins, 3.0, mesh);
}

iwm::ProtectionCurves curves(Date start, const std::vector<double>& pi, const std::vector<double>& ps)
{
    return {DailySeries(start, pi), DailySeries(start, ps)};
}

} // namespace

TEST_CASE("ss1 identity factor and linearity")
{
    const auto history = DailySeries::constant(d0, 40, 100.0);
    const auto scenario = DailySeries::constant(d0 + 40, 60, 100.0);
    const auto params = delta_params();
    const auto res = pipeline_ss1(history, {scenario}, {1.0, 1.3}, params);
    REQUIRE(res.cells.size() == 2);

    const auto plain = hm::hm_forward(align_and_concat(history, scenario), params);
    CHECK(res.cells[0].output.occupancy == plain.occupancy);
    CHECK(res.cells[0].output.admissions == plain.admissions);

    const auto& scaled = res.cells[1].output.occupancy;
    CHECK(plain.occupancy[99] == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(scaled[99] == doctest::Approx(1.3 * plain.occupancy[99]).epsilon(1e-12));
    // Before the forecast start plus the admission lag nothing changes.
    for (std::size_t i = 0; i <= 42; ++i)
        CHECK(scaled[i] == plain.occupancy[i]);

    CHECK_THROWS_AS(pipeline_ss1(history, {scenario}, {0.0}, params), InputError);
    CHECK_THROWS_AS(pipeline_ss1(history, {DailySeries::constant(d0 + 41, 5, 1.0)}, {1.0}, params), AlignmentError);
}

TEST_CASE("ss1 grid matches individual runs")
{
    const auto history = wave(d0, 120, 300.0, 60.0);
    const std::vector<DailySeries> scenarios{wave(d0 + 120, 60, 500.0, 30.0), wave(d0 + 120, 60, 100.0, 10.0)};
    auto params = gamma_params();
    std::vector<double> xi(180);
    for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = 1.0 + 0.002 * static_cast<double>(i);
    params.xi = DailySeries(d0, xi);

    const std::vector<double> factors{1.0, 1.3};
    const auto res = pipeline_ss1(history, scenarios, factors, params, 4);
    REQUIRE(res.cells.size() == 4);
    for (const auto& cell : res.cells) {
        std::vector<double> manual_xi(180);
        for (std::size_t i = 0; i < manual_xi.size(); ++i)
            manual_xi[i] = i >= 120 ? xi[i] * cell.factor : xi[i];
        auto p = params;
        p.xi = DailySeries(d0, manual_xi);
        const auto manual = hm::hm_forward(align_and_concat(history, scenarios[cell.scenario]), p);
        CHECK(cell.output.occupancy == manual.occupancy);
        CHECK(cell.output.releases == manual.releases);
    }
    CHECK(res.report.outputs.size() == 4);
    for (const auto& s : res.report.outputs)
        CHECK(s.model == "hm");
    CHECK(res.report.inputs.at(1).model == "scenario-gen");
}

TEST_CASE("ss2 self-consistency and undefined splits")
{
    const asm_model::AgeMesh mesh(120.0, 2.0);
    auto params = asm_params(mesh);
    const auto st = asm_state(mesh, 0.0);
    const auto truth = asm_model::asm_integrate(st, params, mesh, 49);
    const DailySeries forecast(d0, truth.incidence);

    const auto res = pipeline_ss2(forecast, st, params, mesh);
    REQUIRE(res.calibration.weeks.size() == 7);
    for (std::size_t w = 0; w < 7; ++w) {
        double model = 0.0, target = 0.0;
        for (std::size_t d = 7 * w; d < 7 * w + 7; ++d) {
            model += res.calibration.trajectory.incidence[d];
            target += forecast[d];
        }
        CHECK(std::abs(model - target) <= 1e-3 * target);
        CHECK(res.calibration.weeks[w].steps <= 60);
    }
    // No vaccinated mass at all: that split is undefined, the others are returned.
    REQUIRE(res.splits[0].mean_age);
    CHECK(res.splits[0].mean_age->size() == 50);
    CHECK_FALSE(res.splits[1].mean_age);
    CHECK(!res.splits[1].error.empty());
    REQUIRE(res.splits[2].mean_age);
    CHECK(*res.splits[2].mean_age == *res.splits[0].mean_age);
    CHECK(res.report.metadata["undefined_splits"].contains("vaccinated"));
}

TEST_CASE("ss2 old-age vaccination lowers the mean case age at the peak")
{
    const asm_model::AgeMesh mesh(120.0, 2.0);
    auto params = asm_params(mesh);
    params.theta = 0.8;
    const auto control = asm_state(mesh, 0.0);
    const auto vaccinated = asm_state(mesh, 0.8);
    const auto truth = asm_model::asm_integrate(control, params, mesh, 49);
    const DailySeries forecast(d0, truth.incidence);

    const auto a = pipeline_ss2(forecast, control, params, mesh);
    const auto b = pipeline_ss2(forecast, vaccinated, params, mesh);
    CHECK(b.peak_mean_age < a.peak_mean_age);
    // With vaccinated susceptibles the vaccinated split starts once Iv has mass.
    REQUIRE(b.splits[1].mean_age);
    CHECK(b.splits[1].mean_age->start() == d0 + 1);
}

TEST_CASE("ss3 matches manual chaining and waning-only decay")
{
    const std::size_t H = 60, F = 120;
    const auto history = DailySeries::constant(d0, H, 20.0);
    const auto forecast = DailySeries::constant(d0 + static_cast<long>(H), F, 0.0);
    auto cfg = iwm_config(4000, H + F);
    cfg.variants[0].recovery = {{0.9, 0.9}, {60.0, 60.0}, {}};
    std::vector<std::uint64_t> seeds(20);
    std::iota(seeds.begin(), seeds.end(), 100);
    const auto res = pipeline_ss3({history}, {forecast}, cfg, "infection", "severe", seeds, 4);

    auto manual_cfg = cfg;
    manual_cfg.variants[0].cases = align_and_concat(history, forecast);
    auto rng = make_rng(seeds[3]);
    const auto manual = iwm::protection_curves(iwm::run_iwm(manual_cfg, rng), "infection", "severe");
    CHECK(res.runs[3].infection == manual.infection);
    CHECK(res.runs[3].severe == manual.severe);

    // Recoveries happen 10 days after infection; all inflow stops at H + 10.
    std::vector<double> recoveries(H + F, 0.0);
    for (std::size_t t = 10; t < H + 10; ++t)
        recoveries[t] = 20.0;
    const auto oracle = oracle::exponential_cohort(recoveries, 0.9, 60.0);
    std::size_t inside = 0, days = 0;
    for (std::size_t t = H + 10; t < H + F; ++t) {
        const double sigma = std::sqrt(oracle.variance[t] / double(seeds.size()));
        const double mean = res.infection.mean[t] * 4000.0;
        inside += std::abs(mean - oracle.mean[t]) <= 3.0 * sigma + 1e-9;
        ++days;
        CHECK(res.infection.mean[t] <= res.infection.mean[t - 1]);
        CHECK(res.infection.min[t] <= res.infection.mean[t]);
        CHECK(res.infection.mean[t] <= res.infection.max[t]);
    }
    CHECK(double(inside) >= 0.95 * double(days));
}

TEST_CASE("ss3 zero input and band scaling")
{
    auto cfg = iwm_config(1000, 60);
    const auto zero = pipeline_ss3({DailySeries::constant(d0, 30, 0.0)}, {DailySeries::constant(d0 + 30, 30, 0.0)},
                                   cfg, "infection", "severe", {1, 2, 3});
    for (double v : zero.infection.max.values())
        CHECK(v == 0.0);
    for (double v : zero.severe.max.values())
        CHECK(v == 0.0);

    auto width = [&](std::size_t N) {
        auto c = iwm_config(N, 100);
        const double per_capita = 0.004;
        const auto hist = DailySeries::constant(d0, 50, per_capita * double(N));
        const auto fc = DailySeries::constant(d0 + 50, 50, per_capita * double(N));
        std::vector<std::uint64_t> seeds(10);
        std::iota(seeds.begin(), seeds.end(), 1);
        const auto r = pipeline_ss3({hist}, {fc}, c, "infection", "severe", seeds, 4);
        double w = 0.0;
        for (std::size_t t = 0; t < 100; ++t)
            w += r.infection.max[t] - r.infection.min[t];
        return w / 100.0;
    };
    const double small = width(1000), large = width(10000);
    CHECK(large < small);
    CHECK(large < 0.6 * small);

    CHECK_THROWS_AS(pipeline_ss3({DailySeries::constant(d0, 30, 0.0)}, {DailySeries::constant(d0 + 31, 3, 0.0)}, cfg,
                                 "infection", "severe", {1}),
                    AlignmentError);
    CHECK_THROWS_AS(pipeline_ss3({DailySeries::constant(d0, 30, 0.0)}, {std::nullopt}, cfg, "infection", "hosp", {1}),
                    InputError);
}

TEST_CASE("ss4 ratio and contracts")
{
    CHECK(ss4_ratio(0.8, 0.5) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK_THROWS_AS(ss4_ratio(1.0, 1.0), NumericalError);

    const auto cases = wave(d0, 120, 400.0, 70.0);
    const auto params = gamma_params();
    const Date anchor = d0 + 80;

    SUBCASE("equal curves leave the occupancy unchanged")
    {
        std::vector<double> p(120);
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = 0.2 + 0.003 * static_cast<double>(i);
        const auto res = pipeline_ss4(curves(d0, p, p), cases, params, anchor);
        for (double x : res.xi.values())
            CHECK(x == 1.0);
        CHECK(res.adjusted.occupancy == res.unadjusted.occupancy);
    }
    SUBCASE("infection protection waning faster lowers occupancy")
    {
        std::vector<double> pi(120), ps(120);
        for (std::size_t i = 0; i < 120; ++i) {
            const double after = std::max(0.0, static_cast<double>(i) - 80.0);
            pi[i] = 0.5 - 0.008 * after;
            ps[i] = 0.8 - 0.002 * after;
        }
        const auto res = pipeline_ss4(curves(d0, pi, ps), cases, params, anchor);
        CHECK(res.ratio.at(anchor) == doctest::Approx(0.4).epsilon(1e-12));
        for (double x : res.xi.values()) {
            CHECK(x > 0.0);
            CHECK(x <= 1.0);
        }
        bool strictly_lower = false;
        for (Date d = anchor; d < res.adjusted.occupancy.end(); d = d + 1) {
            CHECK(res.adjusted.occupancy.at(d) <= res.unadjusted.occupancy.at(d));
            strictly_lower |= res.adjusted.occupancy.at(d) < res.unadjusted.occupancy.at(d);
        }
        CHECK(strictly_lower);
        auto manual = params;
        manual.xi = res.xi;
        CHECK(hm::hm_forward(cases, manual).occupancy == res.adjusted.occupancy);
    }
    SUBCASE("history before the anchor keeps the calibrated rate")
    {
        std::vector<double> pi(120), ps(120);
        for (std::size_t i = 0; i < 120; ++i) {
            const double t = static_cast<double>(i);
            pi[i] = i <= 80 ? 0.006 * t : 0.48 - 0.01 * (t - 80.0);
            ps[i] = i <= 80 ? 0.008 * t : 0.64;
        }
        const auto res = pipeline_ss4(curves(d0, pi, ps), cases, params, anchor);
        CHECK(res.ratio[0] > res.ratio.at(anchor));
        for (Date d = d0; d <= anchor; d = d + 1) {
            CHECK(res.xi.at(d) == 1.0);
            CHECK(res.adjusted.occupancy.at(d) == res.unadjusted.occupancy.at(d));
        }
        for (Date d = anchor + 1; d < res.adjusted.occupancy.end(); d = d + 1)
            CHECK(res.adjusted.occupancy.at(d) <= res.unadjusted.occupancy.at(d));
    }
    SUBCASE("errors")
    {
        std::vector<double> pi(120, 0.3), ps(120, 0.5);
        pi[50] = 0.6;
        try {
            pipeline_ss4(curves(d0, pi, ps), cases, params, anchor);
            FAIL("expected ContractError");
        } catch (const ContractError& e) {
            CHECK(std::string(e.what()).find("2021-10-21") != std::string::npos);
        }
        pi[50] = 1.0;
        ps[50] = 1.0;
        CHECK_THROWS_AS(pipeline_ss4(curves(d0, pi, ps), cases, params, anchor), NumericalError);
        std::vector<double> shorter(100, 0.3);
        CHECK_THROWS_AS(pipeline_ss4(curves(d0, shorter, shorter), cases, params, anchor), AlignmentError);
        CHECK_THROWS_AS(pipeline_ss4(curves(d0, ps, ps), cases, params, d0 + 500), InputError);
    }
}
