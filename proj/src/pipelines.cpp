#include "epifamily/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epifamily/error.hpp"
#include "epifamily/parallel.hpp"
#include "epifamily/random.hpp"

namespace epifamily::pipelines {

namespace {

nlohmann::json series_meta(const TaggedSeries& s, const char* role)
{
    return {{"name", s.name},
            {"model", s.model},
            {"role", role},
            {"start", format_date(s.series.start())},
            {"days", s.series.size()}};
}

} // namespace

void PipelineReport::add_input(std::string name, std::string model, DailySeries series)
{
    inputs.push_back({std::move(name), std::move(model), std::move(series)});
}

void PipelineReport::add_output(std::string name, std::string model, DailySeries series)
{
    outputs.push_back({std::move(name), std::move(model), std::move(series)});
}

nlohmann::json PipelineReport::to_json() const
{
    nlohmann::json j;
    j["pipeline"] = pipeline;
    j["scenario_id"] = scenario_id;
    j["series"] = nlohmann::json::array();
    for (const auto& s : inputs)
        j["series"].push_back(series_meta(s, "input"));
    for (const auto& s : outputs)
        j["series"].push_back(series_meta(s, "output"));
    j["metadata"] = metadata;
    return j;
}

DailySeries scaled_xi(const hm::HmParams& params, Date from, Date to, double factor, Date switch_day)
{
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(std::max(0L, days_between(from, to))));
    for (Date d = from; d < to; d = d + 1)
        values.push_back(d >= switch_day ? params.xi_at(d) * factor : params.xi_at(d));
    return DailySeries(from, std::move(values));
}

Ss1Result pipeline_ss1(const std::optional<DailySeries>& history, const std::vector<DailySeries>& scenarios,
                       const std::vector<double>& factors, const hm::HmParams& params, std::size_t jobs)
{
    if (scenarios.empty() || factors.empty())
        throw InputError("ss1 needs at least one case scenario and one virulence factor");
    for (double f : factors)
        if (!(f > 0.0) || !std::isfinite(f))
            throw InputError("virulence factor must be positive, got " + std::to_string(f));

    std::vector<DailySeries> cases;
    cases.reserve(scenarios.size());
    for (const auto& s : scenarios)
        cases.push_back(history ? align_and_concat(*history, s) : s);

    std::vector<std::optional<hm::HmOutput>> outputs(scenarios.size() * factors.size());
    parallel_for(outputs.size(), jobs, [&](std::size_t cell) {
        const std::size_t k = cell / factors.size();
        hm::HmParams scaled = params;
        scaled.xi = scaled_xi(params, cases[k].start(), cases[k].end(), factors[cell % factors.size()],
                              scenarios[k].start());
        outputs[cell] = hm::hm_forward(cases[k], scaled);
    });
    Ss1Result result;
    for (std::size_t cell = 0; cell < outputs.size(); ++cell)
        result.cells.push_back({cell / factors.size(), factors[cell % factors.size()], std::move(*outputs[cell])});

    auto& report = result.report;
    report.pipeline = "ss1";
    if (history)
        report.add_input("history", producer::input, *history);
    for (std::size_t k = 0; k < scenarios.size(); ++k)
        report.add_input("scenario_" + std::to_string(k), producer::scenario, scenarios[k]);
    report.metadata["factors"] = factors;
    report.metadata["cells"] = nlohmann::json::array();
    for (std::size_t cell = 0; cell < result.cells.size(); ++cell) {
        const auto& c = result.cells[cell];
        const auto name = "occupancy_s" + std::to_string(c.scenario) + "_f" + std::to_string(cell % factors.size());
        report.add_output(name, producer::hm, c.output.occupancy);
        report.metadata["cells"].push_back({{"series", name}, {"scenario", c.scenario}, {"factor", c.factor}});
    }
    return result;
}

Ss2Result pipeline_ss2(const DailySeries& forecast, const asm_model::AsmState& state0,
                       const asm_model::AsmParams& params, const asm_model::AgeMesh& mesh, std::size_t weeks,
                       const asm_model::BetaCalibrationOptions& options)
{
    using asm_model::Split;
    Ss2Result result;
    result.calibration = asm_model::asm_calibrate_beta(params, state0, mesh, forecast, weeks, options);
    const auto& traj = result.calibration.trajectory;

    const std::array<Split, 3> splits{Split::all, Split::vaccinated, Split::unvaccinated};
    for (std::size_t s = 0; s < splits.size(); ++s) {
        auto& out = result.splits[s];
        out.split = splits[s];
        // The series starts on the first day the split has mass; losing all
        // mass later leaves the split undefined.
        std::vector<double> ages;
        std::size_t first = 0;
        bool lost = false;
        for (std::size_t t = 0; t < traj.states.size() && !lost; ++t) {
            try {
                ages.push_back(asm_model::asm_age_distribution(traj, traj.first_day + t, splits[s]).mean_age);
            } catch (const DomainError& e) {
                lost = !ages.empty();
                first = t + 1;
                out.error = lost ? std::string(asm_model::to_string(splits[s])) +
                                       " split has no infectious mass on " +
                                       format_date(forecast.start() + static_cast<long>(t))
                                 : std::string(e.what());
            }
        }
        if (ages.empty() || lost)
            continue;
        out.error.clear();
        out.mean_age = DailySeries(forecast.start() + static_cast<long>(first), std::move(ages));
    }

    const auto& inc = traj.incidence;
    result.peak_day = static_cast<std::size_t>(std::max_element(inc.begin(), inc.end()) - inc.begin());
    result.peak_mean_age =
        asm_model::asm_age_distribution(traj, traj.first_day + result.peak_day, Split::all).mean_age;

    auto& report = result.report;
    report.pipeline = "ss2";
    report.add_input("forecast", producer::scenario, forecast);
    report.add_output("fitted_cases", producer::asm_model, DailySeries(forecast.start(), inc));
    for (const auto& s : result.splits)
        if (s.mean_age)
            report.add_output("mean_age_" + std::string(asm_model::to_string(s.split)), producer::asm_model,
                              *s.mean_age);
    auto& meta = report.metadata;
    meta["weeks"] = nlohmann::json::array();
    for (const auto& w : result.calibration.weeks)
        meta["weeks"].push_back({{"beta", w.beta},
                                 {"target", w.target},
                                 {"model", w.model},
                                 {"steps", w.steps},
                                 {"converged", w.converged},
                                 {"degenerate", w.degenerate}});
    meta["peak_day"] = format_date(forecast.start() + static_cast<long>(result.peak_day));
    meta["peak_mean_age"] = result.peak_mean_age;
    meta["undefined_splits"] = nlohmann::json::object();
    for (const auto& s : result.splits)
        if (!s.mean_age)
            meta["undefined_splits"][std::string(asm_model::to_string(s.split))] = s.error;
    return result;
}

Band band_of(const std::vector<DailySeries>& runs)
{
    if (runs.empty())
        throw InputError("uncertainty band needs at least one run");
    const auto n = runs.front().size();
    std::vector<double> mean(n, 0.0);
    std::vector<double> lo(n, std::numeric_limits<double>::infinity());
    std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
    for (const auto& r : runs) {
        if (r.start() != runs.front().start() || r.size() != n)
            throw AlignmentError("runs of an uncertainty band must share their dates");
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += r[i];
            lo[i] = std::min(lo[i], r[i]);
            hi[i] = std::max(hi[i], r[i]);
        }
    }
    for (auto& m : mean)
        m /= static_cast<double>(runs.size());
    const auto start = runs.front().start();
    return {DailySeries(start, std::move(mean)), DailySeries(start, std::move(lo)), DailySeries(start, std::move(hi))};
}

Ss3Result pipeline_ss3(const std::vector<DailySeries>& history,
                       const std::vector<std::optional<DailySeries>>& forecast, iwm::IwmConfig config,
                       const std::string& infection_target, const std::string& severe_target,
                       const std::vector<std::uint64_t>& seeds, std::size_t jobs)
{
    if (history.size() != config.variants.size() || forecast.size() != config.variants.size())
        throw InputError("ss3 needs one history and one forecast entry per variant");
    if (seeds.empty())
        throw InputError("ss3 needs at least one seed");
    Date end = config.start;
    for (std::size_t s = 0; s < history.size(); ++s) {
        config.variants[s].cases = align_and_concat(history[s], forecast[s]);
        end = std::max(end, config.variants[s].cases->end());
    }
    if (config.T == 0)
        config.T = static_cast<std::size_t>(std::max(1L, days_between(config.start, end)));
    config.validate();
    // Both targets must exist before any run starts.
    config.observable_index(infection_target);
    config.observable_index(severe_target);

    std::vector<std::optional<iwm::ProtectionCurves>> runs(seeds.size());
    std::vector<std::int64_t> skipped(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t i) {
        auto rng = make_rng(seeds[i]);
        const auto timelines = iwm::run_iwm(config, rng);
        skipped[i] = timelines.skipped_events;
        runs[i] = iwm::protection_curves(timelines, infection_target, severe_target);
    });

    std::vector<iwm::ProtectionCurves> curves;
    std::vector<DailySeries> pi, ps;
    for (auto& r : runs) {
        pi.push_back(r->infection);
        ps.push_back(r->severe);
        curves.push_back(std::move(*r));
    }
    Ss3Result result{seeds, std::move(curves), band_of(pi), band_of(ps), {}};

    auto& report = result.report;
    report.pipeline = "ss3";
    for (std::size_t s = 0; s < history.size(); ++s) {
        const auto& id = config.variants[s].id;
        report.add_input("history_" + id, producer::input, history[s]);
        if (forecast[s])
            report.add_input("forecast_" + id, producer::scenario, *forecast[s]);
    }
    for (const auto& [name, band] : {std::pair{"infection", &result.infection}, {"severe", &result.severe}}) {
        report.add_output(std::string(name) + "_mean", producer::iwm, band->mean);
        report.add_output(std::string(name) + "_min", producer::iwm, band->min);
        report.add_output(std::string(name) + "_max", producer::iwm, band->max);
    }
    report.metadata["seeds"] = seeds;
    report.metadata["skipped_events"] = skipped;
    report.metadata["infection_target"] = infection_target;
    report.metadata["severe_target"] = severe_target;
    return result;
}

double ss4_ratio(double ps, double pi)
{
    if (!(pi < 1.0))
        throw NumericalError("singular ratio: P(PI) = 1");
    return (1.0 - ps) / (1.0 - pi);
}

Ss4Result pipeline_ss4(const iwm::ProtectionCurves& curves, const DailySeries& cases, const hm::HmParams& params,
                       Date anchor)
{
    if (!cases.covers(anchor))
        throw InputError("anchor day " + format_date(anchor) + " lies outside the case series");
    std::vector<double> ratio;
    ratio.reserve(cases.size());
    for (Date d = cases.start(); d < cases.end(); d = d + 1) {
        if (!curves.infection.covers(d) || !curves.severe.covers(d))
            throw AlignmentError("protection curves do not cover case day " + format_date(d));
        const double pi = curves.infection.at(d);
        const double ps = curves.severe.at(d);
        if (ps < pi)
            throw ContractError("P(PS) < P(PI) on " + format_date(d) + " (" + std::to_string(ps) + " < " +
                                std::to_string(pi) + ")");
        try {
            ratio.push_back(ss4_ratio(ps, pi));
        } catch (const NumericalError&) {
            throw NumericalError("singular ratio: P(PI) = 1 on " + format_date(d));
        }
    }
    const double at_anchor = ratio[static_cast<std::size_t>(days_between(cases.start(), anchor))];
    if (!(at_anchor > 0.0))
        throw NumericalError("ratio vanishes on the anchor day " + format_date(anchor));

    // History up to the anchor keeps the calibrated rate.
    const auto anchor_index = static_cast<std::size_t>(days_between(cases.start(), anchor));
    std::vector<double> xi(ratio.size());
    for (std::size_t i = 0; i < ratio.size(); ++i)
        xi[i] = params.xi_at(cases.start() + static_cast<long>(i)) * (i > anchor_index ? ratio[i] / at_anchor : 1.0);
    hm::HmParams adjusted = params;
    adjusted.xi = DailySeries(cases.start(), std::move(xi));

    Ss4Result result{DailySeries(cases.start(), std::move(ratio)), *adjusted.xi, anchor,
                     hm::hm_forward(cases, adjusted), hm::hm_forward(cases, params), {}};

    auto& report = result.report;
    report.pipeline = "ss4";
    report.add_input("cases", producer::input, cases);
    report.add_input("protection_infection", producer::iwm, curves.infection);
    report.add_input("protection_severe", producer::iwm, curves.severe);
    report.add_output("ratio", producer::ss4, result.ratio);
    report.add_output("xi", producer::ss4, result.xi);
    report.add_output("occupancy_adjusted", producer::hm, result.adjusted.occupancy);
    report.add_output("occupancy_unadjusted", producer::hm, result.unadjusted.occupancy);
    report.metadata["anchor"] = format_date(anchor);
    return result;
}

} // namespace epifamily::pipelines
