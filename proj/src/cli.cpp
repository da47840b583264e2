#include "epifamily/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "epifamily/asm.hpp"
#include "epifamily/cld.hpp"
#include "epifamily/config.hpp"
#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"
#include "epifamily/hm.hpp"
#include "epifamily/io.hpp"
#include "epifamily/iwm.hpp"
#include "epifamily/log.hpp"
#include "epifamily/parallel.hpp"
#include "epifamily/pipelines.hpp"
#include "epifamily/random.hpp"
#include "epifamily/scenario.hpp"

namespace epifamily::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string config;
    std::string out;
    std::string seeds;
    std::size_t jobs = 1;
    std::string format = "csv";
};

struct Context {
    std::string command;
    const Options& opts;
    config::Source source;
    io::ArtifactWriter writer;
    std::vector<std::uint64_t> seeds;

    Context(std::string cmd, const Options& o)
        : command(std::move(cmd)), opts(o), source(config::Source::load(o.config)),
          writer(o.out, io::parse_format(o.format))
    {
        if (!o.seeds.empty()) {
            seeds = parse_seeds(o.seeds);
        } else if (source.json().is_object() && source.json().contains("seeds")) {
            seeds = source.json().at("seeds").get<std::vector<std::uint64_t>>();
        } else {
            seeds = {0};
        }
        source_hash = io::sha256_hex(io::read_file(o.config));
        logger().info("{}: config {} sha256 {} seeds {}", command, o.config, source_hash, json(seeds).dump());
    }

    /// Strips fields that only the CLI reads before handing the config to a loader.
    config::Source model_source(std::initializer_list<const char*> drop) const
    {
        auto j = source.json();
        for (const char* key : drop)
            j.erase(key);
        return config::Source(std::move(j), source.base_dir(), source.origin());
    }

    void finish(const config::Source& used)
    {
        writer.add_input(opts.config);
        for (const auto& p : used.inputs())
            writer.add_input(p);
        writer.set("command", command);
        writer.set("config", {{"path", opts.config}, {"sha256", source_hash}});
        writer.set("seeds", seeds);
        writer.set("tool", {{"name", "epifamily"}, {"version", "0.1.0"}});
        writer.finish();
    }

    std::string source_hash;
};

io::OutTable immunity_table(const iwm::ImmunityTimelines& tl)
{
    io::OutTable t;
    t.columns = {"date", "observable", "immune_count", "immune_fraction"};
    for (std::size_t d = 0; d < tl.days(); ++d) {
        const auto date = format_date(tl.start + static_cast<long>(d));
        for (std::size_t o = 0; o < tl.observables.size(); ++o)
            t.rows.push_back({date, tl.observables[o], tl.immune[d][o],
                              static_cast<double>(tl.immune[d][o]) / static_cast<double>(tl.N)});
    }
    return t;
}

io::OutTable census_table(const iwm::ImmunityTimelines& tl)
{
    io::OutTable t;
    t.columns = {"date"};
    for (std::size_t k = 0; k < iwm::census_size; ++k)
        t.columns.push_back(iwm::census_label(k));
    for (std::size_t d = 0; d < tl.days(); ++d) {
        auto& row = t.rows.emplace_back();
        row.emplace_back(format_date(tl.start + static_cast<long>(d)));
        for (auto c : tl.census[d])
            row.emplace_back(c);
    }
    return t;
}

io::OutTable hm_table(const hm::HmOutput& out, const std::optional<DailySeries>& shifted)
{
    io::OutTable t;
    t.columns = {"date", "admissions", "releases", "occupancy"};
    const auto& occ = shifted ? *shifted : out.occupancy;
    for (std::size_t i = 0; i < out.admissions.size(); ++i) {
        const Date d = out.admissions.start() + static_cast<long>(i);
        t.rows.push_back({format_date(d), out.admissions[i], out.releases[i], occ.at(d)});
    }
    return t;
}

io::OutTable density_table(const asm_model::Trajectory& tr, Date start, std::size_t every)
{
    io::OutTable t;
    t.columns = {"date", "age"};
    for (auto name : asm_model::compartment_names)
        t.columns.emplace_back(name);
    for (std::size_t d = 0; d < tr.states.size(); d += every) {
        const auto date = format_date(start + static_cast<long>(tr.first_day + d));
        for (std::size_t j = 0; j < tr.mesh.size(); ++j) {
            auto& row = t.rows.emplace_back();
            row.emplace_back(date);
            row.emplace_back(tr.mesh.node(j));
            for (std::size_t c = 0; c < asm_model::compartment_count; ++c)
                row.emplace_back(tr.states[d].density[c][j]);
        }
    }
    return t;
}

io::OutTable cases_table(const std::vector<double>& incidence, Date start)
{
    return io::series_table(DailySeries(start, incidence), "cases");
}

json hm_params_json(const hm::HmParams& p)
{
    auto shape = [](const KernelShape& s) {
        json j{{"family", std::string(to_string(s.family))}};
        if (s.family == KernelFamily::gamma)
            j["shape"] = s.gamma_shape;
        return j;
    };
    return {{"p", p.p}, {"mu_a", p.mu_a}, {"mu_b", p.mu_b}, {"shape_a", shape(p.shape_a)},
            {"shape_b", shape(p.shape_b)}, {"support", p.support}};
}

json trajectory_summary(const asm_model::Trajectory& tr)
{
    return {{"clamped_mass", tr.clamped_mass},
            {"boundary_outflow", tr.boundary_outflow},
            {"final_population", tr.states.back().total(tr.mesh)}};
}

void write_report(Context& ctx, const pipelines::PipelineReport& report)
{
    for (const auto* group : {&report.inputs, &report.outputs})
        for (const auto& s : *group)
            ctx.writer.write_table(s.name, io::series_table(s.series, s.name));
    auto j = report.to_json();
    j["config_sha256"] = ctx.source_hash;
    j["seeds"] = ctx.seeds;
    ctx.writer.write_json("report.json", j);
}

// Commands ------------------------------------------------------------------

void iwm_run(Context& ctx)
{
    auto src = ctx.model_source({"seeds"});
    const auto setup = config::load_iwm(src);
    setup.config.validate();
    std::vector<std::optional<iwm::ImmunityTimelines>> runs(ctx.seeds.size());
    parallel_for(ctx.seeds.size(), ctx.opts.jobs, [&](std::size_t i) {
        auto rng = make_rng(ctx.seeds[i]);
        runs[i] = iwm::run_iwm(setup.config, rng);
    });
    json summary = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto suffix = "_seed" + std::to_string(ctx.seeds[i]);
        ctx.writer.write_table("immunity" + suffix, immunity_table(*runs[i]));
        ctx.writer.write_table("census" + suffix, census_table(*runs[i]));
        summary.push_back({{"seed", ctx.seeds[i]},
                           {"external_events", runs[i]->external_events},
                           {"skipped_events", runs[i]->skipped_events},
                           {"detected_infection_events", runs[i]->detected_infection_events}});
    }
    ctx.writer.write_json("summary.json", {{"runs", summary}});
    ctx.finish(src);
}

void hm_forecast(Context& ctx, bool calibrate)
{
    auto src = ctx.model_source({});
    auto setup = config::load_hm(src);
    auto params = setup.params;
    if (calibrate) {
        if (!setup.reference)
            throw InputError(src.origin() + ": hm calibrate needs reference_csv");
        const auto fit = hm::hm_calibrate(setup.cases, *setup.reference, setup.tau, params, setup.calibration);
        params = fit.params;
        ctx.writer.write_json("calibration.json", {{"params", hm_params_json(params)},
                                                   {"err", fit.err},
                                                   {"iterations", fit.iterations},
                                                   {"converged", fit.converged},
                                                   {"transient_ok", fit.transient_ok},
                                                   {"tau", setup.tau}});
    }
    const auto out = hm::hm_forward(setup.cases, params);
    std::optional<DailySeries> shifted;
    if (setup.anchor_shift) {
        if (!setup.reference)
            throw InputError(src.origin() + ": anchor_shift needs reference_csv");
        shifted = hm::hm_anchor_shift(out.occupancy, *setup.reference);
    }
    ctx.writer.write_table("occupancy", hm_table(out, shifted));
    ctx.finish(src);
}

void asm_command(Context& ctx, bool calibrate)
{
    auto src = ctx.model_source({});
    const auto setup = config::load_asm(src);
    if (calibrate) {
        if (!setup.reference)
            throw InputError(src.origin() + ": asm calibrate needs reference_csv");
        if (setup.reference->start() != setup.start)
            throw AlignmentError("reference starts on " + format_date(setup.reference->start()) +
                                 " but the simulation starts on " + format_date(setup.start));
        const auto fit = asm_model::asm_calibrate_beta(setup.params, setup.state0, setup.mesh, *setup.reference,
                                                       setup.weeks, setup.calibration);
        json weeks = json::array();
        for (const auto& w : fit.weeks)
            weeks.push_back({{"beta", w.beta},
                             {"target", w.target},
                             {"model", w.model},
                             {"steps", w.steps},
                             {"converged", w.converged},
                             {"degenerate", w.degenerate}});
        ctx.writer.write_json("beta.json",
                              {{"betas", fit.betas()}, {"weeks", weeks}, {"summary", trajectory_summary(fit.trajectory)}});
        ctx.writer.write_table("cases", cases_table(fit.trajectory.incidence, setup.start));
        ctx.writer.write_table("density", density_table(fit.trajectory, setup.start, setup.output_every));
    } else {
        const auto tr =
            asm_model::asm_integrate(setup.state0, setup.params, setup.mesh, setup.horizon, 0, setup.calibration.integration);
        ctx.writer.write_table("cases", cases_table(tr.incidence, setup.start));
        ctx.writer.write_table("density", density_table(tr, setup.start, setup.output_every));
        ctx.writer.write_json("summary.json", trajectory_summary(tr));
    }
    ctx.finish(src);
}

void scenarios_generate(Context& ctx)
{
    auto src = ctx.model_source({"seeds"});
    auto setup = config::load_scenarios(src);
    const bool override_seed = !ctx.opts.seeds.empty();
    if (!override_seed) {
        ctx.seeds = {setup.spec.seed};
        logger().info("scenarios generate: using seed {} from the config", setup.spec.seed);
    }
    json summary = json::array();
    for (auto seed : ctx.seeds) {
        setup.spec.seed = seed;
        for (const auto& s : scenario::generate_scenarios(setup.spec, setup.count)) {
            const auto stem = "scenario_seed" + std::to_string(seed) + "_" + std::to_string(s.index);
            io::OutTable t;
            t.columns = {"date", "variant", "count"};
            for (std::size_t d = 0; d < s.total.size(); ++d)
                for (std::size_t v = 0; v < s.variants.size(); ++v)
                    t.rows.push_back({format_date(s.total.start() + static_cast<long>(d)), s.variants[v], s.cases[v][d]});
            ctx.writer.write_table(stem, t);
            summary.push_back({{"file", stem}, {"seed", seed}, {"index", s.index}, {"transmission", s.transmission},
                               {"clipped_days", s.clipped_days}, {"total_cases", s.total.sum()}});
        }
    }
    ctx.writer.write_json("summary.json", {{"scenarios", summary}});
    ctx.finish(src);
}

/// Loads a nested model config referenced by `key`.
config::Source nested(Context& ctx, const char* key)
{
    const auto& j = ctx.source.json();
    if (!j.contains(key))
        throw InputError(ctx.source.origin() + ": missing field '" + key + "'");
    return config::Source::load(ctx.source.path(j.at(key).get<std::string>()));
}

std::vector<scenario::Scenario> pipeline_scenarios(Context& ctx, config::Source& used)
{
    auto src = nested(ctx, "scenario_config");
    auto setup = config::load_scenarios(src);
    used.add_inputs(src);
    return scenario::generate_scenarios(setup.spec, setup.count);
}

void check_pipeline_keys(const Context& ctx, std::initializer_list<std::string_view> allowed)
{
    for (const auto& [key, value] : ctx.source.json().items())
        if (key != "pipeline" && key != "seeds" && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InputError(ctx.source.origin() + ": unknown field '" + key + "'");
}

void pipeline_command(Context& ctx, const std::string& which)
{
    const auto& j = ctx.source.json();
    if (j.contains("pipeline") && j.at("pipeline").get<std::string>() != which)
        throw InputError(ctx.source.origin() + ": config is for pipeline '" + j.at("pipeline").get<std::string>() +
                         "', not '" + which + "'");
    config::Source used(json::object(), ctx.source.base_dir(), ctx.source.origin());

    if (which == "ss1") {
        check_pipeline_keys(ctx, {"hm_config", "scenario_config", "scenario_csvs", "factors", "calibrate"});
        auto hm_src = nested(ctx, "hm_config");
        const auto hm_setup = config::load_hm(hm_src);
        used.add_inputs(hm_src);
        auto params = hm_setup.params;
        if (j.value("calibrate", false)) {
            if (!hm_setup.reference)
                throw InputError(hm_src.origin() + ": calibration needs reference_csv");
            params = hm::hm_calibrate(hm_setup.cases, *hm_setup.reference, hm_setup.tau, params, hm_setup.calibration)
                         .params;
        }
        std::vector<DailySeries> scenarios;
        if (j.contains("scenario_csvs")) {
            for (const auto& p : j.at("scenario_csvs"))
                scenarios.push_back(config::read_cases_csv(ctx.source.path(p.get<std::string>())).total());
        } else {
            for (const auto& s : pipeline_scenarios(ctx, used))
                scenarios.push_back(s.total);
        }
        const auto factors = j.value("factors", std::vector<double>{1.0});
        auto res = pipelines::pipeline_ss1(hm_setup.cases, scenarios, factors, params, ctx.opts.jobs);
        res.report.metadata["hm_params"] = hm_params_json(params);
        write_report(ctx, res.report);
    } else if (which == "ss2") {
        check_pipeline_keys(ctx, {"asm_config", "forecast_csv", "scenario_config", "weeks"});
        auto asm_src = nested(ctx, "asm_config");
        const auto setup = config::load_asm(asm_src);
        used.add_inputs(asm_src);
        std::optional<DailySeries> forecast;
        if (j.contains("forecast_csv"))
            forecast = config::read_cases_csv(ctx.source.path(j.at("forecast_csv").get<std::string>())).total();
        else if (j.contains("scenario_config"))
            forecast = pipeline_scenarios(ctx, used).front().total;
        else if (setup.reference)
            forecast = setup.reference;
        else
            throw InputError(ctx.source.origin() + ": ss2 needs forecast_csv, scenario_config or a reference");
        const auto weeks = j.value("weeks", setup.weeks);
        const auto res = pipelines::pipeline_ss2(*forecast, setup.state0, setup.params, setup.mesh, weeks,
                                                 setup.calibration);
        write_report(ctx, res.report);
    } else if (which == "ss3" || which == "ss4") {
        if (which == "ss3")
            check_pipeline_keys(ctx, {"iwm_config", "forecast_csv", "scenario_config"});
        else
            check_pipeline_keys(ctx, {"iwm_config", "forecast_csv", "scenario_config", "hm_config", "anchor"});
        auto iwm_src = nested(ctx, "iwm_config");
        const auto setup = config::load_iwm(iwm_src);
        used.add_inputs(iwm_src);
        std::vector<DailySeries> history;
        std::vector<std::optional<DailySeries>> forecast;
        std::optional<config::VariantCases> fc;
        if (j.contains("forecast_csv")) {
            fc = config::read_cases_csv(ctx.source.path(j.at("forecast_csv").get<std::string>()));
        } else if (j.contains("scenario_config")) {
            const auto s = pipeline_scenarios(ctx, used).front();
            fc = config::VariantCases{s.variants, s.cases};
        }
        for (const auto& v : setup.config.variants) {
            if (!v.cases)
                throw InputError(iwm_src.origin() + ": variant '" + v.id + "' has no case history");
            history.push_back(*v.cases);
            std::optional<DailySeries> f;
            if (fc && std::find(fc->variants.begin(), fc->variants.end(), v.id) != fc->variants.end())
                f = fc->of(v.id);
            forecast.push_back(f);
        }
        auto cfg = setup.config;
        if (!iwm_src.json().contains("T"))
            cfg.T = 0;
        auto res = pipelines::pipeline_ss3(history, forecast, cfg, setup.infection_target, setup.severe_target,
                                           ctx.seeds, ctx.opts.jobs);
        if (which == "ss3") {
            write_report(ctx, res.report);
        } else {
            auto hm_src = nested(ctx, "hm_config");
            const auto hm_setup = config::load_hm(hm_src);
            used.add_inputs(hm_src);
            Date anchor = hm_setup.reference ? hm_setup.reference->last() : hm_setup.cases.last();
            if (j.contains("anchor"))
                anchor = parse_date(j.at("anchor").get<std::string>());
            const iwm::ProtectionCurves mean{res.infection.mean, res.severe.mean};
            auto res4 = pipelines::pipeline_ss4(mean, hm_setup.cases, hm_setup.params, anchor);
            res4.report.metadata["seeds"] = ctx.seeds;
            write_report(ctx, res4.report);
        }
    } else {
        throw InputError("unknown pipeline '" + which + "'");
    }
    ctx.finish(used);
}

void cld_check(Context& ctx)
{
    const auto& j = ctx.source.json();
    for (const auto& [key, value] : j.items())
        if (key != "system" && key != "models")
            throw InputError(ctx.source.origin() + ": unknown field '" + key + "'");
    if (!j.contains("system") || !j.contains("models"))
        throw InputError(ctx.source.origin() + ": cld config needs 'system' and 'models'");
    const auto system = cld::read_cld(ctx.source.path(j.at("system").get<std::string>()));
    std::vector<std::pair<std::string, cld::CldGraph>> models;
    for (const auto& m : j.at("models")) {
        const auto name = m.at("name").get<std::string>();
        models.emplace_back(name, cld::read_cld(ctx.source.path(m.at("file").get<std::string>())));
    }
    const auto report = cld::coverage_report(system, models);
    ctx.writer.write_json("coverage.json", cld::to_json(report));
    ctx.writer.write_text("system.dot", cld::to_dot(system, "system"));
    for (const auto& [name, graph] : models)
        ctx.writer.write_text(name + ".dot", cld::to_dot(graph, name));
    ctx.finish(ctx.source);
}

void emit_error(std::ostream& err, std::string_view kind, int code, std::string_view message)
{
    err << json{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}}.dump() << '\n';
}

} // namespace

std::vector<std::uint64_t> parse_seeds(std::string_view text)
{
    auto number = [&](std::string_view s) {
        s = csv::trim(s);
        const long v = csv::to_long(s, "--seeds", 0);
        if (v < 0)
            throw InputError("seeds must be nonnegative");
        return static_cast<std::uint64_t>(v);
    };
    std::vector<std::uint64_t> seeds;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto a = number(text.substr(0, dots));
        const auto b = number(text.substr(dots + 2));
        if (b < a)
            throw InputError("seed range " + std::string(text) + " is empty");
        if (b - a >= 100000)
            throw InputError("seed range " + std::string(text) + " is too large");
        for (auto s = a; s <= b; ++s)
            seeds.push_back(s);
    } else {
        for (auto part : csv::split(text, ','))
            seeds.push_back(number(part));
    }
    return seeds;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Model family toolkit: immunity waning, hospital occupancy, age structure, pipelines, CLD coverage",
                 "epifamily"};
    app.require_subcommand(1);
    Options opts;
    std::string pipeline_name;
    std::string selected;

    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        auto* sub = parent->add_subcommand(name, help);
        sub->add_option("--config", opts.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory")->required();
        sub->add_option("--seeds", opts.seeds, "Seeds: a..b, a,b,c or a");
        sub->add_option("--jobs", opts.jobs, "Worker threads (0 = all cores)");
        sub->add_option("--format", opts.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&selected, parent, name] {
            selected = (parent->get_name() == "epifamily" ? "" : parent->get_name() + " ") + name;
        });
        return sub;
    };

    auto* iwm_cmd = app.add_subcommand("iwm", "Immunity waning model")->require_subcommand(1);
    leaf(iwm_cmd, "run", "Simulate immunity timelines");
    auto* hm_cmd = app.add_subcommand("hm", "Hospitalisation model")->require_subcommand(1);
    leaf(hm_cmd, "calibrate", "Fit p, mu_a, mu_b to a bed-occupancy reference");
    leaf(hm_cmd, "forecast", "Map cases onto admissions, releases and occupancy");
    auto* asm_cmd = app.add_subcommand("asm", "Age structure model")->require_subcommand(1);
    leaf(asm_cmd, "run", "Integrate the age-structured model");
    leaf(asm_cmd, "calibrate", "Fit weekly beta steps to a case reference");
    auto* sc_cmd = app.add_subcommand("scenarios", "Synthetic case scenarios")->require_subcommand(1);
    leaf(sc_cmd, "generate", "Generate per-variant case scenarios");
    auto* pl_cmd = app.add_subcommand("pipeline", "Model-family pipelines")->require_subcommand(1);
    for (const char* name : {"ss1", "ss2", "ss3", "ss4"})
        leaf(pl_cmd, name, std::string("Run pipeline ") + name);
    auto* cld_cmd = app.add_subcommand("cld", "Causal loop diagrams")->require_subcommand(1);
    leaf(cld_cmd, "check", "Coverage report for a system graph and model graphs");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "usage", 2, e.what());
        return 2;
    }

    try {
        Context ctx(selected, opts);
        if (selected == "iwm run")
            iwm_run(ctx);
        else if (selected == "hm calibrate")
            hm_forecast(ctx, true);
        else if (selected == "hm forecast")
            hm_forecast(ctx, false);
        else if (selected == "asm run")
            asm_command(ctx, false);
        else if (selected == "asm calibrate")
            asm_command(ctx, true);
        else if (selected == "scenarios generate")
            scenarios_generate(ctx);
        else if (selected.rfind("pipeline ", 0) == 0)
            pipeline_command(ctx, selected.substr(9));
        else if (selected == "cld check")
            cld_check(ctx);
        else
            throw InputError("unknown command '" + selected + "'");
        return 0;
    } catch (const Error& e) {
        emit_error(err, e.kind(), e.exit_code(), e.what());
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        emit_error(err, "input", 2, e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error(err, "internal", 1, e.what());
        return 1;
    }
}

int run_command(int argc, const char* const* argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args, std::cout, std::cerr);
}

} // namespace epifamily::cli
