#include "epifamily/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"
#include "epifamily/io.hpp"

namespace epifamily::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!j.is_object())
        throw InputError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InputError(std::string(where) + ": unknown field '" + key + "'");
    }
}

template <class T>
T required(const json& j, const char* key, std::string_view where)
{
    if (!j.contains(key))
        throw InputError(std::string(where) + ": missing field '" + key + "'");
    return j.at(key).get<T>();
}

template <class T>
T optional_field(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::size_t count_field(const json& j, const char* key, std::size_t fallback, std::string_view where)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw InputError(std::string(where) + ": field '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

/// Runs a loader and turns JSON type errors into input errors naming the file.
template <class F>
auto guarded(const Source& source, F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw InputError(source.origin() + ": " + e.what());
    } catch (const Error&) {
        throw;
    }
}

/// Scalar or per-node array.
std::vector<double> node_profile(const json& j, std::size_t n, std::string_view name)
{
    if (j.is_number())
        return std::vector<double>(n, j.get<double>());
    auto v = j.get<std::vector<double>>();
    if (v.size() != n)
        throw InputError(std::string(name) + " needs one value per age node (" + std::to_string(n) + ")");
    return v;
}

iwm::Immunisation immunisation_from_json(const json& j, const std::vector<std::string>& observables,
                                         std::string_view where)
{
    check_keys(j, {"b", "m", "waning"}, where);
    iwm::Immunisation im;
    im.b.assign(observables.size(), 0.0);
    im.m.assign(observables.size(), 1.0);
    std::vector<bool> has_m(observables.size(), false);
    for (const char* key : {"b", "m"}) {
        if (!j.contains(key))
            continue;
        for (const auto& [obs, value] : j.at(key).items()) {
            const auto it = std::find(observables.begin(), observables.end(), obs);
            if (it == observables.end())
                throw InputError(std::string(where) + ": unknown observable '" + obs + "'");
            const auto o = static_cast<std::size_t>(it - observables.begin());
            (key[0] == 'b' ? im.b : im.m)[o] = value.get<double>();
            if (key[0] == 'm')
                has_m[o] = true;
        }
    }
    for (std::size_t o = 0; o < observables.size(); ++o)
        if (im.b[o] > 0.0 && !has_m[o])
            throw InputError(std::string(where) + ": observable '" + observables[o] +
                             "' has b > 0 but no mean duration m");
    if (j.contains("waning")) {
        const auto& w = j.at("waning");
        check_keys(w, {"family", "shape"}, std::string(where) + ".waning");
        im.waning.family = iwm::parse_waning_family(required<std::string>(w, "family", where));
        im.waning.shape = optional_field(w, "shape", im.waning.shape);
    }
    return im;
}

DailySeries column_series(const std::filesystem::path& path, std::string_view column)
{
    const auto table = csv::read(path);
    const auto origin = path.string();
    const auto dc = table.column("date");
    const auto vc = table.column(column);
    if (table.rows.empty())
        throw InputError(origin + ": no rows");
    const Date start = parse_date(table.rows.front()[dc]);
    std::vector<double> values;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Date d = parse_date(table.rows[r][dc]);
        if (d != start + static_cast<long>(r))
            throw InputError(origin + ":" + std::to_string(table.lines[r]) + ": date " + format_date(d) +
                             " breaks the daily sequence");
        values.push_back(csv::to_double(table.rows[r][vc], origin, table.lines[r]));
    }
    return DailySeries(start, std::move(values));
}

std::pair<double, double> parse_bin(std::string_view label, std::string_view origin)
{
    const auto dash = label.find('-');
    if (dash == std::string_view::npos || dash == 0)
        throw InputError(std::string(origin) + ": age bin label '" + std::string(label) + "' is not 'lo-hi'");
    const double lo = csv::to_double(label.substr(0, dash), origin, 1);
    const double hi = csv::to_double(label.substr(dash + 1), origin, 1);
    if (!(hi > lo && lo >= 0.0))
        throw InputError(std::string(origin) + ": empty age bin '" + std::string(label) + "'");
    return {lo, hi};
}

} // namespace

Source::Source(nlohmann::json j, std::filesystem::path base_dir, std::string origin)
    : json_(std::move(j)), base_dir_(std::move(base_dir)), origin_(std::move(origin))
{
}

Source Source::load(const std::filesystem::path& path)
{
    const auto text = io::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
    Source s(std::move(j), path.parent_path(), path.string());
    s.inputs_.push_back(path);
    return s;
}

std::filesystem::path Source::path(std::string_view relative)
{
    std::filesystem::path p(relative);
    if (p.is_relative())
        p = base_dir_ / p;
    if (!std::filesystem::exists(p))
        throw InputError(origin_ + ": referenced file '" + std::string(relative) + "' does not exist");
    inputs_.push_back(p);
    return p;
}

void Source::add_inputs(const Source& other)
{
    inputs_.insert(inputs_.end(), other.inputs_.begin(), other.inputs_.end());
}

DailySeries VariantCases::total() const
{
    std::vector<double> sum(series.front().size(), 0.0);
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.size(); ++i)
            sum[i] += s[i];
    return DailySeries(series.front().start(), std::move(sum));
}

const DailySeries& VariantCases::of(std::string_view variant) const
{
    for (std::size_t i = 0; i < variants.size(); ++i)
        if (variants[i] == variant)
            return series[i];
    throw InputError("no cases for variant '" + std::string(variant) + "'");
}

VariantCases parse_cases_csv(std::string_view text, std::string_view origin)
{
    const auto table = csv::parse(text, origin);
    const std::string where(origin);
    const auto dc = table.column("date");
    const bool has_variant = std::find(table.header.begin(), table.header.end(), "variant") != table.header.end();
    const auto cc = table.column("count");
    const auto vc = has_variant ? table.column("variant") : 0;
    if (table.rows.empty())
        throw InputError(where + ": no rows");

    std::vector<std::string> order;
    std::map<std::string, std::map<Date, double>> rows;
    Date lo = Date::max(), hi = Date::min();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const Date d = parse_date(row[dc]);
        const std::string variant = has_variant ? row[vc] : "all";
        const double count = csv::to_double(row[cc], origin, table.lines[r]);
        if (count < 0.0)
            throw DomainError(where + ":" + std::to_string(table.lines[r]) + ": negative case count");
        if (!rows.count(variant))
            order.push_back(variant);
        if (!rows[variant].emplace(d, count).second)
            throw InputError(where + ":" + std::to_string(table.lines[r]) + ": duplicate row for " + variant +
                             " on " + format_date(d));
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    VariantCases out;
    const auto days = static_cast<std::size_t>(days_between(lo, hi) + 1);
    for (const auto& v : order) {
        std::vector<double> values(days, 0.0);
        for (const auto& [d, c] : rows[v])
            values[static_cast<std::size_t>(days_between(lo, d))] = c;
        out.variants.push_back(v);
        out.series.emplace_back(lo, std::move(values));
    }
    return out;
}

VariantCases read_cases_csv(const std::filesystem::path& path)
{
    return parse_cases_csv(io::read_file(path), path.string());
}

std::string cases_to_csv(const VariantCases& cases)
{
    io::OutTable t;
    t.columns = {"date", "variant", "count"};
    const auto& first = cases.series.front();
    for (std::size_t i = 0; i < first.size(); ++i)
        for (std::size_t v = 0; v < cases.variants.size(); ++v)
            t.rows.push_back({format_date(first.start() + static_cast<long>(i)), cases.variants[v], cases.series[v][i]});
    return t.to_csv();
}

std::array<std::optional<DailySeries>, 3> read_vaccinations_csv(const std::filesystem::path& path)
{
    const auto table = csv::read(path);
    const auto origin = path.string();
    const auto dc = table.column("date");
    const auto kc = table.column("dose");
    const auto cc = table.column("count");
    if (table.rows.empty())
        throw InputError(origin + ": no rows");
    std::array<std::map<Date, double>, 3> rows;
    Date lo = Date::max(), hi = Date::min();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const Date d = parse_date(row[dc]);
        const long dose = csv::to_long(row[kc], origin, table.lines[r]);
        if (dose < 1 || dose > 3)
            throw InputError(origin + ":" + std::to_string(table.lines[r]) + ": dose must be 1, 2 or 3");
        const double count = csv::to_double(row[cc], origin, table.lines[r]);
        if (!rows[static_cast<std::size_t>(dose - 1)].emplace(d, count).second)
            throw InputError(origin + ":" + std::to_string(table.lines[r]) + ": duplicate row");
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    std::array<std::optional<DailySeries>, 3> out;
    const auto days = static_cast<std::size_t>(days_between(lo, hi) + 1);
    for (std::size_t k = 0; k < 3; ++k) {
        if (rows[k].empty())
            continue;
        std::vector<double> values(days, 0.0);
        for (const auto& [d, c] : rows[k])
            values[static_cast<std::size_t>(days_between(lo, d))] = c;
        out[k] = DailySeries(lo, std::move(values));
    }
    return out;
}

std::vector<asm_model::AgeBin> read_initial_csv(const std::filesystem::path& path)
{
    const auto table = csv::read(path);
    const auto origin = path.string();
    const auto lo = table.column("age_lo");
    const auto hi = table.column("age_hi");
    std::array<std::size_t, asm_model::compartment_count> cols{};
    for (std::size_t c = 0; c < cols.size(); ++c)
        cols[c] = table.column(asm_model::compartment_names[c]);
    std::vector<asm_model::AgeBin> bins;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        asm_model::AgeBin bin;
        bin.lo = csv::to_double(row[lo], origin, table.lines[r]);
        bin.hi = csv::to_double(row[hi], origin, table.lines[r]);
        for (std::size_t c = 0; c < cols.size(); ++c)
            bin.counts[c] = csv::to_double(row[cols[c]], origin, table.lines[r]);
        bins.push_back(bin);
    }
    if (bins.empty())
        throw InputError(origin + ": no age bins");
    return bins;
}

ContactMatrix read_contact_csv(const std::filesystem::path& path)
{
    const auto table = csv::read(path);
    const auto origin = path.string();
    const auto n = table.header.size() - 1;
    if (n == 0 || table.rows.size() != n)
        throw InputError(origin + ": contact matrix must be square with a label column");
    ContactMatrix m;
    for (std::size_t j = 1; j <= n; ++j)
        m.bins.push_back(parse_bin(table.header[j], origin));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        if (parse_bin(row[0], origin) != m.bins[r])
            throw InputError(origin + ":" + std::to_string(table.lines[r]) + ": row label '" + row[0] +
                             "' does not match column " + table.header[r + 1]);
        for (std::size_t j = 1; j <= n; ++j) {
            const double v = csv::to_double(row[j], origin, table.lines[r]);
            if (v < 0.0)
                throw DomainError(origin + ":" + std::to_string(table.lines[r]) + ": negative contact rate");
            m.values.push_back(v);
        }
    }
    return m;
}

KernelShape kernel_shape_from_json(const json& j)
{
    if (j.is_string())
        return {parse_kernel_family(j.get<std::string>()), default_gamma_shape};
    check_keys(j, {"family", "shape"}, "kernel shape");
    return {parse_kernel_family(required<std::string>(j, "family", "kernel shape")),
            optional_field(j, "shape", default_gamma_shape)};
}

DelayDistribution delay_from_json(const json& j)
{
    if (j.is_number_integer())
        return DelayDistribution::point_mass(j.get<std::size_t>());
    check_keys(j, {"family", "shape", "scale", "support", "lag", "mass"}, "delay distribution");
    if (j.contains("lag"))
        return DelayDistribution::point_mass(j.at("lag").get<std::size_t>());
    if (j.contains("mass"))
        return DelayDistribution(j.at("mass").get<std::vector<double>>());
    KernelShape shape{parse_kernel_family(required<std::string>(j, "family", "delay distribution")),
                      optional_field(j, "shape", default_gamma_shape)};
    return discretize_delay(shape, required<double>(j, "scale", "delay distribution"),
                            required<std::size_t>(j, "support", "delay distribution"));
}

IwmSetup load_iwm(Source& source)
{
    return guarded(source, [&] {
        const auto& j = source.json();
        const auto& where = source.origin();
        check_keys(j,
                   {"N", "T", "start", "observables", "variants", "cases_csv", "vaccinations_csv", "shots", "xi",
                    "undetected_factor", "delta_12", "delta_23", "effect_delay", "p_d", "p_rd", "p_ru",
                    "protection"},
                   where);
        iwm::IwmConfig c;
        c.N = count_field(j, "N", 0, where);
        c.T = count_field(j, "T", 0, where);
        c.start = parse_date(required<std::string>(j, "start", where));
        c.observables = required<std::vector<std::string>>(j, "observables", where);

        std::optional<VariantCases> cases;
        if (j.contains("cases_csv"))
            cases = read_cases_csv(source.path(j.at("cases_csv").get<std::string>()));
        for (const auto& v : required<json>(j, "variants", where)) {
            check_keys(v, {"id", "infection_observable", "recovery"}, where + ": variant");
            iwm::Variant var;
            var.id = required<std::string>(v, "id", where);
            var.infection_observable = c.observable_index(required<std::string>(v, "infection_observable", where));
            var.recovery = immunisation_from_json(optional_field(v, "recovery", json::object()), c.observables,
                                                  where + ": recovery of " + var.id);
            if (cases)
                var.cases = cases->of(var.id);
            c.variants.push_back(std::move(var));
        }
        if (cases)
            for (const auto& id : cases->variants)
                if (std::none_of(c.variants.begin(), c.variants.end(), [&](const auto& v) { return v.id == id; }))
                    throw InputError(where + ": cases file has unknown variant '" + id + "'");

        if (j.contains("vaccinations_csv"))
            c.vaccinations = read_vaccinations_csv(source.path(j.at("vaccinations_csv").get<std::string>()));
        const auto shots = optional_field(j, "shots", json::array());
        if (shots.size() > 3)
            throw InputError(where + ": at most three shots");
        for (std::size_t k = 0; k < 3; ++k)
            c.shots[k] = immunisation_from_json(k < shots.size() ? shots[k] : json::object(), c.observables,
                                                where + ": shot " + std::to_string(k + 1));
        c.xi = optional_field(j, "xi", c.xi);
        if (j.contains("undetected_factor"))
            c.undetected_factor = j.at("undetected_factor").get<double>();
        c.delta_12 = optional_field(j, "delta_12", c.delta_12);
        c.delta_23 = optional_field(j, "delta_23", c.delta_23);
        c.effect_delay = optional_field(j, "effect_delay", c.effect_delay);
        if (j.contains("p_d"))
            c.p_d = delay_from_json(j.at("p_d"));
        if (j.contains("p_rd"))
            c.p_rd = delay_from_json(j.at("p_rd"));
        if (j.contains("p_ru"))
            c.p_ru = delay_from_json(j.at("p_ru"));
        if (c.T == 0 && cases)
            c.T = static_cast<std::size_t>(std::max(1L, days_between(c.start, cases->series.front().end())));

        IwmSetup setup{c, {}, {}};
        const auto protection = optional_field(j, "protection", json::object());
        check_keys(protection, {"infection", "severe"}, where + ": protection");
        setup.infection_target =
            optional_field(protection, "infection", c.observables[c.variants.empty() ? 0 : c.variants[0].infection_observable]);
        setup.severe_target = optional_field(protection, "severe", c.observables.back());
        c.observable_index(setup.infection_target);
        c.observable_index(setup.severe_target);
        return setup;
    });
}

HmSetup load_hm(Source& source)
{
    return guarded(source, [&] {
        const auto& j = source.json();
        const auto& where = source.origin();
        check_keys(j,
                   {"cases_csv", "reference_csv", "xi_csv", "p", "mu_a", "mu_b", "shape_a", "shape_b", "support",
                    "tau", "start", "simplex", "anchor_shift", "calibration_json"},
                   where);
        hm::HmParams p;
        p.p = optional_field(j, "p", 0.01);
        p.mu_a = optional_field(j, "mu_a", 5.0);
        p.mu_b = optional_field(j, "mu_b", 10.0);
        if (j.contains("calibration_json")) {
            const auto cal = Source::load(source.path(j.at("calibration_json").get<std::string>()));
            const auto& params = cal.json().at("params");
            p.p = params.at("p").get<double>();
            p.mu_a = params.at("mu_a").get<double>();
            p.mu_b = params.at("mu_b").get<double>();
        }
        if (j.contains("shape_a"))
            p.shape_a = kernel_shape_from_json(j.at("shape_a"));
        if (j.contains("shape_b"))
            p.shape_b = kernel_shape_from_json(j.at("shape_b"));
        p.support = count_field(j, "support", p.support, where);
        if (j.contains("xi_csv"))
            p.xi = column_series(source.path(j.at("xi_csv").get<std::string>()), "xi");

        const auto cases = read_cases_csv(source.path(required<std::string>(j, "cases_csv", where))).total();
        std::optional<DailySeries> reference;
        if (j.contains("reference_csv"))
            reference = column_series(source.path(j.at("reference_csv").get<std::string>()), "beds");

        HmSetup setup{p, cases, reference, 0, {}, optional_field(j, "anchor_shift", false)};
        setup.tau = count_field(j, "tau", reference ? reference->size() : 0, where);
        if (j.contains("start")) {
            const auto& s = j.at("start");
            check_keys(s, {"p", "mu_a", "mu_b"}, where + ": start");
            setup.calibration.p0 = optional_field(s, "p", setup.calibration.p0);
            setup.calibration.mu_a0 = optional_field(s, "mu_a", setup.calibration.mu_a0);
            setup.calibration.mu_b0 = optional_field(s, "mu_b", setup.calibration.mu_b0);
        }
        if (j.contains("simplex")) {
            const auto& s = j.at("simplex");
            check_keys(s, {"max_iterations", "diameter_tolerance", "restarts"}, where + ": simplex");
            auto& nm = setup.calibration.simplex;
            nm.max_iterations = count_field(s, "max_iterations", nm.max_iterations, where);
            nm.diameter_tolerance = optional_field(s, "diameter_tolerance", nm.diameter_tolerance);
            nm.restarts = count_field(s, "restarts", nm.restarts, where);
        }
        return setup;
    });
}

AsmSetup load_asm(Source& source)
{
    return guarded(source, [&] {
        const auto& j = source.json();
        const auto& where = source.origin();
        check_keys(j,
                   {"start", "mesh", "initial_csv", "bandwidth", "contacts_csv", "kappa_constant", "beta_hat",
                    "gamma", "theta", "detection", "beta_steps", "horizon", "reference_csv", "weeks",
                    "calibration", "integration", "output_every"},
                   where);
        AsmSetup s;
        if (j.contains("mesh")) {
            const auto& m = j.at("mesh");
            check_keys(m, {"a_max", "delta_a"}, where + ": mesh");
            s.mesh = asm_model::AgeMesh(optional_field(m, "a_max", 120.0), optional_field(m, "delta_a", 1.0));
        }
        const auto n = s.mesh.size();
        s.start = parse_date(required<std::string>(j, "start", where));
        const auto bins = read_initial_csv(source.path(required<std::string>(j, "initial_csv", where)));
        s.state0 = asm_model::asm_initialize(bins, optional_field(j, "bandwidth", 3.0), s.mesh);

        if (j.contains("contacts_csv") == j.contains("kappa_constant"))
            throw InputError(where + ": give exactly one of contacts_csv and kappa_constant");
        if (j.contains("contacts_csv")) {
            const auto cm = read_contact_csv(source.path(j.at("contacts_csv").get<std::string>()));
            s.params.kappa = asm_model::kernel_from_contacts(cm.bins, cm.values, s.state0, s.mesh);
        } else {
            s.params.kappa = asm_model::Kernel::constant(n, j.at("kappa_constant").get<double>());
        }
        s.params.beta_hat = node_profile(optional_field(j, "beta_hat", json(1.0)), n, "beta_hat");
        s.params.gamma = node_profile(optional_field(j, "gamma", json(0.1)), n, "gamma");
        s.params.theta = optional_field(j, "theta", 0.0);
        s.params.detection = optional_field(j, "detection", 1.0);
        s.params.beta_steps = optional_field(j, "beta_steps", s.params.beta_steps);
        s.weeks = count_field(j, "weeks", s.weeks, where);
        s.horizon = count_field(j, "horizon", 7 * s.weeks, where);
        s.output_every = std::max<std::size_t>(1, count_field(j, "output_every", 1, where));
        if (j.contains("reference_csv"))
            s.reference = read_cases_csv(source.path(j.at("reference_csv").get<std::string>())).total();
        if (j.contains("calibration")) {
            const auto& c = j.at("calibration");
            check_keys(c, {"beta_lo", "beta_hi", "rel_tol", "max_steps", "max_widenings"}, where + ": calibration");
            auto& o = s.calibration;
            o.beta_lo = optional_field(c, "beta_lo", o.beta_lo);
            o.beta_hi = optional_field(c, "beta_hi", o.beta_hi);
            o.rel_tol = optional_field(c, "rel_tol", o.rel_tol);
            o.max_steps = count_field(c, "max_steps", o.max_steps, where);
            o.max_widenings = count_field(c, "max_widenings", o.max_widenings, where);
        }
        if (j.contains("integration")) {
            const auto& c = j.at("integration");
            check_keys(c, {"rtol", "atol_per_capita"}, where + ": integration");
            s.calibration.integration.rtol = optional_field(c, "rtol", s.calibration.integration.rtol);
            s.calibration.integration.atol_per_capita =
                optional_field(c, "atol_per_capita", s.calibration.integration.atol_per_capita);
        }
        s.params.validate(s.mesh);
        return s;
    });
}

ScenarioSetup load_scenarios(Source& source)
{
    return guarded(source, [&] {
        const auto& j = source.json();
        const auto& where = source.origin();
        check_keys(j,
                   {"start", "horizon", "population", "transmission", "recovery", "waning", "seasonal_amplitude",
                    "seasonal_peak_day", "baseline_variant", "takeovers", "initial", "reporting", "jitter", "seed",
                    "count"},
                   where);
        ScenarioSetup s;
        auto& spec = s.spec;
        spec.start = parse_date(required<std::string>(j, "start", where));
        spec.horizon = count_field(j, "horizon", spec.horizon, where);
        spec.population = optional_field(j, "population", spec.population);
        spec.transmission = optional_field(j, "transmission", spec.transmission);
        spec.recovery = optional_field(j, "recovery", spec.recovery);
        spec.waning = optional_field(j, "waning", spec.waning);
        spec.seasonal_amplitude = optional_field(j, "seasonal_amplitude", spec.seasonal_amplitude);
        spec.seasonal_peak_day = optional_field(j, "seasonal_peak_day", spec.seasonal_peak_day);
        spec.baseline_variant = optional_field(j, "baseline_variant", spec.baseline_variant);
        for (const auto& t : optional_field(j, "takeovers", json::array())) {
            check_keys(t, {"variant", "start_day", "growth_rate", "transmissibility"}, where + ": takeover");
            spec.takeovers.push_back({required<std::string>(t, "variant", where), required<double>(t, "start_day", where),
                                      required<double>(t, "growth_rate", where),
                                      optional_field(t, "transmissibility", 1.0)});
        }
        const auto init = required<json>(j, "initial", where);
        check_keys(init, {"S", "I", "R"}, where + ": initial");
        spec.initial_I = required<double>(init, "I", where);
        spec.initial_R = optional_field(init, "R", 0.0);
        spec.initial_S = optional_field(init, "S", spec.population - spec.initial_I - spec.initial_R);
        spec.reporting = optional_field(j, "reporting", spec.reporting);
        spec.jitter = optional_field(j, "jitter", spec.jitter);
        spec.seed = optional_field<std::uint64_t>(j, "seed", 0);
        s.count = std::max<std::size_t>(1, count_field(j, "count", 1, where));
        spec.validate();
        return s;
    });
}

} // namespace epifamily::config
