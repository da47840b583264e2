#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epifamily/asm.hpp"
#include "epifamily/cld.hpp"
#include "epifamily/cli.hpp"
#include "epifamily/config.hpp"
#include "epifamily/delay.hpp"
#include "epifamily/error.hpp"
#include "epifamily/hm.hpp"
#include "epifamily/iwm.hpp"
#include "epifamily/random.hpp"
#include "epifamily/scenario.hpp"
#include "epifamily/series.hpp"

namespace py = pybind11;
using namespace epifamily;
using nlohmann::json;

namespace {

DailySeries make_series(const std::string& start, std::vector<double> values)
{
    return DailySeries(parse_date(start), std::move(values));
}

KernelShape shape_of(const std::string& family, double gamma_shape)
{
    return KernelShape{parse_kernel_family(family), gamma_shape};
}

hm::HmParams hm_params(double p, double mu_a, double mu_b, const std::string& shape_a, const std::string& shape_b,
                       double gamma_shape, std::size_t support)
{
    hm::HmParams params;
    params.p = p;
    params.mu_a = mu_a;
    params.mu_b = mu_b;
    params.shape_a = shape_of(shape_a, gamma_shape);
    params.shape_b = shape_of(shape_b, gamma_shape);
    params.support = support;
    return params;
}

std::string run_iwm_json(const std::string& config_path, std::uint64_t seed)
{
    auto src = config::Source::load(config_path);
    const auto setup = config::load_iwm(src);
    auto rng = make_rng(seed);
    const auto tl = iwm::run_iwm(setup.config, rng);
    const auto curves = iwm::protection_curves(tl, setup.infection_target, setup.severe_target);
    return json{{"start", format_date(tl.start)},
                {"N", tl.N},
                {"observables", tl.observables},
                {"immune", tl.immune},
                {"census", tl.census},
                {"detected_infection_events", tl.detected_infection_events},
                {"protection_infection", curves.infection.values()},
                {"protection_severe", curves.severe.values()}}
        .dump();
}

std::string run_asm_json(const std::string& config_path)
{
    auto src = config::Source::load(config_path);
    const auto s = config::load_asm(src);
    const auto tr = asm_model::asm_integrate(s.state0, s.params, s.mesh, s.horizon, 0, s.calibration.integration);
    std::vector<double> population;
    for (const auto& st : tr.states) population.push_back(st.total(s.mesh));
    return json{{"start", format_date(s.start)},
                {"incidence", tr.incidence},
                {"population", population},
                {"boundary_outflow", tr.boundary_outflow}}
        .dump();
}

std::string scenarios_json(const std::string& config_path)
{
    auto src = config::Source::load(config_path);
    const auto setup = config::load_scenarios(src);
    json out = json::array();
    for (const auto& sc : scenario::generate_scenarios(setup.spec, setup.count)) {
        json cases = json::object();
        for (std::size_t v = 0; v < sc.variants.size(); ++v) cases[sc.variants[v]] = sc.cases[v].values();
        out.push_back({{"index", sc.index},
                       {"start", format_date(sc.total.start())},
                       {"transmission", sc.transmission},
                       {"cases", cases},
                       {"total", sc.total.values()}});
    }
    return out.dump();
}

std::string cld_coverage_json(const std::string& system, const std::vector<std::pair<std::string, std::string>>& models)
{
    std::vector<std::pair<std::string, cld::CldGraph>> graphs;
    for (const auto& [name, text] : models) graphs.emplace_back(name, cld::parse_cld(text, name));
    return cld::to_json(cld::coverage_report(cld::parse_cld(system, "system"), graphs)).dump();
}

py::tuple run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cli::run_command(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bindings for the epifamily model family.";

    static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InputError& e) {
            PyErr_SetString(input_error.ptr(), e.what());
        } catch (const NumericalError& e) {
            PyErr_SetString(numerical_error.ptr(), e.what());
        }
    });

    py::class_<DailySeries>(m, "DailySeries")
        .def(py::init(&make_series), py::arg("start"), py::arg("values"))
        .def_property_readonly("start", [](const DailySeries& s) { return format_date(s.start()); })
        .def_property_readonly("values", &DailySeries::values)
        .def("at", [](const DailySeries& s, const std::string& d) { return s.at(parse_date(d)); })
        .def("__len__", &DailySeries::size)
        .def("__eq__", [](const DailySeries& a, const DailySeries& b) { return a == b; })
        .def("__repr__", [](const DailySeries& s) {
            return "DailySeries(start=" + format_date(s.start()) + ", size=" + std::to_string(s.size()) + ")";
        });

    m.def(
        "discretize_delay",
        [](const std::string& family, double scale, std::size_t support, double gamma_shape) {
            return discretize_delay(shape_of(family, gamma_shape), scale, support).mass();
        },
        py::arg("family"), py::arg("scale"), py::arg("support"), py::arg("gamma_shape") = default_gamma_shape,
        "Probability mass on lags 0..support-1 with mean `scale`.");

    m.def(
        "stochastic_round",
        [](const std::vector<double>& values, std::uint64_t seed) {
            auto rng = make_rng(seed);
            return stochastic_round(values, rng);
        },
        py::arg("values"), py::arg("seed") = 0);

    m.def(
        "hm_forward",
        [](const DailySeries& cases, double p, double mu_a, double mu_b, const std::string& shape_a,
           const std::string& shape_b, double gamma_shape, std::size_t support, std::optional<DailySeries> xi) {
            auto params = hm_params(p, mu_a, mu_b, shape_a, shape_b, gamma_shape, support);
            params.xi = std::move(xi);
            const auto out = hm::hm_forward(cases, params);
            return py::make_tuple(out.admissions, out.releases, out.occupancy);
        },
        py::arg("cases"), py::arg("p"), py::arg("mu_a"), py::arg("mu_b"), py::arg("shape_a") = "gamma",
        py::arg("shape_b") = "gamma", py::arg("gamma_shape") = default_gamma_shape, py::arg("support") = 60,
        py::arg("xi") = py::none(), "Returns (admissions, releases, occupancy).");

    m.def(
        "hm_calibrate",
        [](const DailySeries& cases, const DailySeries& reference, std::size_t tau, const std::string& shape_a,
           const std::string& shape_b, double gamma_shape, std::size_t support) {
            const auto fixed = hm_params(0.01, 5.0, 10.0, shape_a, shape_b, gamma_shape, support);
            const auto fit = hm::hm_calibrate(cases, reference, tau, fixed);
            py::dict d;
            d["p"] = fit.params.p;
            d["mu_a"] = fit.params.mu_a;
            d["mu_b"] = fit.params.mu_b;
            d["err"] = fit.err;
            d["iterations"] = fit.iterations;
            d["converged"] = fit.converged;
            d["transient_ok"] = fit.transient_ok;
            return d;
        },
        py::arg("cases"), py::arg("reference"), py::arg("tau"), py::arg("shape_a") = "gamma",
        py::arg("shape_b") = "gamma", py::arg("gamma_shape") = default_gamma_shape, py::arg("support") = 60);

    m.def("_run_iwm", &run_iwm_json, py::arg("config_path"), py::arg("seed") = 0);
    m.def("_run_asm", &run_asm_json, py::arg("config_path"));
    m.def("_generate_scenarios", &scenarios_json, py::arg("config_path"));
    m.def("_cld_coverage", &cld_coverage_json, py::arg("system"), py::arg("models"));
    m.def("cld_roundtrip", [](const std::string& text) { return cld::serialize_cld(cld::parse_cld(text)); });
    m.def("run_command", &run_cli, py::arg("args"), "Runs one CLI command; returns (exit_code, stdout, stderr).");
}
