#include "epifamily/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"
#include "epifamily/log.hpp"
#include "epifamily/random.hpp"

namespace epifamily::scenario {

void ScenarioSpec::validate() const
{
    if (horizon == 0) throw InputError("scenario horizon must be at least one day");
    if (!(population > 0.0)) throw InputError("population must be positive");
    if (!(transmission > 0.0 && recovery > 0.0 && recovery <= 1.0 && waning >= 0.0 && waning <= 1.0)) {
        throw InputError("SIRS rates must be positive, recovery and waning at most 1 per day (waning may be 0)");
    }
    if (!(seasonal_amplitude >= 0.0 && seasonal_amplitude <= 1.0)) {
        throw InputError("seasonal amplitude must lie in [0, 1]");
    }
    if (!(initial_S >= 0.0 && initial_I >= 0.0 && initial_R >= 0.0)) {
        throw InputError("initial conditions must be nonnegative");
    }
    if (std::abs(initial_S + initial_I + initial_R - population) > 1e-9 * population) {
        throw InputError("initial S + I + R must equal the population");
    }
    if (!(reporting > 0.0 && reporting <= 1.0)) throw InputError("reporting fraction must lie in (0, 1]");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw InputError("jitter must lie in [0, 1)");
    std::set<std::string> ids{baseline_variant};
    for (const auto& t : takeovers) {
        if (!ids.insert(t.variant).second) throw InputError("duplicate variant id '" + t.variant + "'");
        if (!std::isfinite(t.growth_rate) || !std::isfinite(t.start_day)) {
            throw InputError("takeover of " + t.variant + " needs a finite start day and growth rate");
        }
        if (!(t.transmissibility > 0.0)) throw InputError("transmissibility factors must be positive");
    }
}

std::vector<double> variant_shares(const ScenarioSpec& spec, double t)
{
    std::vector<double> logw{0.0};
    for (const auto& tk : spec.takeovers) {
        logw.push_back(tk.growth_rate * (t - tk.start_day));
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    for (double& w : logw) {
        w = std::exp(w - top);
        total += w;
    }
    for (double& w : logw) w /= total;
    return logw;
}

std::vector<Scenario> generate_scenarios(const ScenarioSpec& spec, std::size_t count)
{
    spec.validate();
    std::vector<Scenario> out;
    out.reserve(count);
    std::vector<std::string> ids{spec.baseline_variant};
    std::vector<double> factor{1.0};
    for (const auto& tk : spec.takeovers) {
        ids.push_back(tk.variant);
        factor.push_back(tk.transmissibility);
    }

    for (std::size_t k = 0; k < count; ++k) {
        auto rng = make_rng(spec.seed, k);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Scenario sc;
        sc.index = k;
        sc.transmission = spec.transmission * (1.0 + spec.jitter * u(rng));
        sc.variants = ids;
        std::vector<std::vector<double>> per_variant(ids.size(), std::vector<double>(spec.horizon));
        std::vector<double> total(spec.horizon);

        double S = spec.initial_S, I = spec.initial_I, R = spec.initial_R;
        const double N = spec.population;
        for (std::size_t t = 0; t < spec.horizon; ++t) {
            const double td = static_cast<double>(t);
            const auto shares = variant_shares(spec, td);
            double mix = 0.0;
            for (std::size_t v = 0; v < shares.size(); ++v) mix += shares[v] * factor[v];
            const double season = 1.0 + spec.seasonal_amplitude *
                                             std::cos(2.0 * std::numbers::pi * (td - spec.seasonal_peak_day) / 365.0);
            double infections = sc.transmission * season * mix * S * I / N;
            if (infections > S) {
                infections = S;
                ++sc.clipped_days;
            }
            const double recoveries = spec.recovery * I;
            const double waned = spec.waning * R;
            S += waned - infections;
            I += infections - recoveries;
            R += recoveries - waned;
            const double cases = spec.reporting * infections;
            total[t] = cases;
            for (std::size_t v = 0; v < shares.size(); ++v) per_variant[v][t] = cases * shares[v];
        }
        if (sc.clipped_days > 0) {
            logger().warn("scenario {}: new infections clipped to the susceptible pool on {} days", k,
                          sc.clipped_days);
        }
        for (auto& values : per_variant) sc.cases.emplace_back(spec.start, std::move(values));
        sc.total = DailySeries(spec.start, std::move(total));
        out.push_back(std::move(sc));
    }
    return out;
}

std::string scenario_to_csv(const Scenario& scenario)
{
    std::ostringstream os;
    os << "date,variant,count\n";
    for (std::size_t t = 0; t < scenario.total.size(); ++t) {
        const std::string date = format_date(scenario.total.start() + static_cast<long>(t));
        for (std::size_t v = 0; v < scenario.variants.size(); ++v) {
            os << date << ',' << scenario.variants[v] << ',' << csv::format_number(scenario.cases[v][t]) << '\n';
        }
    }
    return os.str();
}

} // namespace epifamily::scenario
