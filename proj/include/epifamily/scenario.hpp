#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "epifamily/series.hpp"

namespace epifamily::scenario {

struct Takeover {
    std::string variant;
    /// Day the new variant's share crosses 1/2 against the incumbents.
    double start_day = 0.0;
    /// Logistic growth rate of the share (1/day).
    double growth_rate = 0.1;
    /// Transmissibility relative to the baseline variant.
    double transmissibility = 1.0;
};

/// SIRS difference system standing in for an agent-based forecast.
struct ScenarioSpec {
    Date start{};
    std::size_t horizon = 120;
    double population = 1e6;
    /// Daily rates.
    double transmission = 0.2;
    double recovery = 0.1;
    double waning = 0.0;
    /// Multiplicative forcing 1 + amplitude cos(2 pi (t - peak_day) / 365).
    double seasonal_amplitude = 0.0;
    double seasonal_peak_day = 0.0;
    std::string baseline_variant = "baseline";
    std::vector<Takeover> takeovers;
    double initial_S = 0.0;
    double initial_I = 0.0;
    double initial_R = 0.0;
    /// Reported fraction of new infections.
    double reporting = 1.0;
    /// Scenario k scales transmission by 1 + jitter * U(-1, 1).
    double jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Scenario {
    std::size_t index = 0;
    double transmission = 0.0;
    std::vector<std::string> variants;
    /// Reported cases per variant, aligned with `variants`.
    std::vector<DailySeries> cases;
    DailySeries total{Date{}, {0.0}};
    /// Days on which new infections were clipped to the susceptible pool.
    std::size_t clipped_days = 0;
};

/// Variant shares on day t: softmax of log-weights growth_rate * (t - start_day),
/// baseline weight 0.
std::vector<double> variant_shares(const ScenarioSpec& spec, double t);

std::vector<Scenario> generate_scenarios(const ScenarioSpec& spec, std::size_t count);

/// `date,variant,count` rows, variants in scenario order.
std::string scenario_to_csv(const Scenario& scenario);

} // namespace epifamily::scenario
