#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epifamily/delay.hpp"
#include "epifamily/random.hpp"
#include "epifamily/series.hpp"

namespace epifamily::iwm {

enum class CovState : std::uint8_t { inactive, active };
enum class DetectionState : std::uint8_t { null, detected, undetected };
enum class VaccinationState : std::uint8_t { null, one_shot, two_shots, three_shots };

inline constexpr std::size_t census_size = 2 * 3 * 4;
/// Census slot of an (x1, x2, x3) combination.
constexpr std::size_t census_index(CovState x1, DetectionState x2, VaccinationState x3) noexcept
{
    return static_cast<std::size_t>(x1) * 12 + static_cast<std::size_t>(x2) * 4 + static_cast<std::size_t>(x3);
}
std::string census_label(std::size_t index);

/// Unit-mean distribution of the immunity-loss time.
struct WaningDistribution {
    enum class Family { point, exponential, gamma };
    Family family = Family::exponential;
    /// Gamma shape; the scale is 1/shape so the mean stays 1.
    double shape = 2.0;

    double sample(Rng& rng) const;
    /// P(Y > y).
    double survival(double y) const;
};
WaningDistribution::Family parse_waning_family(std::string_view name);
std::string_view to_string(WaningDistribution::Family family) noexcept;

/// Immunisation outcome of one recovery or vaccination: per-observable base
/// probabilities b and mean immunity durations m (days).
struct Immunisation {
    std::vector<double> b;
    std::vector<double> m;
    WaningDistribution waning{};
};

struct Variant {
    std::string id;
    /// Index into IwmConfig::observables of immunity against infection with this variant.
    std::size_t infection_observable = 0;
    Immunisation recovery;
    /// Reported positive tests n_s(t). Days outside the series count as zero.
    std::optional<DailySeries> cases;
};

struct IwmConfig {
    std::size_t N = 0;
    /// Simulation days; day 0 is `start`.
    std::size_t T = 0;
    Date start{};
    std::vector<std::string> observables;
    std::vector<Variant> variants;
    /// Issued first, second and third shots v_k(t); integral counts.
    std::array<std::optional<DailySeries>, 3> vaccinations{};
    std::array<Immunisation, 3> shots{};

    /// Detection rate; undetected events use the factor xi / (1 + xi).
    double xi = 0.5;
    /// Replaces xi / (1 + xi) when set.
    std::optional<double> undetected_factor;
    long delta_12 = 21;
    long delta_23 = 120;
    /// Delay between shot k and its effect.
    std::array<long, 3> effect_delay{14, 14, 7};

    /// Infection to reported test.
    DelayDistribution p_d = DelayDistribution::point_mass(0);
    /// Infection to recovery, detected and undetected cases.
    DelayDistribution p_rd = DelayDistribution::point_mass(10);
    DelayDistribution p_ru = DelayDistribution::point_mass(10);

    double undetected_ratio() const noexcept { return undetected_factor ? *undetected_factor : xi / (1.0 + xi); }
    std::size_t observable_index(std::string_view id) const;
    /// Throws InputError naming the first violated constraint.
    void validate() const;
};

/// Per-variant case series n_s = n * r_s. Throws InputError when the shares
/// leave [0, 1] or sum to more than 1 on some day.
std::vector<DailySeries> split_cases(const DailySeries& total, const std::vector<DailySeries>& shares);

struct InfectionEvents {
    /// Reported-test day of every detected infection starting on this day.
    std::vector<long> detected_report_days;
    std::int64_t undetected = 0;
};

struct DayEvents {
    /// One entry per variant.
    std::vector<InfectionEvents> infections;
    std::array<std::int64_t, 3> shots{};
};

/// External events per simulation day. Infection on day t collects reports on
/// t + i weighted by p_d(i); infections that would precede day 0 start on day 0.
std::vector<DayEvents> generate_external_events(const IwmConfig& config, Rng& rng);

struct ImmunityTimelines {
    Date start{};
    std::size_t N = 0;
    std::vector<std::string> observables;
    /// immune[t][o]: entities immune against observable o at the end of day t.
    std::vector<std::vector<std::int64_t>> immune;
    /// census[t][census_index(...)] at the end of day t.
    std::vector<std::array<std::int64_t, census_size>> census;
    /// Generated detected-infection events per variant.
    std::vector<std::int64_t> detected_infection_events;
    std::int64_t external_events = 0;
    /// External events that found no eligible entity.
    std::int64_t skipped_events = 0;

    std::size_t days() const noexcept { return immune.size(); }
    std::int64_t detected_count(std::size_t day) const;

    friend bool operator==(const ImmunityTimelines&, const ImmunityTimelines&) = default;
};

ImmunityTimelines run_iwm(const IwmConfig& config, Rng& rng);

struct ProtectionCurves {
    /// Fraction immune against infection, P(PI).
    DailySeries infection;
    /// Fraction immune against severe disease, P(PS).
    DailySeries severe;
};

ProtectionCurves protection_curves(const ImmunityTimelines& timelines, std::string_view infection_target,
                                   std::string_view severe_target);
/// Immune fraction series for one observable.
DailySeries immune_fraction(const ImmunityTimelines& timelines, std::string_view observable);

} // namespace epifamily::iwm
