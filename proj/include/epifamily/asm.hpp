#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epifamily/series.hpp"

namespace epifamily::asm_model {

/// Uniform age mesh 0, da, ..., a_max (years).
class AgeMesh {
  public:
    explicit AgeMesh(double a_max = 120.0, double delta_a = 1.0);

    double a_max() const noexcept { return a_max_; }
    double delta_a() const noexcept { return delta_a_; }
    std::size_t size() const noexcept { return weights_.size(); }
    double node(std::size_t j) const noexcept { return delta_a_ * static_cast<double>(j); }
    /// Trapezoid weights; integral of f is sum w_j f_j.
    const std::vector<double>& weights() const noexcept { return weights_; }
    double integrate(const std::vector<double>& f) const;

    friend bool operator==(const AgeMesh&, const AgeMesh&) = default;

  private:
    double a_max_;
    double delta_a_;
    std::vector<double> weights_;
};

enum Compartment : std::size_t { S = 0, Sv = 1, I = 2, Iv = 3, R = 4 };
inline constexpr std::size_t compartment_count = 5;
inline constexpr std::array<std::string_view, compartment_count> compartment_names{"S", "Sv", "I", "Iv", "R"};

/// Age densities (persons per year of age) on the mesh nodes.
struct AsmState {
    std::array<std::vector<double>, compartment_count> density;

    static AsmState zeros(const AgeMesh& mesh);
    std::vector<double>& operator[](Compartment c) { return density[c]; }
    const std::vector<double>& operator[](Compartment c) const { return density[c]; }
    double total(const AgeMesh& mesh) const;

    friend bool operator==(const AsmState&, const AsmState&) = default;
};

/// Row-major square matrix over mesh nodes.
struct Kernel {
    std::size_t n = 0;
    std::vector<double> values;

    static Kernel constant(std::size_t n, double value);
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

struct AsmParams {
    /// Contact kernel kappa(a, b), contacts per day.
    Kernel kappa;
    /// Age profile of infectiousness; scaled by the weekly step beta_steps.
    std::vector<double> beta_hat;
    /// beta_i on [7i, 7i+7); the last step holds beyond the final week.
    std::vector<double> beta_steps{1.0};
    /// Recovery rate per age node (1/day).
    std::vector<double> gamma;
    /// Vaccine effectiveness.
    double theta = 0.0;
    /// Fraction of infections that appear as cases.
    double detection = 1.0;

    double beta_step(std::size_t day) const;
    void validate(const AgeMesh& mesh) const;
};

/// Ageing speed in years per day.
inline constexpr double ageing_speed = 1.0 / 365.0;

struct AgeBin {
    double lo = 0.0;
    double hi = 0.0;
    std::array<double, compartment_count> counts{};
};

/// Mass-preserving smoothing of binned counts: each bin is spread uniformly,
/// convolved with a Gaussian of the given bandwidth, reflected at age 0, and
/// rescaled so every compartment integrates to its raw total on the mesh.
AsmState asm_initialize(const std::vector<AgeBin>& raw, double bandwidth, const AgeMesh& mesh);

/// lambda(P, a_i) = integral of kappa(a_i, b) P(b) db by the trapezoid rule.
std::vector<double> contact_lambda(const std::vector<double>& P, const Kernel& kappa, const AgeMesh& mesh);

/// Kernel from a per-capita contact matrix between age bins (mean daily
/// contacts of a person in bin i with people in bin j), so that
/// lambda(P, a) / N is the contact rate with compartment P.
Kernel kernel_from_contacts(const std::vector<std::pair<double, double>>& bins, const std::vector<double>& matrix,
                            const AsmState& population, const AgeMesh& mesh);

struct AsmDerivative {
    AsmState rates;
    /// Detected infection inflow integrated over age (cases per day).
    double incidence = 0.0;
};

/// Time derivatives with first-order upwind ageing; `day` selects the beta step.
AsmDerivative asm_rhs(const AsmState& state, const AsmParams& params, const AgeMesh& mesh, std::size_t day);

struct IntegrationOptions {
    double rtol = 1e-6;
    /// Absolute tolerance relative to the population size.
    double atol_per_capita = 1e-10;
    double min_step = 1e-10;
};

struct Trajectory {
    AgeMesh mesh;
    /// Index of the first snapshot in absolute simulation days.
    std::size_t first_day = 0;
    /// Snapshots at the start of every day, horizon + 1 entries.
    std::vector<AsmState> states;
    /// Cases per day, horizon entries.
    std::vector<double> incidence;
    /// Negative mass removed by clamping after each day.
    double clamped_mass = 0.0;
    /// Mass that left through a = a_max.
    double boundary_outflow = 0.0;
};

/// Integrates day by day from `state0` at absolute day `first_day`.
Trajectory asm_integrate(const AsmState& state0, const AsmParams& params, const AgeMesh& mesh, std::size_t horizon,
                         std::size_t first_day = 0, const IntegrationOptions& options = {});

struct BetaCalibrationOptions {
    double beta_lo = 0.0;
    double beta_hi = 1.0;
    double rel_tol = 1e-3;
    std::size_t max_steps = 60;
    std::size_t max_widenings = 3;
    IntegrationOptions integration{};
};

struct WeekFit {
    double beta = 0.0;
    double target = 0.0;
    double model = 0.0;
    std::size_t steps = 0;
    bool converged = false;
    /// Zero target: beta pinned to the lower bound.
    bool degenerate = false;
};

struct BetaCalibration {
    std::vector<WeekFit> weeks;
    /// Run with the fitted steps, first day of the reference onward.
    Trajectory trajectory;

    std::vector<double> betas() const;
};

/// Fits beta_0..beta_{weeks-1} one week at a time by bisection on weekly case
/// totals. Day 0 of the simulation is the first reference day.
BetaCalibration asm_calibrate_beta(const AsmParams& params, const AsmState& state0, const AgeMesh& mesh,
                                   const DailySeries& reference, std::size_t weeks = 7,
                                   const BetaCalibrationOptions& options = {});

enum class Split { all, vaccinated, unvaccinated };
Split parse_split(std::string_view name);
std::string_view to_string(Split split) noexcept;

struct AgeDistribution {
    /// Normalized to integrate to 1.
    std::vector<double> density;
    double mean_age = 0.0;
    /// Mass before normalization.
    double mass = 0.0;
};

/// Infectious density (I + Iv, Iv or I) at absolute day `day`.
AgeDistribution asm_age_distribution(const Trajectory& trajectory, std::size_t day, Split split);

} // namespace epifamily::asm_model
