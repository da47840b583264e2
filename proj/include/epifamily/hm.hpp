#pragma once

#include <cstddef>
#include <optional>

#include "epifamily/delay.hpp"
#include "epifamily/nelder_mead.hpp"
#include "epifamily/series.hpp"

namespace epifamily::hm {

/// Parameters of one bed type (normal or ICU). Two independent instances run
/// on the same case series; there is no coupling between them.
struct HmParams {
    /// Base hospitalisation rate.
    double p = 0.0;
    /// Scale (mean lag, days) of the case-to-admission kernel.
    double mu_a = 1.0;
    /// Scale (mean stay, days) of the admission-to-release kernel.
    double mu_b = 1.0;
    KernelShape shape_a{};
    KernelShape shape_b{};
    /// Kernel support in days.
    std::size_t support = 60;
    /// A-priori rate factors; constant 1 when absent. Must cover every case day.
    std::optional<DailySeries> xi;

    DelayDistribution kernel_a() const { return discretize_delay(shape_a, mu_a, support); }
    DelayDistribution kernel_b() const { return discretize_delay(shape_b, mu_b, support); }
    /// Rate factor for a date; 1 when no factors are configured.
    double xi_at(Date date) const;
};

struct HmOutput {
    /// u_i, one per case day.
    DailySeries admissions;
    /// v_i, one per case day.
    DailySeries releases;
    /// y_1..y_{T+1}: T+1 values starting on the first case day; y_1 = 0 and
    /// y_{i+1} - y_i = u_i - v_i.
    DailySeries occupancy;
};

/// Maps daily confirmed cases onto admissions, releases and bed occupancy.
/// Cases before the first day count as zero.
HmOutput hm_forward(const DailySeries& cases, const HmParams& params);

/// Relative squared error of occupancy against the reference over the last
/// `tau` reference days: sum (y_i - ref_i)^2 / max(1, ref_i)^2.
double hm_error(const DailySeries& occupancy, const DailySeries& reference, std::size_t tau);

/// Shifts occupancy so that it matches the reference on the reference's last day.
DailySeries hm_anchor_shift(const DailySeries& occupancy, const DailySeries& reference);

struct CalibrationOptions {
    /// Starting point; its p, mu_a, mu_b seed the simplex.
    double p0 = 0.01;
    double mu_a0 = 5.0;
    double mu_b0 = 10.0;
    NelderMeadOptions simplex{};
};

struct CalibrationResult {
    HmParams params;
    double err = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// False when the transient phase is not longer than twice the kernel support.
    bool transient_ok = true;
};

/// Fits (p, mu_a, mu_b) by Nelder-Mead in log coordinates, minimizing
/// `hm_error` over the last `tau` days of `reference`. Kernel shapes, support
/// and xi are taken from `fixed`.
CalibrationResult hm_calibrate(const DailySeries& cases, const DailySeries& reference, std::size_t tau,
                               const HmParams& fixed, const CalibrationOptions& options = {});

} // namespace epifamily::hm
