#include "epifamily/hm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epifamily/error.hpp"
#include "epifamily/log.hpp"

namespace epifamily::hm {

double HmParams::xi_at(Date date) const
{
    if (!xi) {
        return 1.0;
    }
    if (!xi->covers(date)) {
        throw InputError("rate factors xi do not cover " + format_date(date));
    }
    return xi->at(date);
}

HmOutput hm_forward(const DailySeries& cases, const HmParams& params)
{
    if (!(params.p > 0.0)) {
        throw InputError("hospitalisation rate p must be positive");
    }
    const std::size_t days = cases.size();
    std::vector<double> rate(days);
    for (std::size_t i = 0; i < days; ++i) {
        const Date date = cases.start() + static_cast<long>(i);
        if (cases[i] < 0.0) {
            throw DomainError("negative case count on " + format_date(date));
        }
        const double xi = params.xi_at(date);
        if (!(xi > 0.0)) {
            throw InputError("rate factor xi must be positive on " + format_date(date));
        }
        rate[i] = params.p * xi;
        if (!(rate[i] < 1.0)) {
            throw InputError("p * xi must stay below 1 (" + std::to_string(rate[i]) + " on " + format_date(date) +
                             ")");
        }
    }
    const auto a = params.kernel_a();
    const auto b = params.kernel_b();

    // Each day's cases are spread forward over the admission kernel, and each
    // day's admissions over the length-of-stay kernel.
    std::vector<double> admissions(days, 0.0);
    for (std::size_t i = 0; i < days; ++i) {
        const double hospitalisations = rate[i] * cases[i];
        if (hospitalisations == 0.0) {
            continue;
        }
        const std::size_t reach = std::min(a.size(), days - i);
        for (std::size_t k = 0; k < reach; ++k) {
            admissions[i + k] += hospitalisations * a[k];
        }
    }
    std::vector<double> releases(days, 0.0);
    for (std::size_t i = 0; i < days; ++i) {
        if (admissions[i] == 0.0) {
            continue;
        }
        const std::size_t reach = std::min(b.size(), days - i);
        for (std::size_t k = 0; k < reach; ++k) {
            releases[i + k] += admissions[i] * b[k];
        }
    }
    std::vector<double> occupancy(days + 1, 0.0);
    for (std::size_t i = 0; i < days; ++i) {
        occupancy[i + 1] = occupancy[i] + (admissions[i] - releases[i]);
    }
    return HmOutput{DailySeries(cases.start(), std::move(admissions)), DailySeries(cases.start(), std::move(releases)),
                    DailySeries(cases.start(), std::move(occupancy))};
}

double hm_error(const DailySeries& occupancy, const DailySeries& reference, std::size_t tau)
{
    if (tau == 0) {
        throw InputError("calibration window tau must be at least one day");
    }
    if (tau > reference.size()) {
        throw InputError("calibration window of " + std::to_string(tau) + " days exceeds reference length " +
                         std::to_string(reference.size()));
    }
    double err = 0.0;
    for (std::size_t k = reference.size() - tau; k < reference.size(); ++k) {
        const Date date = reference.start() + static_cast<long>(k);
        const double ref = reference[k];
        const double diff = occupancy.at(date) - ref;
        const double scale = std::max(1.0, ref);
        err += diff * diff / (scale * scale);
    }
    return err;
}

DailySeries hm_anchor_shift(const DailySeries& occupancy, const DailySeries& reference)
{
    const double shift = reference[reference.size() - 1] - occupancy.at(reference.last());
    std::vector<double> shifted = occupancy.values();
    for (double& y : shifted) {
        y += shift;
    }
    // The anchor day is set directly so it matches without rounding error.
    shifted[static_cast<std::size_t>(days_between(occupancy.start(), reference.last()))] =
        reference[reference.size() - 1];
    return DailySeries(occupancy.start(), std::move(shifted));
}

CalibrationResult hm_calibrate(const DailySeries& cases, const DailySeries& reference, std::size_t tau,
                               const HmParams& fixed, const CalibrationOptions& options)
{
    if (tau == 0 || tau > reference.size()) {
        throw InputError("calibration window tau must be in [1, reference length]");
    }
    const Date occupancy_end = cases.end() + 1;
    if (reference.start() < cases.start() || reference.end() > occupancy_end) {
        throw InputError("reference [" + format_date(reference.start()) + ", " + format_date(reference.last()) +
                         "] is not covered by the simulated occupancy of the case series");
    }
    if (!(options.p0 > 0.0 && options.mu_a0 > 0.0 && options.mu_b0 > 0.0)) {
        throw InputError("calibration starting point must be positive");
    }

    CalibrationResult result;
    // Days before the calibration window (1-based index of its first day, minus one).
    const Date window_start = reference.start() + static_cast<long>(reference.size() - tau);
    const long transient = days_between(cases.start(), window_start);
    result.transient_ok = transient > 2 * static_cast<long>(fixed.support);
    if (!result.transient_ok) {
        logger().warn("hm calibration: transient phase of {} days is not longer than 2n = {}", transient,
                      2 * fixed.support);
    }

    auto params_at = [&](std::span<const double> z) {
        HmParams p = fixed;
        p.p = std::exp(z[0]);
        p.mu_a = std::exp(z[1]);
        p.mu_b = std::exp(z[2]);
        return p;
    };
    auto objective = [&](std::span<const double> z) {
        try {
            return hm_error(hm_forward(cases, params_at(z)).occupancy, reference, tau);
        }
        catch (const InputError&) {
            // Infeasible point: p * xi >= 1 or a kernel that does not fit the support.
            return std::numeric_limits<double>::infinity();
        }
    };

    NelderMeadOptions simplex = options.simplex;
    simplex.initial_step = std::log1p(options.simplex.initial_step);
    simplex.lower_bound = std::max(simplex.lower_bound, 0.0);
    const std::vector<double> start{std::log(options.p0), std::log(options.mu_a0), std::log(options.mu_b0)};
    const auto fit = nelder_mead(objective, start, simplex);

    result.params = params_at(fit.x);
    if (fit.x == start) {
        // exp(log(x)) need not round-trip exactly.
        result.params.p = options.p0;
        result.params.mu_a = options.mu_a0;
        result.params.mu_b = options.mu_b0;
    }
    result.err = fit.value;
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    if (!fit.converged) {
        logger().warn("hm calibration did not converge after {} iterations (err = {})", fit.iterations, fit.value);
    }
    return result;
}

} // namespace epifamily::hm
