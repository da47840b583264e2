#include "epifamily/delay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "epifamily/error.hpp"

namespace epifamily {

DelayDistribution::DelayDistribution(std::vector<double> mass)
    : mass_{std::move(mass)}
{
    if (mass_.empty()) {
        throw InputError("delay distribution needs at least one lag");
    }
    double total = 0.0;
    for (double m : mass_) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw InputError("delay distribution mass must be finite and nonnegative");
        }
        total += m;
    }
    if (!(total > 0.0)) {
        throw InputError("delay distribution has zero total mass");
    }
    for (double& m : mass_) {
        m /= total;
    }
    cdf_.resize(mass_.size());
    std::partial_sum(mass_.begin(), mass_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

DelayDistribution DelayDistribution::point_mass(std::size_t lag)
{
    std::vector<double> mass(lag + 1, 0.0);
    mass[lag] = 1.0;
    return DelayDistribution(std::move(mass));
}

double DelayDistribution::mean() const noexcept
{
    double m = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        m += static_cast<double>(k) * mass_[k];
    }
    return m;
}

std::size_t DelayDistribution::min_lag() const noexcept
{
    const auto it = std::find_if(mass_.begin(), mass_.end(), [](double m) { return m > 0.0; });
    return static_cast<std::size_t>(it - mass_.begin());
}

std::size_t DelayDistribution::max_lag() const noexcept
{
    const auto it = std::find_if(mass_.rbegin(), mass_.rend(), [](double m) { return m > 0.0; });
    return mass_.size() - 1 - static_cast<std::size_t>(it - mass_.rbegin());
}

std::size_t DelayDistribution::sample(Rng& rng) const
{
    const double u = std::generate_canonical<double, 64>(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto lag = static_cast<std::size_t>(it - cdf_.begin());
    lag = std::min(lag, mass_.size() - 1);
    // Skip zero-mass lags that share a cdf value with their predecessor.
    while (mass_[lag] == 0.0 && lag + 1 < mass_.size()) {
        ++lag;
    }
    return lag;
}

KernelFamily parse_kernel_family(std::string_view name)
{
    if (name == "delta") {
        return KernelFamily::delta;
    }
    if (name == "geometric") {
        return KernelFamily::geometric;
    }
    if (name == "gamma") {
        return KernelFamily::gamma;
    }
    throw InputError("unknown kernel family '" + std::string(name) + "' (expected delta|geometric|gamma)");
}

std::string_view to_string(KernelFamily family) noexcept
{
    switch (family) {
    case KernelFamily::delta:
        return "delta";
    case KernelFamily::geometric:
        return "geometric";
    case KernelFamily::gamma:
        return "gamma";
    }
    return "?";
}

DelayDistribution discretize_delay(KernelShape shape, double scale, std::size_t support)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InputError("kernel scale must be positive, got " + std::to_string(scale));
    }
    if (support == 0) {
        throw InputError("kernel support must be at least one day");
    }
    std::vector<double> mass(support, 0.0);
    switch (shape.family) {
    case KernelFamily::delta: {
        const double lag = std::floor(scale);
        const double frac = scale - lag;
        const auto k = static_cast<std::size_t>(lag);
        if (k >= support || (frac > 0.0 && k + 1 >= support)) {
            throw InputError("delta kernel at " + std::to_string(scale) + " exceeds support of " +
                             std::to_string(support) + " days");
        }
        mass[k] = 1.0 - frac;
        if (frac > 0.0) {
            mass[k + 1] = frac;
        }
        break;
    }
    case KernelFamily::geometric: {
        const double q = scale / (1.0 + scale);
        double w = 1.0 - q;
        for (std::size_t k = 0; k < support; ++k) {
            mass[k] = w;
            w *= q;
        }
        break;
    }
    case KernelFamily::gamma: {
        if (!(shape.gamma_shape > 0.0)) {
            throw InputError("gamma kernel shape must be positive");
        }
        const double theta = scale / shape.gamma_shape;
        double prev = 0.0;
        for (std::size_t k = 0; k < support; ++k) {
            const double edge = (static_cast<double>(k) + 0.5) / theta;
            const double cdf = boost::math::gamma_p(shape.gamma_shape, edge);
            mass[k] = std::max(cdf - prev, 0.0);
            prev = cdf;
        }
        break;
    }
    }
    return DelayDistribution(std::move(mass));
}

} // namespace epifamily
