#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epifamily/random.hpp"

namespace epifamily {

/// Probability mass over integer day lags 0..n-1 (lag 0 = same day).
class DelayDistribution {
  public:
    /// Normalizes `mass`; throws InputError if it is empty, has a negative
    /// entry, or sums to zero.
    explicit DelayDistribution(std::vector<double> mass);

    static DelayDistribution point_mass(std::size_t lag);

    std::size_t size() const noexcept { return mass_.size(); }
    const std::vector<double>& mass() const noexcept { return mass_; }
    double operator[](std::size_t lag) const { return lag < mass_.size() ? mass_[lag] : 0.0; }

    double mean() const noexcept;
    /// Smallest and largest lag carrying positive mass.
    std::size_t min_lag() const noexcept;
    std::size_t max_lag() const noexcept;

    /// Draws a lag by inversion.
    std::size_t sample(Rng& rng) const;

    friend bool operator==(const DelayDistribution&, const DelayDistribution&) = default;

  private:
    std::vector<double> mass_;
    std::vector<double> cdf_;
};

enum class KernelFamily {
    /// Point mass at `scale`, split linearly between neighbouring lags for
    /// non-integer scales so the mean equals the scale.
    delta,
    /// Geometric on 0,1,2,... with mean `scale`.
    geometric,
    /// Gamma density with fixed shape and mean `scale`, binned to lags by
    /// rounding (lag k collects [k-1/2, k+1/2)).
    gamma,
};

KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily family) noexcept;

/// Shape constant used for the gamma family unless configured otherwise.
inline constexpr double default_gamma_shape = 3.0;

struct KernelShape {
    KernelFamily family = KernelFamily::gamma;
    double gamma_shape = default_gamma_shape;

    friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// Maps a scale (the mean lag) onto a discrete distribution over `support` lags,
/// renormalized after truncation. The mean lag is strictly increasing in scale.
DelayDistribution discretize_delay(KernelShape shape, double scale, std::size_t support);
inline DelayDistribution discretize_delay(KernelFamily family, double scale, std::size_t support)
{
    return discretize_delay(KernelShape{family, default_gamma_shape}, scale, support);
}

} // namespace epifamily
