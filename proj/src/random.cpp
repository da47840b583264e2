#include "epifamily/random.hpp"

#include <cmath>
#include <string>

#include "epifamily/error.hpp"

namespace epifamily {

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

std::int64_t stochastic_round(double real, Rng& rng)
{
    if (!(real >= 0.0) || !std::isfinite(real)) {
        throw DomainError("stochastic_round: value must be finite and nonnegative, got " + std::to_string(real));
    }
    const double whole = std::floor(real);
    const double frac = real - whole;
    auto result = static_cast<std::int64_t>(whole);
    // Integral inputs consume no randomness so they round identically for every seed.
    if (frac > 0.0 && std::generate_canonical<double, 64>(rng) < frac) {
        ++result;
    }
    return result;
}

std::vector<std::int64_t> stochastic_round(std::span<const double> reals, Rng& rng)
{
    std::vector<std::int64_t> out;
    out.reserve(reals.size());
    for (double r : reals) {
        out.push_back(stochastic_round(r, rng));
    }
    return out;
}

} // namespace epifamily
