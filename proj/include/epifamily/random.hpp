#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace epifamily {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream index), e.g. one stream per scenario.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform draw on (0, 1]; never returns 0.
inline double uniform_open_closed(Rng& rng)
{
    return 1.0 - std::generate_canonical<double, 64>(rng);
}

/// Rounds each entry r to floor(r)+1 with probability frac(r), else floor(r).
/// Unbiased per entry. Throws DomainError on negative or non-finite input.
std::vector<std::int64_t> stochastic_round(std::span<const double> reals, Rng& rng);
std::int64_t stochastic_round(double real, Rng& rng);

} // namespace epifamily
