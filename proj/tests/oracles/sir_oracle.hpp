#pragma once

// Scalar SIR reference: dS = -k I S / N, dI = k I S / N - g I, dR = g I,
// integrated with classical RK4 at a fixed small step. Values are returned at
// integer days.

#include <array>
#include <cstddef>
#include <vector>

namespace oracle {

using Sir = std::array<double, 3>;

inline std::vector<Sir> sir_rk4(Sir y, double k, double g, std::size_t days, int steps_per_day = 2000)
{
    const double N = y[0] + y[1] + y[2];
    auto f = [&](const Sir& s) {
        const double inf = k * s[1] * s[0] / N;
        return Sir{-inf, inf - g * s[1], g * s[1]};
    };
    auto axpy = [](const Sir& a, double h, const Sir& b) { return Sir{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]}; };
    std::vector<Sir> out{y};
    const double h = 1.0 / steps_per_day;
    for (std::size_t d = 0; d < days; ++d) {
        for (int s = 0; s < steps_per_day; ++s) {
            const Sir k1 = f(y);
            const Sir k2 = f(axpy(y, h / 2, k1));
            const Sir k3 = f(axpy(y, h / 2, k2));
            const Sir k4 = f(axpy(y, h, k3));
            for (int c = 0; c < 3; ++c) y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
        }
        out.push_back(y);
    }
    return out;
}

} // namespace oracle
