#pragma once

// Direct double-loop evaluation of the occupancy model, written against the
// displayed sums rather than the scatter loops of the library:
//   u_i = sum_{k<=i} p xi_k x_k a_{i-k}
//   v_i = sum_{k<=i} u_k b_{i-k}
//   y_{i+1} = sum_{k<=i} (u_k - v_k),  y_1 = 0

#include <cstddef>
#include <vector>

namespace oracle {

struct HmResult {
    std::vector<double> u, v, y;
};

inline HmResult hm_double_loop(const std::vector<double>& x, const std::vector<double>& rate,
                               const std::vector<double>& a, const std::vector<double>& b)
{
    const std::size_t T = x.size();
    HmResult r{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0), std::vector<double>(T + 1, 0.0)};
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t k = 0; k <= i; ++k) {
            const std::size_t lag = i - k;
            if (lag < a.size()) {
                r.u[i] += rate[k] * x[k] * a[lag];
            }
        }
    }
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t k = 0; k <= i; ++k) {
            const std::size_t lag = i - k;
            if (lag < b.size()) {
                r.v[i] += r.u[k] * b[lag];
            }
        }
    }
    for (std::size_t i = 0; i < T; ++i) {
        double total = 0.0;
        for (std::size_t k = 0; k <= i; ++k) {
            total += r.u[k] - r.v[k];
        }
        r.y[i + 1] = total;
    }
    return r;
}

} // namespace oracle
