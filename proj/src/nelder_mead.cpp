#include "epifamily/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epifamily/error.hpp"

namespace epifamily {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

double distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

} // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options)
{
    if (x0.empty()) {
        throw InputError("nelder_mead: empty starting point");
    }
    const std::size_t dim = x0.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    Vertex best{x0, eval(x0)};
    std::size_t restarts_left = options.restarts;

    while (true) {
        std::vector<Vertex> simplex;
        simplex.push_back(best);
        for (std::size_t i = 0; i < dim; ++i) {
            auto x = best.x;
            x[i] += options.initial_step;
            simplex.push_back({x, eval(x)});
        }

        bool converged = false;
        while (result.iterations < options.max_iterations) {
            std::stable_sort(simplex.begin(), simplex.end(),
                             [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            if (simplex.front().f <= options.lower_bound) {
                converged = true;
                break;
            }
            double diameter = 0.0;
            for (std::size_t i = 1; i <= dim; ++i) {
                diameter = std::max(diameter, distance(simplex[i].x, simplex[0].x));
            }
            if (diameter < options.diameter_tolerance) {
                converged = true;
                break;
            }
            ++result.iterations;

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    centroid[j] += simplex[i].x[j] / static_cast<double>(dim);
                }
            }
            auto along = [&](double t) {
                std::vector<double> x(dim);
                for (std::size_t j = 0; j < dim; ++j) {
                    x[j] = centroid[j] + t * (simplex[dim].x[j] - centroid[j]);
                }
                return x;
            };

            auto reflected = along(-1.0);
            const double f_reflected = eval(reflected);
            if (f_reflected < simplex[0].f) {
                auto expanded = along(-2.0);
                const double f_expanded = eval(expanded);
                if (f_expanded < f_reflected) {
                    simplex[dim] = {std::move(expanded), f_expanded};
                }
                else {
                    simplex[dim] = {std::move(reflected), f_reflected};
                }
                continue;
            }
            if (f_reflected < simplex[dim - 1].f) {
                simplex[dim] = {std::move(reflected), f_reflected};
                continue;
            }
            const bool outside = f_reflected < simplex[dim].f;
            auto contracted = along(outside ? -0.5 : 0.5);
            const double f_contracted = eval(contracted);
            if (f_contracted < (outside ? f_reflected : simplex[dim].f)) {
                simplex[dim] = {std::move(contracted), f_contracted};
                continue;
            }
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    simplex[i].x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
                }
                simplex[i].f = eval(simplex[i].x);
            }
        }

        std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        const bool improved = simplex.front().f < best.f;
        if (improved) {
            best = simplex.front();
        }
        result.converged = converged;
        if (!converged || !improved || restarts_left == 0 || best.f <= options.lower_bound) {
            break;
        }
        --restarts_left;
    }

    result.x = best.x;
    result.value = best.f;
    return result;
}

} // namespace epifamily
