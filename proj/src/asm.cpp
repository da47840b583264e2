#include "epifamily/asm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <boost/numeric/odeint.hpp>

#include "epifamily/error.hpp"
#include "epifamily/log.hpp"

namespace epifamily::asm_model {

AgeMesh::AgeMesh(double a_max, double delta_a) : a_max_(a_max), delta_a_(delta_a)
{
    if (!(delta_a > 0.0) || !(a_max > 0.0)) {
        throw InputError("age mesh needs positive a_max and delta_a");
    }
    const double cells = a_max / delta_a;
    const auto n = static_cast<std::size_t>(std::llround(cells));
    if (std::abs(cells - static_cast<double>(n)) > 1e-9 * cells) {
        throw InputError("a_max must be a multiple of delta_a");
    }
    weights_.assign(n + 1, delta_a);
    weights_.front() = weights_.back() = 0.5 * delta_a;
}

double AgeMesh::integrate(const std::vector<double>& f) const
{
    if (f.size() != weights_.size()) {
        throw InputError("density has " + std::to_string(f.size()) + " nodes, mesh has " +
                         std::to_string(weights_.size()));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        total += weights_[j] * f[j];
    }
    return total;
}

AsmState AsmState::zeros(const AgeMesh& mesh)
{
    AsmState s;
    for (auto& d : s.density) {
        d.assign(mesh.size(), 0.0);
    }
    return s;
}

double AsmState::total(const AgeMesh& mesh) const
{
    double total = 0.0;
    for (const auto& d : density) {
        total += mesh.integrate(d);
    }
    return total;
}

Kernel Kernel::constant(std::size_t n, double value) { return Kernel{n, std::vector<double>(n * n, value)}; }

double AsmParams::beta_step(std::size_t day) const
{
    return beta_steps[std::min(day / 7, beta_steps.size() - 1)];
}

void AsmParams::validate(const AgeMesh& mesh) const
{
    const std::size_t n = mesh.size();
    if (kappa.n != n || kappa.values.size() != n * n) {
        throw InputError("contact kernel must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    for (double k : kappa.values) {
        if (!(k >= 0.0) || !std::isfinite(k)) throw InputError("contact kernel entries must be nonnegative");
    }
    if (beta_hat.size() != n || gamma.size() != n) {
        throw InputError("beta_hat and gamma need one value per age node");
    }
    for (double b : beta_hat) {
        if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("beta_hat must be nonnegative");
    }
    for (double g : gamma) {
        if (!(g > 0.0) || !std::isfinite(g)) throw InputError("gamma must be positive");
    }
    if (beta_steps.empty()) throw InputError("at least one beta step is required");
    for (double b : beta_steps) {
        if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("beta steps must be nonnegative");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("vaccine effectiveness theta must lie in [0, 1]");
    if (!(detection > 0.0) || !std::isfinite(detection)) throw InputError("detection factor must be positive");
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void check_state(const AsmState& state, const AgeMesh& mesh)
{
    for (std::size_t c = 0; c < compartment_count; ++c) {
        if (state.density[c].size() != mesh.size()) {
            throw InputError("compartment " + std::string(compartment_names[c]) + " does not match the age mesh");
        }
        for (double v : state.density[c]) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InputError("compartment " + std::string(compartment_names[c]) + " has a negative density");
            }
        }
    }
}

/// Packed layout: five compartments of n nodes, then cumulative cases and
/// cumulative outflow through a_max.
class System {
  public:
    System(const AsmParams& params, const AgeMesh& mesh, double population)
        : params_(params), mesh_(mesh), n_(mesh.size()), inv_population_(1.0 / population), lambda_(n_),
          infectious_(n_)
    {
    }

    std::size_t packed_size() const noexcept { return compartment_count * n_ + 2; }
    void set_day(std::size_t day) { step_ = params_.beta_step(day); }

    void operator()(const std::vector<double>& x, std::vector<double>& dx, double /*t*/)
    {
        const auto& w = mesh_.weights();
        const double* P_S = x.data();
        const double* P_Sv = P_S + n_;
        const double* P_I = P_Sv + n_;
        const double* P_Iv = P_I + n_;
        for (std::size_t j = 0; j < n_; ++j) {
            infectious_[j] = w[j] * (P_I[j] + P_Iv[j]);
        }
        const double* k = params_.kappa.values.data();
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            const double* row = k + i * n_;
            for (std::size_t j = 0; j < n_; ++j) {
                acc += row[j] * infectious_[j];
            }
            lambda_[i] = acc;
        }

        double* d_S = dx.data();
        double* d_Sv = d_S + n_;
        double* d_I = d_Sv + n_;
        double* d_Iv = d_I + n_;
        double* d_R = d_Iv + n_;
        double cases = 0.0;
        const double vacc = 1.0 - params_.theta;
        for (std::size_t i = 0; i < n_; ++i) {
            const double force = step_ * params_.beta_hat[i] * lambda_[i] * inv_population_;
            const double inf = force * P_S[i];
            const double inf_v = vacc * force * P_Sv[i];
            const double rec = params_.gamma[i] * P_I[i];
            const double rec_v = params_.gamma[i] * P_Iv[i];
            d_S[i] = -inf;
            d_Sv[i] = -inf_v;
            d_I[i] = inf - rec;
            d_Iv[i] = inf_v - rec_v;
            d_R[i] = rec + rec_v;
            cases += w[i] * (inf + inf_v);
        }
        // Finite-volume upwind ageing on the dual cells, so the trapezoid mass
        // changes only by the flux through a_max.
        const double c = ageing_speed / mesh_.delta_a();
        double outflow = 0.0;
        for (std::size_t comp = 0; comp < compartment_count; ++comp) {
            const double* P = x.data() + comp * n_;
            double* d = dx.data() + comp * n_;
            if (n_ == 1) {
                continue;
            }
            d[0] -= 2.0 * c * P[0];
            for (std::size_t j = 1; j + 1 < n_; ++j) {
                d[j] += c * (P[j - 1] - P[j]);
            }
            d[n_ - 1] += 2.0 * c * (P[n_ - 2] - P[n_ - 1]);
            outflow += ageing_speed * P[n_ - 1];
        }
        dx[compartment_count * n_] = params_.detection * cases;
        dx[compartment_count * n_ + 1] = outflow;
    }

  private:
    const AsmParams& params_;
    const AgeMesh& mesh_;
    std::size_t n_;
    double inv_population_;
    double step_ = 0.0;
    std::vector<double> lambda_;
    std::vector<double> infectious_;
};

std::vector<double> pack(const AsmState& state, std::size_t size)
{
    std::vector<double> x;
    x.reserve(size);
    for (const auto& d : state.density) {
        x.insert(x.end(), d.begin(), d.end());
    }
    x.resize(size, 0.0);
    return x;
}

AsmState unpack(const std::vector<double>& x, std::size_t n)
{
    AsmState s;
    for (std::size_t c = 0; c < compartment_count; ++c) {
        s.density[c].assign(x.begin() + static_cast<long>(c * n), x.begin() + static_cast<long>((c + 1) * n));
    }
    return s;
}

} // namespace

AsmState asm_initialize(const std::vector<AgeBin>& raw, double bandwidth, const AgeMesh& mesh)
{
    if (raw.empty()) {
        throw InputError("no age bins given for initialization");
    }
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InputError("KDE bandwidth must be positive");
    }
    std::array<double, compartment_count> totals{};
    for (const auto& bin : raw) {
        if (!(bin.lo >= 0.0 && bin.hi > bin.lo) || !std::isfinite(bin.hi)) {
            throw InputError("age bin [" + std::to_string(bin.lo) + ", " + std::to_string(bin.hi) + ") is invalid");
        }
        for (std::size_t c = 0; c < compartment_count; ++c) {
            if (!(bin.counts[c] >= 0.0) || !std::isfinite(bin.counts[c])) {
                throw InputError("negative count in age bin starting at " + std::to_string(bin.lo));
            }
            totals[c] += bin.counts[c];
        }
    }

    AsmState state = AsmState::zeros(mesh);
    const double h = bandwidth;
    for (const auto& bin : raw) {
        const double width = bin.hi - bin.lo;
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            const double a = mesh.node(j);
            // Uniform-on-bin convolved with the Gaussian, plus its mirror image at 0.
            double shape = normal_cdf((a - bin.lo) / h) - normal_cdf((a - bin.hi) / h);
            shape += normal_cdf((-a - bin.lo) / h) - normal_cdf((-a - bin.hi) / h);
            shape /= width;
            for (std::size_t c = 0; c < compartment_count; ++c) {
                state.density[c][j] += bin.counts[c] * shape;
            }
        }
    }
    for (std::size_t c = 0; c < compartment_count; ++c) {
        if (totals[c] == 0.0) {
            continue;
        }
        const double mass = mesh.integrate(state.density[c]);
        if (!(mass > 0.0)) {
            throw InputError("compartment " + std::string(compartment_names[c]) + " has no mass inside the age mesh");
        }
        const double scale = totals[c] / mass;
        for (double& v : state.density[c]) {
            v *= scale;
        }
    }
    return state;
}

std::vector<double> contact_lambda(const std::vector<double>& P, const Kernel& kappa, const AgeMesh& mesh)
{
    const std::size_t n = mesh.size();
    if (P.size() != n || kappa.n != n || kappa.values.size() != n * n) {
        throw InputError("contact_lambda: density, kernel and mesh sizes differ");
    }
    const auto& w = mesh.weights();
    std::vector<double> lambda(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += kappa(i, j) * w[j] * P[j];
        }
        lambda[i] = acc;
    }
    return lambda;
}

Kernel kernel_from_contacts(const std::vector<std::pair<double, double>>& bins, const std::vector<double>& matrix,
                            const AsmState& population, const AgeMesh& mesh)
{
    const std::size_t B = bins.size();
    if (B == 0 || matrix.size() != B * B) {
        throw InputError("contact matrix must be square with one row per age bin");
    }
    for (std::size_t b = 0; b < B; ++b) {
        if (!(bins[b].second > bins[b].first) || (b > 0 && bins[b].first != bins[b - 1].second)) {
            throw InputError("contact matrix age bins must be contiguous and increasing");
        }
    }
    if (bins.front().first != 0.0) {
        throw InputError("contact matrix age bins must start at age 0");
    }
    for (double c : matrix) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("contact matrix entries must be nonnegative");
    }
    check_state(population, mesh);
    const std::size_t n = mesh.size();
    std::vector<std::size_t> bin_of(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = mesh.node(j);
        std::size_t b = 0;
        while (b + 1 < B && a >= bins[b].second) ++b;
        bin_of[j] = b;
    }
    std::vector<double> bin_population(B, 0.0);
    const auto& w = mesh.weights();
    for (std::size_t j = 0; j < n; ++j) {
        double total = 0.0;
        for (const auto& d : population.density) total += d[j];
        bin_population[bin_of[j]] += w[j] * total;
    }
    const double N = population.total(mesh);
    Kernel kappa = Kernel::constant(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double nj = bin_population[bin_of[j]];
            kappa(i, j) = nj > 0.0 ? matrix[bin_of[i] * B + bin_of[j]] * N / nj : 0.0;
        }
    }
    return kappa;
}

AsmDerivative asm_rhs(const AsmState& state, const AsmParams& params, const AgeMesh& mesh, std::size_t day)
{
    params.validate(mesh);
    check_state(state, mesh);
    const double N = state.total(mesh);
    if (!(N > 0.0)) {
        throw InputError("empty population");
    }
    System system(params, mesh, N);
    system.set_day(day);
    const auto x = pack(state, system.packed_size());
    std::vector<double> dx(x.size());
    system(x, dx, 0.0);
    return AsmDerivative{unpack(dx, mesh.size()), dx[compartment_count * mesh.size()]};
}

namespace {

void warn_outflow(const Trajectory& tr, double population)
{
    if (tr.boundary_outflow > 1e-9 * population) {
        logger().warn("asm: {:.3e} persons aged past a_max = {}; widen the age mesh", tr.boundary_outflow,
                      tr.mesh.a_max());
    }
}

Trajectory integrate_days(const AsmState& state0, const AsmParams& params, const AgeMesh& mesh, std::size_t horizon,
                          std::size_t first_day, const IntegrationOptions& options)
{
    namespace odeint = boost::numeric::odeint;
    params.validate(mesh);
    check_state(state0, mesh);
    const double N = state0.total(mesh);
    if (!(N > 0.0)) {
        throw InputError("empty population");
    }
    const std::size_t n = mesh.size();
    System system(params, mesh, N);
    auto x = pack(state0, system.packed_size());
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<std::vector<double>>>(
        options.atol_per_capita * N, options.rtol);

    Trajectory out{mesh, first_day, {}, {}, 0.0, 0.0};
    out.states.reserve(horizon + 1);
    out.states.push_back(state0);
    out.incidence.reserve(horizon);
    double dt = 0.1;
    const auto& w = mesh.weights();
    for (std::size_t d = 0; d < horizon; ++d) {
        system.set_day(first_day + d);
        const double cases_before = x[compartment_count * n];
        double t = 0.0;
        while (t < 1.0) {
            double h = std::min(dt, 1.0 - t);
            const auto result = stepper.try_step(std::ref(system), x, t, h);
            if (result == odeint::success && 1.0 - t < 1e-12) {
                t = 1.0;
            }
            dt = h;
            if (dt < options.min_step) {
                throw NumericalError("asm integration: step size underflow on day " +
                                     std::to_string(first_day + d) + " (dt = " + std::to_string(dt) + ")");
            }
        }
        out.incidence.push_back(x[compartment_count * n] - cases_before);
        double clamped = 0.0;
        for (std::size_t k = 0; k < compartment_count * n; ++k) {
            if (x[k] < 0.0) {
                clamped -= w[k % n] * x[k];
                x[k] = 0.0;
            }
        }
        if (clamped > 0.0) {
            logger().debug("asm: clamped {:.3e} persons of negative density on day {}", clamped, first_day + d);
            out.clamped_mass += clamped;
        }
        out.states.push_back(unpack(x, n));
    }
    out.boundary_outflow = x[compartment_count * n + 1];
    return out;
}

} // namespace

Trajectory asm_integrate(const AsmState& state0, const AsmParams& params, const AgeMesh& mesh, std::size_t horizon,
                         std::size_t first_day, const IntegrationOptions& options)
{
    auto out = integrate_days(state0, params, mesh, horizon, first_day, options);
    warn_outflow(out, state0.total(mesh));
    return out;
}

std::vector<double> BetaCalibration::betas() const
{
    std::vector<double> out;
    out.reserve(weeks.size());
    for (const auto& w : weeks) out.push_back(w.beta);
    return out;
}

namespace {

void append(Trajectory& into, Trajectory&& week)
{
    into.states.insert(into.states.end(), std::make_move_iterator(week.states.begin() + 1),
                       std::make_move_iterator(week.states.end()));
    into.incidence.insert(into.incidence.end(), week.incidence.begin(), week.incidence.end());
    into.clamped_mass += week.clamped_mass;
    into.boundary_outflow += week.boundary_outflow;
}

} // namespace

BetaCalibration asm_calibrate_beta(const AsmParams& params, const AsmState& state0, const AgeMesh& mesh,
                                   const DailySeries& reference, std::size_t weeks,
                                   const BetaCalibrationOptions& options)
{
    if (weeks == 0) {
        throw InputError("at least one calibration week is required");
    }
    if (reference.size() < 7 * weeks) {
        throw InputError("reference has " + std::to_string(reference.size()) + " days, " + std::to_string(weeks) +
                         " weeks need " + std::to_string(7 * weeks));
    }
    if (!reference.nonnegative()) {
        throw InputError("reference cases must be nonnegative");
    }
    if (!(options.beta_lo >= 0.0 && options.beta_hi > options.beta_lo)) {
        throw InputError("beta bracket must satisfy 0 <= lo < hi");
    }
    AsmParams trial = params;
    trial.beta_steps.assign(weeks, 0.0);
    trial.validate(mesh);

    BetaCalibration result;
    result.trajectory = Trajectory{mesh, 0, {state0}, {}, 0.0, 0.0};
    AsmState state = state0;
    for (std::size_t week = 0; week < weeks; ++week) {
        WeekFit fit;
        for (std::size_t d = 0; d < 7; ++d) fit.target += reference[7 * week + d];

        Trajectory best;
        auto evaluate = [&](double beta) {
            trial.beta_steps[week] = beta;
            Trajectory tr = integrate_days(state, trial, mesh, 7, 7 * week, options.integration);
            const double total = std::accumulate(tr.incidence.begin(), tr.incidence.end(), 0.0);
            return std::make_pair(total, std::move(tr));
        };
        auto accept = [&](double beta, double model, Trajectory&& tr) {
            fit.beta = beta;
            fit.model = model;
            best = std::move(tr);
        };
        const double tol = options.rel_tol * fit.target;

        double lo = options.beta_lo;
        double hi = options.beta_hi;
        auto [f_lo, tr_lo] = evaluate(lo);
        if (fit.target == 0.0) {
            fit.degenerate = true;
            fit.converged = true;
            accept(lo, f_lo, std::move(tr_lo));
            logger().warn("asm calibration: week {} has zero reference cases; beta pinned to {}", week, lo);
        }
        else {
            if (f_lo > fit.target + tol) {
                throw NumericalError("asm calibration: week " + std::to_string(week) +
                                     " reference is below the model response at beta = " + std::to_string(lo));
            }
            auto [f_hi, tr_hi] = evaluate(hi);
            for (std::size_t widen = 0; f_hi < fit.target - tol; ++widen) {
                if (widen == options.max_widenings) {
                    throw NumericalError("asm calibration: week " + std::to_string(week) +
                                         " reference cannot be reached with beta <= " + std::to_string(hi));
                }
                lo = hi;
                f_lo = f_hi;
                hi *= 10.0;
                std::tie(f_hi, tr_hi) = evaluate(hi);
            }
            if (std::abs(f_lo - fit.target) <= tol) {
                fit.converged = true;
                accept(lo, f_lo, evaluate(lo).second);
            }
            else if (std::abs(f_hi - fit.target) <= tol) {
                fit.converged = true;
                accept(hi, f_hi, std::move(tr_hi));
            }
            else {
                double best_gap = std::numeric_limits<double>::infinity();
                while (fit.steps < options.max_steps) {
                    ++fit.steps;
                    const double mid = 0.5 * (lo + hi);
                    auto [f_mid, tr_mid] = evaluate(mid);
                    const double gap = std::abs(f_mid - fit.target);
                    if (gap < best_gap) {
                        best_gap = gap;
                        accept(mid, f_mid, std::move(tr_mid));
                    }
                    if (gap <= tol) {
                        fit.converged = true;
                        break;
                    }
                    (f_mid < fit.target ? lo : hi) = mid;
                }
                if (!fit.converged) {
                    logger().warn("asm calibration: week {} did not reach tolerance in {} steps", week, fit.steps);
                }
            }
        }
        state = best.states.back();
        append(result.trajectory, std::move(best));
        result.weeks.push_back(fit);
    }
    warn_outflow(result.trajectory, state0.total(mesh));
    return result;
}

Split parse_split(std::string_view name)
{
    if (name == "all") return Split::all;
    if (name == "vaccinated") return Split::vaccinated;
    if (name == "unvaccinated") return Split::unvaccinated;
    throw InputError("unknown split '" + std::string(name) + "' (expected all, vaccinated or unvaccinated)");
}

std::string_view to_string(Split split) noexcept
{
    switch (split) {
    case Split::all: return "all";
    case Split::vaccinated: return "vaccinated";
    case Split::unvaccinated: return "unvaccinated";
    }
    return "?";
}

AgeDistribution asm_age_distribution(const Trajectory& trajectory, std::size_t day, Split split)
{
    if (day < trajectory.first_day || day - trajectory.first_day >= trajectory.states.size()) {
        throw InputError("day " + std::to_string(day) + " is outside the trajectory");
    }
    const AsmState& s = trajectory.states[day - trajectory.first_day];
    const AgeMesh& mesh = trajectory.mesh;
    AgeDistribution out;
    out.density.assign(mesh.size(), 0.0);
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        if (split != Split::vaccinated) out.density[j] += s[I][j];
        if (split != Split::unvaccinated) out.density[j] += s[Iv][j];
    }
    out.mass = mesh.integrate(out.density);
    if (!(out.mass > 0.0)) {
        throw DomainError("age distribution of " + std::string(to_string(split)) + " cases is undefined on day " +
                          std::to_string(day) + ": no infectious mass");
    }
    double moment = 0.0;
    const auto& w = mesh.weights();
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        out.density[j] /= out.mass;
        moment += w[j] * mesh.node(j) * out.density[j];
    }
    out.mean_age = moment;
    return out;
}

} // namespace epifamily::asm_model
