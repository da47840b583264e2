#include "epifamily/iwm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "epifamily/error.hpp"
#include "epifamily/log.hpp"

namespace epifamily::iwm {

namespace {

/// Vector-backed set with O(1) insert, erase and uniform pick.
class IndexedSet {
  public:
    explicit IndexedSet(std::size_t universe) : pos_(universe, npos) {}

    bool contains(std::uint32_t id) const { return pos_[id] != npos; }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }

    void insert(std::uint32_t id)
    {
        if (!contains(id)) {
            pos_[id] = static_cast<std::uint32_t>(items_.size());
            items_.push_back(id);
        }
    }
    void erase(std::uint32_t id)
    {
        const std::uint32_t at = pos_[id];
        if (at == npos) {
            return;
        }
        const std::uint32_t moved = items_.back();
        items_[at] = moved;
        pos_[moved] = at;
        items_.pop_back();
        pos_[id] = npos;
    }
    std::uint32_t pick(Rng& rng) const
    {
        std::uniform_int_distribution<std::size_t> index(0, items_.size() - 1);
        return items_[index(rng)];
    }

  private:
    static constexpr std::uint32_t npos = 0xffffffffu;
    std::vector<std::uint32_t> items_;
    std::vector<std::uint32_t> pos_;
};

enum class EventKind : std::uint8_t { detection, recovery, vaccination_effect, start_immunity, end_immunity };

struct Event {
    long day;
    std::uint32_t entity;
    std::uint64_t seq;
    EventKind kind;
    /// Variant, shot number (0-based) or observable, depending on kind.
    std::uint32_t arg;

    bool operator>(const Event& other) const
    {
        if (day != other.day) return day > other.day;
        if (entity != other.entity) return entity > other.entity;
        return seq > other.seq;
    }
};

struct Entity {
    CovState x1 = CovState::inactive;
    DetectionState x2 = DetectionState::null;
    VaccinationState x3 = VaccinationState::null;
};

/// Index drawn with probability weights[k] / total; all weights are positive.
std::size_t sample_weighted(const std::vector<double>& weights, double total, Rng& rng)
{
    const double u = std::generate_canonical<double, 64>(rng) * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) {
            return k;
        }
    }
    return weights.size() - 1;
}

void validate_immunisation(const Immunisation& imm, std::size_t m, const std::string& what)
{
    if (imm.b.size() != m || imm.m.size() != m) {
        throw InputError(what + ": b and m need one entry per observable (" + std::to_string(m) + ")");
    }
    for (std::size_t o = 0; o < m; ++o) {
        if (!(imm.b[o] >= 0.0 && imm.b[o] <= 1.0)) {
            throw InputError(what + ": base probability b must lie in [0, 1]");
        }
        if (!(imm.m[o] > 0.0) || !std::isfinite(imm.m[o])) {
            throw InputError(what + ": mean immunity duration m must be positive and finite");
        }
    }
    if (imm.waning.family == WaningDistribution::Family::gamma && !(imm.waning.shape > 0.0)) {
        throw InputError(what + ": gamma waning shape must be positive");
    }
}

void validate_counts(const DailySeries& series, const std::string& what, bool integral)
{
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double v = series[i];
        if (v < 0.0 || (integral && v != std::floor(v))) {
            throw InputError(what + " on " + format_date(series.start() + static_cast<long>(i)) + " must be a " +
                             (integral ? "nonnegative integer" : "nonnegative number"));
        }
    }
}

} // namespace

std::string census_label(std::size_t index)
{
    static constexpr std::array<const char*, 2> x1{"inactive", "active"};
    static constexpr std::array<const char*, 3> x2{"null", "detected", "undetected"};
    static constexpr std::array<const char*, 4> x3{"null", "1-shot", "2-shots", "3-shots"};
    return std::string(x1[index / 12]) + "/" + x2[(index / 4) % 3] + "/" + x3[index % 4];
}

double WaningDistribution::sample(Rng& rng) const
{
    switch (family) {
    case Family::point:
        return 1.0;
    case Family::exponential:
        return std::exponential_distribution<double>(1.0)(rng);
    case Family::gamma:
        return std::gamma_distribution<double>(shape, 1.0 / shape)(rng);
    }
    return 1.0;
}

double WaningDistribution::survival(double y) const
{
    if (y < 0.0) {
        return 1.0;
    }
    switch (family) {
    case Family::point:
        return y < 1.0 ? 1.0 : 0.0;
    case Family::exponential:
        return std::exp(-y);
    case Family::gamma:
        return boost::math::gamma_q(shape, shape * y);
    }
    return 0.0;
}

WaningDistribution::Family parse_waning_family(std::string_view name)
{
    if (name == "point") return WaningDistribution::Family::point;
    if (name == "exponential") return WaningDistribution::Family::exponential;
    if (name == "gamma") return WaningDistribution::Family::gamma;
    throw InputError("unknown waning family '" + std::string(name) + "' (expected point, exponential or gamma)");
}

std::string_view to_string(WaningDistribution::Family family) noexcept
{
    switch (family) {
    case WaningDistribution::Family::point: return "point";
    case WaningDistribution::Family::exponential: return "exponential";
    case WaningDistribution::Family::gamma: return "gamma";
    }
    return "?";
}

std::size_t IwmConfig::observable_index(std::string_view id) const
{
    const auto it = std::find(observables.begin(), observables.end(), id);
    if (it == observables.end()) {
        throw InputError("unknown observable '" + std::string(id) + "'");
    }
    return static_cast<std::size_t>(it - observables.begin());
}

void IwmConfig::validate() const
{
    if (N == 0 || N >= 0xffffffffu) throw InputError("N must be in [1, 2^32-1)");
    if (T == 0) throw InputError("T must be at least one day");
    if (observables.empty()) throw InputError("at least one observable is required");
    if (std::set<std::string>(observables.begin(), observables.end()).size() != observables.size()) {
        throw InputError("observable ids must be unique");
    }
    if (variants.empty()) throw InputError("at least one variant is required");
    std::set<std::string> ids;
    const std::size_t m = observables.size();
    for (const auto& v : variants) {
        if (!ids.insert(v.id).second) throw InputError("duplicate variant id '" + v.id + "'");
        if (v.infection_observable >= m) {
            throw InputError("variant '" + v.id + "' needs an infection-immunity observable");
        }
        validate_immunisation(v.recovery, m, "recovery from " + v.id);
        if (v.cases) validate_counts(*v.cases, "cases of " + v.id, false);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        validate_immunisation(shots[k], m, "shot " + std::to_string(k + 1));
        if (vaccinations[k]) validate_counts(*vaccinations[k], "dose " + std::to_string(k + 1), true);
        if (effect_delay[k] < 0) throw InputError("vaccination effect delays must be nonnegative");
    }
    if (!(xi > 0.0 && xi < 1.0)) throw InputError("detection rate xi must lie in (0, 1)");
    if (undetected_factor && !(*undetected_factor >= 0.0 && std::isfinite(*undetected_factor))) {
        throw InputError("undetected factor must be nonnegative and finite");
    }
    if (delta_12 < 0 || delta_23 < 0) throw InputError("minimum shot gaps must be nonnegative");
    if (p_rd.min_lag() <= p_d.max_lag()) {
        throw InputError("p_rd must place all mass after the latest detection lag of p_d (" +
                         std::to_string(p_d.max_lag()) + " days)");
    }
}

std::vector<DailySeries> split_cases(const DailySeries& total, const std::vector<DailySeries>& shares)
{
    std::vector<std::vector<double>> out(shares.size(), std::vector<double>(total.size()));
    for (std::size_t i = 0; i < total.size(); ++i) {
        const Date date = total.start() + static_cast<long>(i);
        double sum = 0.0;
        for (std::size_t s = 0; s < shares.size(); ++s) {
            const double r = shares[s].at(date);
            if (!(r >= 0.0 && r <= 1.0)) {
                throw InputError("variant share outside [0, 1] on " + format_date(date));
            }
            sum += r;
            out[s][i] = total[i] * r;
        }
        if (sum > 1.0 + 1e-9) {
            throw InputError("variant shares sum to " + std::to_string(sum) + " > 1 on " + format_date(date));
        }
    }
    std::vector<DailySeries> result;
    result.reserve(out.size());
    for (auto& values : out) {
        result.emplace_back(total.start(), std::move(values));
    }
    return result;
}

std::vector<DayEvents> generate_external_events(const IwmConfig& config, Rng& rng)
{
    config.validate();
    const long T = static_cast<long>(config.T);
    const long L = static_cast<long>(config.p_d.max_lag());
    const double factor = config.undetected_ratio();
    std::vector<DayEvents> days(config.T);
    for (auto& d : days) {
        d.infections.resize(config.variants.size());
    }

    std::vector<double> weights;
    std::vector<long> report_days;
    for (long t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < config.variants.size(); ++s) {
            const auto& cases = config.variants[s].cases;
            if (!cases) {
                continue;
            }
            weights.clear();
            report_days.clear();
            auto add = [&](long report, std::size_t lag) {
                const double w = cases->value_or(config.start + report, 0.0) * config.p_d[lag];
                if (w > 0.0) {
                    weights.push_back(w);
                    report_days.push_back(report);
                }
            };
            if (t == 0) {
                // Reports on days 0..L whose infection would precede the first day.
                for (long r = 0; r <= L; ++r) {
                    for (long i = r + 1; i <= L; ++i) {
                        add(r, static_cast<std::size_t>(i));
                    }
                }
            }
            for (long i = 0; i <= L; ++i) {
                add(t + i, static_cast<std::size_t>(i));
            }
            double expected = 0.0;
            for (double w : weights) expected += w;
            auto& out = days[static_cast<std::size_t>(t)].infections[s];
            const std::int64_t detected = stochastic_round(expected, rng);
            out.detected_report_days.reserve(static_cast<std::size_t>(detected));
            for (std::int64_t e = 0; e < detected; ++e) {
                out.detected_report_days.push_back(report_days[sample_weighted(weights, expected, rng)]);
            }
            out.undetected = stochastic_round(expected * factor, rng);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            if (config.vaccinations[k]) {
                days[static_cast<std::size_t>(t)].shots[k] =
                    static_cast<std::int64_t>(config.vaccinations[k]->value_or(config.start + t, 0.0));
            }
        }
    }
    return days;
}

std::int64_t ImmunityTimelines::detected_count(std::size_t day) const
{
    std::int64_t total = 0;
    for (std::size_t k = 0; k < census_size; ++k) {
        if ((k / 4) % 3 == static_cast<std::size_t>(DetectionState::detected)) {
            total += census[day][k];
        }
    }
    return total;
}

namespace {

class Engine {
  public:
    Engine(const IwmConfig& config, Rng& rng)
        : config_(config), rng_(rng), entities_(config.N), immune_(config.N * config.observables.size(), 0),
          end_token_(config.N * config.observables.size(), 0), end_day_(end_token_.size(), 0), shot_sets_{IndexedSet(config.N), IndexedSet(config.N),
                                                                          IndexedSet(config.N)},
          promotions_(config.T)
    {
        const std::size_t m = config.observables.size();
        for (std::size_t s = 0; s < config.variants.size(); ++s) {
            eligible_.emplace_back(config.N);
        }
        observable_variants_.resize(m);
        for (std::size_t s = 0; s < config.variants.size(); ++s) {
            observable_variants_[config.variants[s].infection_observable].push_back(s);
        }
        for (std::uint32_t e = 0; e < config.N; ++e) {
            for (auto& set : eligible_) set.insert(e);
            shot_sets_[0].insert(e);
        }
        census_.fill(0);
        census_[census_index(CovState::inactive, DetectionState::null, VaccinationState::null)] =
            static_cast<std::int64_t>(config.N);
        immune_counts_.assign(m, 0);
    }

    ImmunityTimelines run(const std::vector<DayEvents>& external)
    {
        ImmunityTimelines out;
        out.start = config_.start;
        out.N = config_.N;
        out.observables = config_.observables;
        out.detected_infection_events.assign(config_.variants.size(), 0);
        out.immune.reserve(config_.T);
        out.census.reserve(config_.T);

        for (long t = 0; t < static_cast<long>(config_.T); ++t) {
            for (std::uint32_t e : promotions_[static_cast<std::size_t>(t)]) {
                promote(e);
            }
            const auto& today = external[static_cast<std::size_t>(t)];
            for (std::size_t s = 0; s < today.infections.size(); ++s) {
                const auto& inf = today.infections[s];
                out.detected_infection_events[s] += static_cast<std::int64_t>(inf.detected_report_days.size());
                for (long report : inf.detected_report_days) {
                    infect(t, s, report, out);
                }
                for (std::int64_t k = 0; k < inf.undetected; ++k) {
                    infect(t, s, -1, out);
                }
            }
            for (std::size_t k = 0; k < 3; ++k) {
                for (std::int64_t n = 0; n < today.shots[k]; ++n) {
                    vaccinate(t, k, out);
                }
            }
            while (!queue_.empty() && queue_.top().day <= t) {
                const Event ev = queue_.top();
                queue_.pop();
                dispatch(ev);
            }
            out.immune.push_back(immune_counts_);
            out.census.push_back(census_);
        }
        if (out.external_events > 0 && out.skipped_events * 100 > out.external_events) {
            logger().warn("iwm: {} of {} external events found no eligible entity", out.skipped_events,
                          out.external_events);
        }
        return out;
    }

  private:
    bool immune(std::uint32_t e, std::size_t o) const { return immune_[e * m() + o] != 0; }
    void set_immune(std::uint32_t e, std::size_t o, bool value)
    {
        immune_[e * m() + o] = value ? 1 : 0;
        immune_counts_[o] += value ? 1 : -1;
        if (!observable_variants_[o].empty()) {
            refresh_eligibility(e);
        }
    }
    std::size_t m() const noexcept { return config_.observables.size(); }

    void schedule(long day, std::uint32_t e, EventKind kind, std::uint32_t arg)
    {
        queue_.push(Event{day, e, next_seq_++, kind, arg});
    }

    void set_state(std::uint32_t e, Entity next)
    {
        Entity& cur = entities_[e];
        --census_[census_index(cur.x1, cur.x2, cur.x3)];
        cur = next;
        ++census_[census_index(cur.x1, cur.x2, cur.x3)];
    }

    void refresh_eligibility(std::uint32_t e)
    {
        const bool inactive = entities_[e].x1 == CovState::inactive;
        for (std::size_t s = 0; s < eligible_.size(); ++s) {
            if (inactive && !immune(e, config_.variants[s].infection_observable)) {
                eligible_[s].insert(e);
            }
            else {
                eligible_[s].erase(e);
            }
        }
    }

    void infect(long t, std::size_t s, long report_day, ImmunityTimelines& out)
    {
        ++out.external_events;
        if (eligible_[s].empty()) {
            ++out.skipped_events;
            return;
        }
        const std::uint32_t e = eligible_[s].pick(rng_);
        Entity next = entities_[e];
        next.x1 = CovState::active;
        if (next.x2 == DetectionState::null) {
            next.x2 = DetectionState::undetected;
        }
        set_state(e, next);
        refresh_eligibility(e);
        const bool detected = report_day >= 0;
        if (detected) {
            schedule(report_day, e, EventKind::detection, 0);
        }
        const auto lag = static_cast<long>((detected ? config_.p_rd : config_.p_ru).sample(rng_));
        // Infections folded onto day 0 still recover after their report.
        const long recovery = detected ? std::max(t + lag, report_day + 1) : t + lag;
        schedule(recovery, e, EventKind::recovery, static_cast<std::uint32_t>(s));
    }

    void vaccinate(long t, std::size_t k, ImmunityTimelines& out)
    {
        ++out.external_events;
        if (shot_sets_[k].empty()) {
            ++out.skipped_events;
            return;
        }
        const std::uint32_t e = shot_sets_[k].pick(rng_);
        shot_sets_[k].erase(e);
        Entity next = entities_[e];
        next.x3 = static_cast<VaccinationState>(k + 1);
        set_state(e, next);
        if (k < 2) {
            const long ready = t + (k == 0 ? config_.delta_12 : config_.delta_23);
            if (ready <= t) {
                shot_sets_[k + 1].insert(e);
            }
            else if (ready < static_cast<long>(config_.T)) {
                promotions_[static_cast<std::size_t>(ready)].push_back(e);
            }
        }
        schedule(t + config_.effect_delay[k], e, EventKind::vaccination_effect, static_cast<std::uint32_t>(k));
    }

    void promote(std::uint32_t e)
    {
        const auto x3 = entities_[e].x3;
        if (x3 == VaccinationState::one_shot) shot_sets_[1].insert(e);
        if (x3 == VaccinationState::two_shots) shot_sets_[2].insert(e);
    }

    void immunise(long t, std::uint32_t e, const Immunisation& imm)
    {
        const double x = uniform_open_closed(rng_);
        const double y = imm.waning.sample(rng_);
        for (std::size_t o = 0; o < m(); ++o) {
            if (!(imm.b[o] >= x)) {
                continue;
            }
            if (!immune(e, o)) {
                schedule(t, e, EventKind::start_immunity, static_cast<std::uint32_t>(o));
            }
            const long end = t + std::llround(y * imm.m[o]);
            const std::size_t slot = e * m() + o;
            if (end_token_[slot] != 0 && end_day_[slot] >= end) {
                // The pending end is later; the new one would be the earlier of the two.
                continue;
            }
            const Event ev{end, e, next_seq_++, EventKind::end_immunity, static_cast<std::uint32_t>(o)};
            end_token_[slot] = ev.seq + 1;
            end_day_[slot] = end;
            queue_.push(ev);
        }
    }

    void dispatch(const Event& ev)
    {
        const std::uint32_t e = ev.entity;
        switch (ev.kind) {
        case EventKind::detection: {
            Entity next = entities_[e];
            next.x2 = DetectionState::detected;
            set_state(e, next);
            break;
        }
        case EventKind::recovery: {
            Entity next = entities_[e];
            next.x1 = CovState::inactive;
            set_state(e, next);
            refresh_eligibility(e);
            immunise(ev.day, e, config_.variants[ev.arg].recovery);
            break;
        }
        case EventKind::vaccination_effect:
            immunise(ev.day, e, config_.shots[ev.arg]);
            break;
        case EventKind::start_immunity:
            if (!immune(e, ev.arg)) {
                set_immune(e, ev.arg, true);
            }
            break;
        case EventKind::end_immunity: {
            const std::size_t slot = e * m() + ev.arg;
            if (end_token_[slot] != ev.seq + 1) {
                break; // cancelled by a later end
            }
            end_token_[slot] = 0;
            if (immune(e, ev.arg)) {
                set_immune(e, ev.arg, false);
            }
            break;
        }
        }
    }

    const IwmConfig& config_;
    Rng& rng_;
    std::vector<Entity> entities_;
    std::vector<std::uint8_t> immune_;
    /// seq+1 of the pending end-immunity event per (entity, observable); 0 when none.
    std::vector<std::uint64_t> end_token_;
    std::vector<long> end_day_;
    std::vector<IndexedSet> eligible_;
    std::array<IndexedSet, 3> shot_sets_;
    std::vector<std::vector<std::uint32_t>> promotions_;
    std::vector<std::vector<std::size_t>> observable_variants_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_ = 0;
    std::array<std::int64_t, census_size> census_{};
    std::vector<std::int64_t> immune_counts_;
};

} // namespace

ImmunityTimelines run_iwm(const IwmConfig& config, Rng& rng)
{
    const auto external = generate_external_events(config, rng);
    return Engine(config, rng).run(external);
}

DailySeries immune_fraction(const ImmunityTimelines& timelines, std::string_view observable)
{
    const auto it = std::find(timelines.observables.begin(), timelines.observables.end(), observable);
    if (it == timelines.observables.end()) {
        throw InputError("unknown observable '" + std::string(observable) + "'");
    }
    if (timelines.days() == 0) {
        throw InputError("empty immunity timelines");
    }
    const auto o = static_cast<std::size_t>(it - timelines.observables.begin());
    std::vector<double> values(timelines.days());
    for (std::size_t t = 0; t < values.size(); ++t) {
        values[t] = static_cast<double>(timelines.immune[t][o]) / static_cast<double>(timelines.N);
    }
    return DailySeries(timelines.start, std::move(values));
}

ProtectionCurves protection_curves(const ImmunityTimelines& timelines, std::string_view infection_target,
                                   std::string_view severe_target)
{
    return ProtectionCurves{immune_fraction(timelines, infection_target), immune_fraction(timelines, severe_target)};
}

} // namespace epifamily::iwm
