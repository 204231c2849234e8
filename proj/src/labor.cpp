#include "econsim/labor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

namespace {

Currency per_hour_currency(Currency rate, Duration d) {
    const __int128 v = static_cast<__int128>(rate.raw()) * d.raw() / kMillisPerHour;
    return Currency::from_raw(static_cast<std::int64_t>(v));
}

Level spend(Level& level, Level cost) {
    const Level spent = std::min(level, cost);
    level -= spent;
    return spent;
}

}  // namespace

StudyOutcome study(AgentState& agent, StudyKind kind, Duration duration, const WorldConfig& cfg) {
    if (duration <= Duration{}) throw NonPositiveQuantity("study duration must be positive");
    const StudyCost& cost = cfg.params.study.at(static_cast<std::size_t>(kind));
    if (cost.requires_item && agent.held(*cost.requires_item) <= 0) {
        throw InsufficientInventory(
            fmt::format("{} requires holding {}", to_string(kind), cfg.commodity(*cost.requires_item).id));
    }
    StudyOutcome out;
    out.fee = per_hour_currency(cost.fee_per_hour, duration);
    if (agent.balance < out.fee) {
        throw InsufficientFunds(fmt::format("{} fee {:.2f} exceeds balance {:.2f}", to_string(kind),
                                            out.fee.to_double(), agent.balance.to_double()));
    }
    agent.balance -= out.fee;
    out.energy_spent = spend(agent.energy, per_hour_cost(cost.energy_per_hour, duration));
    out.satiety_spent = spend(agent.satiety, per_hour_cost(cost.satiety_per_hour, duration));
    out.education_gain = cfg.params.eta_per_hour * to_hours(duration);
    agent.education += out.education_gain;
    return out;
}

double empirical_quantile_sorted(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw EmptyPopulation("quantile of an empty population");
    const double dn = static_cast<double>(n);
    // Smallest k >= 1 with k/n >= p, evaluated with the same double comparison
    // a direct CDF scan would use.
    auto reaches = [&](std::size_t k) { return static_cast<double>(k) / dn >= p; };
    auto k = static_cast<std::size_t>(std::clamp(std::ceil(p * dn), 1.0, dn));
    while (k > 1 && reaches(k - 1)) --k;
    while (k < n && !reaches(k)) ++k;
    return sorted[k - 1];
}

double empirical_quantile(std::span<const double> scores, double p) {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    return empirical_quantile_sorted(sorted, p);
}

double dynamic_threshold(double floor, double eligibility_share, std::span<const double> scores) {
    return std::max(floor, empirical_quantile(scores, 1.0 - eligibility_share));
}

double dynamic_threshold(const OccupationSpec& occ, const WorldConfig& cfg, std::span<const double> scores) {
    return dynamic_threshold(cfg.effective_floor(occ), occ.eligibility_share, scores);
}

bool eligibility(const AgentState& agent, const OccupationSpec& occ, double threshold) {
    if (agent.education < threshold) return false;
    if (agent.residential_tier < occ.r_min) return false;
    if (occ.prereq_commodity && !agent.has_consumed(*occ.prereq_commodity)) return false;
    return true;
}

double phi(const OccupationSpec& occ, double threshold) {
    if (occ.phi_beta == 0.0) return 1.0;
    return 1.0 + occ.phi_beta * std::max(0.0, threshold - occ.phi_ref) / occ.phi_ref;
}

void run_recruitment_cycle(std::span<AgentState> agents, std::span<const std::vector<OccupationId>> applications,
                           const WorldConfig& cfg, RecruitmentState& state) {
    const std::size_t n_occ = cfg.occupations.size();
    state.assignments.clear();

    std::vector<double> sorted;
    sorted.reserve(agents.size());
    for (const auto& a : agents) sorted.push_back(a.education);
    std::sort(sorted.begin(), sorted.end());

    state.thresholds.assign(n_occ, 0.0);
    for (std::size_t j = 0; j < n_occ; ++j) {
        const auto& occ = cfg.occupations[j];
        const double floor = cfg.effective_floor(occ);
        state.thresholds[j] =
            sorted.empty() ? floor : std::max(floor, empirical_quantile_sorted(sorted, 1.0 - occ.eligibility_share));
    }

    state.applications.assign(agents.size(), {});
    for (std::size_t i = 0; i < agents.size() && i < applications.size(); ++i) {
        const auto quota = static_cast<std::size_t>(std::max(0, cfg.application_quota(agents[i].residential_tier)));
        const auto& apps = applications[i];
        state.applications[i].assign(apps.begin(), apps.begin() + static_cast<std::ptrdiff_t>(std::min(quota, apps.size())));
    }

    std::vector<int> holders(n_occ, 0);
    for (const auto& a : agents) {
        if (a.job) ++holders[a.job->index];
    }

    std::vector<std::size_t> order(n_occ);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return cfg.occupations[x].tier > cfg.occupations[y].tier;
    });

    std::vector<bool> placed(agents.size(), false);
    state.open_vacancies.assign(n_occ, 0);
    for (const std::size_t j : order) {
        const auto& occ = cfg.occupations[j];
        const OccupationId oid{static_cast<std::uint16_t>(j)};
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            if (placed[i]) continue;
            const auto& apps = state.applications[i];
            if (std::find(apps.begin(), apps.end(), oid) == apps.end()) continue;
            if (agents[i].job == oid) continue;
            if (!eligibility(agents[i], occ, state.thresholds[j])) continue;
            pool.push_back(i);
        }
        std::sort(pool.begin(), pool.end(), [&](std::size_t x, std::size_t y) {
            if (agents[x].education != agents[y].education) return agents[x].education > agents[y].education;
            return agents[x].id < agents[y].id;
        });
        int open = std::max(0, occ.vacancies - holders[j]);
        for (const std::size_t i : pool) {
            if (open == 0) break;
            AgentState& a = agents[i];
            state.assignments.push_back({a.id, oid, a.job, a.education, a.residential_tier, state.thresholds[j]});
            if (a.job) --holders[a.job->index];
            a.job = oid;
            ++holders[j];
            placed[i] = true;
            --open;
        }
    }
    for (std::size_t j = 0; j < n_occ; ++j) {
        state.open_vacancies[j] = std::max(0, cfg.occupations[j].vacancies - holders[j]);
    }
    ++state.cycle_index;
}

WageSchedule compute_wages(const WorldConfig& cfg, std::span<const double> thresholds, double price_index, Rng& rng) {
    if (!(price_index > 0.0)) throw std::invalid_argument("price index must be positive");
    WageSchedule s;
    s.wages.resize(cfg.occupations.size());
    const double dbar = cfg.params.delta_bar;
    for (std::size_t j = 0; j < cfg.occupations.size(); ++j) {
        const auto& occ = cfg.occupations[j];
        WageComponents& w = s.wages[j];
        w.base = occ.base_wage;
        w.index = price_index;
        if (occ.regime == WageRegime::Static) {
            w.wage = Currency::from_double(occ.base_wage * price_index);
            continue;
        }
        const double h = j < thresholds.size() ? thresholds[j] : cfg.effective_floor(occ);
        w.phi = phi(occ, h);
        w.delta = rng.uniform(-dbar, dbar);
        w.wage = Currency::from_double(occ.base_wage * w.phi * price_index * (1.0 + w.delta));
    }
    return s;
}

WorkOutcome pay_and_deplete(AgentState& agent, const OccupationSpec& occ, Duration duration, Currency wage,
                            const WorldConfig& cfg) {
    if (agent.incapacitated) throw Incapacitated(fmt::format("agent {} is incapacitated", agent.id));
    if (duration < Duration{}) throw NonPositiveQuantity("work duration must be non-negative");
    WorkOutcome out;
    if (duration == Duration{}) return out;

    std::int64_t ms = duration.raw();
    auto limit = [&](Level have, Level rate) {
        if (rate.raw() <= 0) return;
        // Largest whole millisecond with rate * t / hour <= have.
        const __int128 fit = static_cast<__int128>(have.raw()) * kMillisPerHour / rate.raw();
        ms = static_cast<std::int64_t>(std::min<__int128>(ms, fit));
    };
    limit(agent.energy, occ.energy_per_hour);
    limit(agent.satiety, occ.satiety_per_hour);
    out.worked = Duration::from_raw(std::max<std::int64_t>(ms, 0));

    out.energy_spent = per_hour_cost(occ.energy_per_hour, out.worked);
    out.satiety_spent = per_hour_cost(occ.satiety_per_hour, out.worked);
    agent.energy -= out.energy_spent;
    agent.satiety -= out.satiety_spent;

    const auto period_ms = static_cast<std::int64_t>(std::llround(cfg.params.standard_work_hours * kMillisPerHour));
    const __int128 pay = static_cast<__int128>(wage.raw()) * out.worked.raw() / period_ms;
    out.pay = Currency::from_raw(static_cast<std::int64_t>(pay));
    agent.balance += out.pay;
    clamp_physiology(agent, cfg);
    return out;
}

}  // namespace econsim
