#include "econsim/agent.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

AgentState make_agent(AgentId id, const WorldConfig& cfg, int residential_tier, Currency balance, double education) {
    AgentState a;
    a.id = id;
    a.balance = balance;
    a.inventory.assign(cfg.commodities.size(), 0);
    a.consumed.assign(cfg.commodities.size(), false);
    a.residential_tier = residential_tier;
    const StateCaps& caps = cfg.caps(residential_tier);
    a.satiety = caps.satiety;
    a.energy = caps.energy;
    a.health = caps.health;
    a.education = education;
    return a;
}

bool StateDelta::empty() const {
    return balance == Currency{} && inventory.empty() && satiety == Level{} && energy == Level{} &&
           health == Level{} && education == 0.0 && !incapacitated;
}

StateDelta diff(const AgentState& before, const AgentState& after) {
    StateDelta d;
    d.balance = after.balance - before.balance;
    for (std::size_t i = 0; i < after.inventory.size(); ++i) {
        const Units change = after.inventory[i] - before.inventory[i];
        if (change != 0) d.inventory.emplace_back(CommodityId{static_cast<std::uint16_t>(i)}, change);
    }
    d.satiety = after.satiety - before.satiety;
    d.energy = after.energy - before.energy;
    d.health = after.health - before.health;
    d.education = after.education - before.education;
    if (after.incapacitated != before.incapacitated) d.incapacitated = after.incapacitated;
    return d;
}

void clamp_physiology(AgentState& agent, const WorldConfig& cfg) {
    const StateCaps& caps = cfg.caps(agent.residential_tier);
    agent.satiety = std::clamp(agent.satiety, Level{}, caps.satiety);
    agent.energy = std::clamp(agent.energy, Level{}, caps.energy);
    agent.health = std::clamp(agent.health, Level{}, caps.health);
}

Currency inventory_value(const AgentState& agent, const Quotes& prices, const WorldConfig& cfg) {
    Currency total;
    for (std::size_t i = 0; i < agent.inventory.size(); ++i) {
        const Units q = agent.inventory[i];
        if (q == 0) continue;
        const auto& spec = cfg.commodities.at(i);
        const std::optional<double> p = i < prices.size() ? prices[i] : std::nullopt;
        if (!p) {
            if (spec.pooled()) throw MissingPrice(fmt::format("no quote for held commodity '{}'", spec.id));
            continue;
        }
        total += Currency::from_double(*p * static_cast<double>(q));
    }
    return total;
}

Currency net_worth(const AgentState& agent, const Quotes& prices, const WorldConfig& cfg) {
    return agent.balance + inventory_value(agent, prices, cfg);
}

namespace {

double factor(double frac, double weight) {
    if (weight == 0.0) return 1.0;
    return std::pow(std::clamp(frac, 0.0, 1.0), weight);
}

double ratio(Level v, Level cap) { return cap.raw() > 0 ? static_cast<double>(v.raw()) / cap.raw() : 0.0; }

}  // namespace

double efficiency(double satiety_frac, double energy_frac, double health_frac, int residential_tier, double education,
                  const EfficiencyParams& p) {
    double r = 1.0;
    if (!p.residential_factor.empty()) {
        const auto idx = static_cast<std::size_t>(
            std::clamp(residential_tier, 1, static_cast<int>(p.residential_factor.size())) - 1);
        r = p.residential_factor[idx];
    }
    const double h_frac = std::clamp(education / p.education_saturation, 0.0, 1.0);
    const double h = p.education_floor + (1.0 - p.education_floor) * h_frac;
    const double g = factor(satiety_frac, p.w_satiety) * factor(energy_frac, p.w_energy) *
                     factor(health_frac, p.w_health) * r * h;
    return std::clamp(g, p.g_min, 1.0);
}

double efficiency(const AgentState& agent, const WorldConfig& cfg) {
    const StateCaps& caps = cfg.caps(agent.residential_tier);
    return efficiency(ratio(agent.satiety, caps.satiety), ratio(agent.energy, caps.energy),
                      ratio(agent.health, caps.health), agent.residential_tier, agent.education,
                      cfg.params.efficiency);
}

StateDelta eat(AgentState& agent, CommodityId item, Units quantity, const WorldConfig& cfg) {
    if (quantity <= 0) throw NonPositiveQuantity("eat quantity must be positive");
    const auto& spec = cfg.commodity(item);
    if (agent.held(item) < quantity) {
        throw InsufficientInventory(fmt::format("need {} {} to eat, hold {}", quantity, spec.id, agent.held(item)));
    }
    const AgentState before = agent;
    agent.inventory[item.index] -= quantity;
    agent.consumed[item.index] = true;
    agent.satiety += Level::from_double(spec.satiety_per_unit * static_cast<double>(quantity));
    clamp_physiology(agent, cfg);
    return diff(before, agent);
}

StateDelta sleep(AgentState& agent, Duration duration, const WorldConfig& cfg) {
    if (duration <= Duration{}) throw NonPositiveQuantity("sleep duration must be positive");
    const AgentState before = agent;
    agent.energy += per_hour_cost(cfg.params.physiology.sleep_energy_per_hour, duration);
    agent.awake_time = Duration{};
    clamp_physiology(agent, cfg);
    return diff(before, agent);
}

StateDelta see_doctor(AgentState& agent, const WorldConfig& cfg) {
    const auto& ph = cfg.params.physiology;
    if (agent.balance < ph.doctor_fee) {
        throw InsufficientFunds(fmt::format("doctor fee {:.2f} exceeds balance {:.2f}", ph.doctor_fee.to_double(),
                                            agent.balance.to_double()));
    }
    const AgentState before = agent;
    agent.balance -= ph.doctor_fee;
    agent.health += ph.doctor_heal;
    clamp_physiology(agent, cfg);
    return diff(before, agent);
}

StateDelta tick_physiology(AgentState& agent, Duration elapsed, Rng& rng, const WorldConfig& cfg) {
    if (elapsed <= Duration{}) throw std::invalid_argument("elapsed time must be positive");
    const auto& ph = cfg.params.physiology;
    const AgentState before = agent;

    agent.satiety -= per_hour_cost(ph.satiety_decay_per_hour, elapsed);
    if (rng.bernoulli(ph.illness_prob_per_tick)) agent.health -= ph.illness_damage;

    agent.awake_time += elapsed;
    if (agent.awake_time > ph.awake_threshold) {
        const Duration over = std::min(elapsed, agent.awake_time - ph.awake_threshold);
        agent.health -= per_hour_cost(ph.deprivation_health_per_hour, over);
    }
    clamp_physiology(agent, cfg);

    agent.incapacitated = agent.energy < ph.energy_min || agent.health < ph.health_min;
    if (agent.satiety < cfg.params.safety_net.satiety_threshold) {
        ++agent.low_satiety_streak;
    } else {
        agent.low_satiety_streak = 0;
    }
    return diff(before, agent);
}

std::optional<StateDelta> apply_safety_net(AgentState& agent, const WorldConfig& cfg) {
    const auto& sn = cfg.params.safety_net;
    if (!sn.enabled || agent.low_satiety_streak < sn.persistence_ticks) return std::nullopt;
    const AgentState before = agent;
    agent.inventory[sn.subsidy_item.index] += sn.subsidy_amount;
    agent.low_satiety_streak = 0;
    if (agent.satiety == Level{} && cfg.commodity(sn.subsidy_item).edible()) {
        eat(agent, sn.subsidy_item, sn.subsidy_amount, cfg);
    }
    return diff(before, agent);
}

}  // namespace econsim
