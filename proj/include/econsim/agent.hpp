#pragma once

#include <optional>
#include <string>
#include <vector>

#include "econsim/config.hpp"
#include "econsim/rng.hpp"
#include "econsim/types.hpp"

namespace econsim {

/// Quoted marginal price per commodity index; nullopt when no pool exists.
using Quotes = std::vector<std::optional<double>>;

struct AgentState {
    AgentId id = 0;
    Currency balance;
    std::vector<Units> inventory;  // indexed by commodity
    Level satiety;
    Level energy;
    Level health;
    double education = 0.0;
    int residential_tier = 1;
    std::optional<OccupationId> job;
    bool incapacitated = false;
    int low_satiety_streak = 0;
    Duration awake_time;           // since last sleep
    std::vector<bool> consumed;    // has ever consumed commodity i
    std::string policy;
    std::string policy_tag;

    [[nodiscard]] Units held(CommodityId c) const { return inventory.at(c.index); }
    [[nodiscard]] bool has_consumed(CommodityId c) const { return consumed.at(c.index); }
};

/// Fresh agent with full physiology for its tier and an empty inventory.
AgentState make_agent(AgentId id, const WorldConfig& cfg, int residential_tier, Currency balance,
                      double education = 0.0);

/// Difference between two states of the same agent (after - before).
struct StateDelta {
    Currency balance;
    std::vector<std::pair<CommodityId, Units>> inventory;
    Level satiety;
    Level energy;
    Level health;
    double education = 0.0;
    std::optional<bool> incapacitated;  // new value when it changed

    [[nodiscard]] bool empty() const;
};

StateDelta diff(const AgentState& before, const AgentState& after);

/// Clamp satiety/energy/health into [0, cap(R)].
void clamp_physiology(AgentState& agent, const WorldConfig& cfg);

/// Net worth B + sum p_i q_i. Each term is rounded to the currency
/// resolution so that net_worth - balance is exactly the inventory value.
/// Unpooled commodities (e.g. special rewards) are valued at zero.
Currency net_worth(const AgentState& agent, const Quotes& prices, const WorldConfig& cfg);
Currency inventory_value(const AgentState& agent, const Quotes& prices, const WorldConfig& cfg);

/// Productive efficiency G(S, E, J, R, H) in [g_min, 1].
double efficiency(const AgentState& agent, const WorldConfig& cfg);
double efficiency(double satiety_frac, double energy_frac, double health_frac, int residential_tier,
                  double education, const EfficiencyParams& params);

// Recovery actions. Incapacitation does not block these.
StateDelta eat(AgentState& agent, CommodityId item, Units quantity, const WorldConfig& cfg);
StateDelta sleep(AgentState& agent, Duration duration, const WorldConfig& cfg);
StateDelta see_doctor(AgentState& agent, const WorldConfig& cfg);

/// Passive decay, illness draw and sleep deprivation for `elapsed`, then the
/// incapacitation flag and low-satiety streak are refreshed.
StateDelta tick_physiology(AgentState& agent, Duration elapsed, Rng& rng, const WorldConfig& cfg);

/// Fires when the low-satiety streak reaches the persistence threshold.
/// An agent already at zero satiety eats the subsidy on receipt.
std::optional<StateDelta> apply_safety_net(AgentState& agent, const WorldConfig& cfg);

}  // namespace econsim
