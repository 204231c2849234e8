#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "econsim/actions.hpp"
#include "econsim/policy_names.hpp"

namespace econsim {

/// Read-only snapshot handed to a policy once per tick.
struct PolicyContext {
    const AgentState& agent;
    const WorldConfig& cfg;
    const Market& market;  // start-of-tick pools
    const Quotes& quotes;
    const WageSchedule& wages;
    const std::vector<double>& thresholds;  // from the latest recruitment cycle
    std::int64_t tick = 0;
    Duration tick_length;
    const std::deque<std::string>& recent_failures;
    const std::map<std::string, double>& params;

    [[nodiscard]] double param(const std::string& key, double fallback) const;
};

/// Pure decision rule: same context and stream state give the same plan.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<Action> decide(const PolicyContext& ctx, Rng& rng) const = 0;
    /// Occupations to apply for at the next recruitment cycle, most wanted first.
    virtual std::vector<OccupationId> applications(const PolicyContext& ctx) const;
};

/// Throws InvalidAction for an unknown name.
std::unique_ptr<Policy> make_policy(std::string_view name);

// Building blocks shared by the shipped policies; exposed for tests.
namespace policy_util {

/// Pooled, edible commodity with the most satiety per unit of currency.
std::optional<CommodityId> cheapest_food(const PolicyContext& ctx);
/// Recipe the agent may run with the best margin per unit of energy.
std::optional<CommodityId> best_recipe(const PolicyContext& ctx);
/// Margin (output price minus input cost) per unit energy at current quotes.
std::optional<double> recipe_margin(const PolicyContext& ctx, const Recipe& r);
/// Occupations the agent would be eligible for under the current thresholds,
/// by base wage descending.
std::vector<OccupationId> reachable_jobs(const PolicyContext& ctx, bool ignore_prerequisite);

}  // namespace policy_util

}  // namespace econsim
