#pragma once

#include <optional>
#include <string>
#include <vector>

#include "econsim/agent.hpp"
#include "econsim/labor.hpp"
#include "econsim/market.hpp"
#include "econsim/production.hpp"

namespace econsim {

enum class ActionKind { Eat, Sleep, SeeDoctor, Study, Work, Craft, Buy, Sell, Idle };
std::string_view to_string(ActionKind k);

/// One entry of an agent's per-tick plan. Eat also covers consuming non-food
/// items (that is how prerequisite goods get "used").
struct Action {
    ActionKind kind = ActionKind::Idle;
    CommodityId item;    // Eat, Craft, Buy, Sell
    Units quantity = 0;  // Eat, Craft (desired units), Buy, Sell
    Duration duration;   // Sleep, Study, Work; Craft labor budget (zero = rest of tick)
    StudyKind study = StudyKind::SelfStudy;

    static Action eat(CommodityId item, Units q) { return {ActionKind::Eat, item, q, {}, {}}; }
    static Action sleep(Duration d) { return {ActionKind::Sleep, {}, 0, d, {}}; }
    static Action see_doctor() { return {ActionKind::SeeDoctor, {}, 0, {}, {}}; }
    static Action learn(StudyKind k, Duration d) { return {ActionKind::Study, {}, 0, d, k}; }
    static Action work(Duration d) { return {ActionKind::Work, {}, 0, d, {}}; }
    static Action craft(CommodityId item, Units q, Duration labor = {}) { return {ActionKind::Craft, item, q, labor, {}}; }
    static Action buy(CommodityId item, Units q) { return {ActionKind::Buy, item, q, {}, {}}; }
    static Action sell(CommodityId item, Units q) { return {ActionKind::Sell, item, q, {}, {}}; }
    static Action idle() { return {}; }

    friend bool operator==(const Action&, const Action&) = default;
};

std::string describe(const Action& a, const WorldConfig& cfg);

/// Everything an action may touch besides the acting agent.
struct ExecEnv {
    const WorldConfig* cfg = nullptr;
    Market* market = nullptr;
    const WageSchedule* wages = nullptr;
    Duration now;        // in-game timestamp for receipts
    Duration remaining;  // time left in the agent's tick; timed actions consume it
};

struct ActionEffect {
    Duration time_used;
    std::optional<TradeReceipt> trade;
    std::optional<ProductionOutcome> production;
    std::optional<WorkOutcome> work;
    std::optional<StudyOutcome> study;
    Currency fee;  // doctor or tuition, removed from circulation
};

/// Applies one action to the live agent and world. Throws an econsim::Error
/// on any precondition failure, leaving the agent and market untouched.
/// A craft that produces nothing is not an error; see the outcome.
ActionEffect execute_action(AgentState& agent, const Action& action, ExecEnv& env, Rng& rng);

enum class Verdict { Ok, Violation, Repaired };
std::string_view to_string(Verdict v);

struct ActionVerdict {
    Verdict verdict = Verdict::Ok;
    std::string reason;
    std::vector<Action> replacement;  // Repaired: what runs in place of the original
};

struct ValidationReport {
    std::vector<ActionVerdict> verdicts;  // one per submitted action
    std::vector<Action> executable;       // repaired plan, cut before the first remaining violation
    AgentState projected;                 // state after the executable plan
    bool revalidated_ok = true;

    [[nodiscard]] bool all_ok() const;
};

/// Read-only view for the dry run; the market is copied internally.
struct WorldView {
    const WorldConfig* cfg = nullptr;
    const Market* market = nullptr;
    const WageSchedule* wages = nullptr;
    Duration now;
    Duration budget;
};

/// Dry-runs the plan on copies, repairs shortfalls once (buy a missing input
/// or meal, sleep for missing energy, eat held food for missing satiety) and
/// re-validates the repaired plan. Never touches live state.
ValidationReport simulate_actions(const AgentState& agent, const std::vector<Action>& actions, const WorldView& world,
                                  Rng rng);

}  // namespace econsim
