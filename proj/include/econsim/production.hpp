#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "econsim/agent.hpp"
#include "econsim/config.hpp"
#include "econsim/rng.hpp"

namespace econsim {

enum class ConstraintKind { ResidentialGate, Material, Energy, Satiety, Labor, Requested };

struct BindingConstraint {
    ConstraintKind kind = ConstraintKind::Requested;
    std::optional<CommodityId> material;  // set for Material

    friend bool operator==(const BindingConstraint&, const BindingConstraint&) = default;
};

std::string describe(const BindingConstraint& b, const WorldConfig& cfg);

struct OutputBound {
    Units units = 0;
    BindingConstraint binding;
};

inline constexpr Units kUnbounded = std::numeric_limits<Units>::max();

/// Whole units the agent could make right now, ignoring efficiency. Terms with
/// a zero coefficient drop out of the min; if every term drops out the bound
/// is kUnbounded with binding Requested.
OutputBound max_output(const AgentState& agent, const Recipe& recipe, const WorldConfig& cfg, Duration labor_budget);

struct ProductionRequest {
    AgentId agent_id = 0;
    CommodityId commodity;
    Units desired_units = 1;
    Duration labor_budget;
};

struct ProductionOutcome {
    CommodityId commodity;
    Units produced_units = 0;
    BindingConstraint binding;
    std::vector<std::pair<CommodityId, Units>> consumed;
    Level energy_spent;
    Level satiety_spent;
    Duration time_spent;
    Units reward_units = 0;
    std::optional<CommodityId> reward_granted;
};

/// Labor time left after efficiency: floor(L * eff) milliseconds.
Duration effective_labor(Duration labor_budget, double eff);

/// Produces min(desired, bound) units where the labor term of the bound uses
/// the efficiency-scaled budget. Draws one reward Bernoulli per unit produced.
ProductionOutcome execute_production(AgentState& agent, const ProductionRequest& request, Rng& rng,
                                     const WorldConfig& cfg);

}  // namespace econsim
