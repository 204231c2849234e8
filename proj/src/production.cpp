#include "econsim/production.hpp"

#include <cmath>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

std::string describe(const BindingConstraint& b, const WorldConfig& cfg) {
    switch (b.kind) {
        case ConstraintKind::ResidentialGate: return "residential_gate";
        case ConstraintKind::Material:
            return b.material ? fmt::format("material:{}", cfg.commodity(*b.material).id) : "material";
        case ConstraintKind::Energy: return "energy";
        case ConstraintKind::Satiety: return "satiety";
        case ConstraintKind::Labor: return "labor";
        case ConstraintKind::Requested: return "requested";
    }
    return "unknown";
}

namespace {

void consider(OutputBound& best, std::int64_t have, std::int64_t per_unit, BindingConstraint kind) {
    if (per_unit <= 0) return;
    const Units n = have <= 0 ? 0 : have / per_unit;
    if (n < best.units) {
        best.units = n;
        best.binding = kind;
    }
}

}  // namespace

OutputBound max_output(const AgentState& agent, const Recipe& recipe, const WorldConfig& cfg, Duration labor_budget) {
    const auto& spec = cfg.commodity(recipe.output);
    if (spec.r_min && agent.residential_tier < *spec.r_min) {
        return {0, {ConstraintKind::ResidentialGate, std::nullopt}};
    }
    OutputBound best{kUnbounded, {ConstraintKind::Requested, std::nullopt}};
    for (const auto& in : recipe.inputs) {
        consider(best, agent.held(in.item), in.per_unit, {ConstraintKind::Material, in.item});
    }
    consider(best, agent.energy.raw(), recipe.energy_cost.raw(), {ConstraintKind::Energy, std::nullopt});
    consider(best, agent.satiety.raw(), recipe.satiety_cost.raw(), {ConstraintKind::Satiety, std::nullopt});
    consider(best, labor_budget.raw(), recipe.time_cost.raw(), {ConstraintKind::Labor, std::nullopt});
    return best;
}

Duration effective_labor(Duration labor_budget, double eff) {
    if (labor_budget <= Duration{}) return Duration{};
    return Duration::from_raw(static_cast<std::int64_t>(std::floor(static_cast<double>(labor_budget.raw()) * eff)));
}

ProductionOutcome execute_production(AgentState& agent, const ProductionRequest& request, Rng& rng,
                                     const WorldConfig& cfg) {
    if (agent.incapacitated) throw Incapacitated(fmt::format("agent {} is incapacitated", agent.id));
    if (request.desired_units < 1) throw NonPositiveQuantity("desired units must be at least 1");
    if (request.labor_budget <= Duration{}) throw NonPositiveQuantity("labor budget must be positive");
    const Recipe* recipe = cfg.recipe_for(request.commodity);
    if (!recipe) {
        throw InvalidAction(fmt::format("'{}' has no recipe", cfg.commodity(request.commodity).id));
    }

    const double eff = efficiency(agent, cfg);
    const OutputBound bound = max_output(agent, *recipe, cfg, effective_labor(request.labor_budget, eff));

    ProductionOutcome out;
    out.commodity = request.commodity;
    if (bound.units >= request.desired_units) {
        out.produced_units = request.desired_units;
        out.binding = {ConstraintKind::Requested, std::nullopt};
    } else {
        out.produced_units = bound.units;
        out.binding = bound.binding;
    }
    const Units n = out.produced_units;
    if (n == 0) return out;

    for (const auto& in : recipe->inputs) {
        const Units used = in.per_unit * n;
        agent.inventory[in.item.index] -= used;
        agent.consumed[in.item.index] = true;
        out.consumed.emplace_back(in.item, used);
    }
    out.energy_spent = recipe->energy_cost * n;
    out.satiety_spent = recipe->satiety_cost * n;
    agent.energy -= out.energy_spent;
    agent.satiety -= out.satiety_spent;
    agent.inventory[request.commodity.index] += n;

    const double ms = std::ceil(static_cast<double>(recipe->time_cost.raw() * n) / eff);
    out.time_spent = std::min(Duration::from_raw(static_cast<std::int64_t>(ms)), request.labor_budget);

    if (recipe->reward_item) {
        for (Units u = 0; u < n; ++u) {
            if (rng.bernoulli(recipe->reward_prob)) ++out.reward_units;
        }
        if (out.reward_units > 0) {
            agent.inventory[recipe->reward_item->index] += out.reward_units;
            out.reward_granted = recipe->reward_item;
        }
    }
    return out;
}

}  // namespace econsim
