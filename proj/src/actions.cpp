#include "econsim/actions.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Eat: return "eat";
        case ActionKind::Sleep: return "sleep";
        case ActionKind::SeeDoctor: return "see_doctor";
        case ActionKind::Study: return "study";
        case ActionKind::Work: return "work";
        case ActionKind::Craft: return "craft";
        case ActionKind::Buy: return "buy";
        case ActionKind::Sell: return "sell";
        case ActionKind::Idle: return "idle";
    }
    return "unknown";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Ok: return "ok";
        case Verdict::Violation: return "violation";
        case Verdict::Repaired: return "repaired";
    }
    return "unknown";
}

std::string describe(const Action& a, const WorldConfig& cfg) {
    switch (a.kind) {
        case ActionKind::Eat:
        case ActionKind::Buy:
        case ActionKind::Sell:
        case ActionKind::Craft:
            return fmt::format("{} {} {}", to_string(a.kind), cfg.commodity(a.item).id, a.quantity);
        case ActionKind::Sleep:
        case ActionKind::Work: return fmt::format("{} {}s", to_string(a.kind), a.duration.to_double());
        case ActionKind::Study: return fmt::format("study {} {}s", to_string(a.study), a.duration.to_double());
        default: return std::string(to_string(a.kind));
    }
}

namespace {

void take_time(ExecEnv& env, Duration d) {
    if (d <= Duration{}) throw NonPositiveQuantity("duration must be positive");
    if (d > env.remaining) {
        throw InvalidAction(fmt::format("insufficient time: {}s requested, {}s left", d.to_double(),
                                        env.remaining.to_double()));
    }
}

}  // namespace

ActionEffect execute_action(AgentState& agent, const Action& action, ExecEnv& env, Rng& rng) {
    const WorldConfig& cfg = *env.cfg;
    ActionEffect fx;
    switch (action.kind) {
        case ActionKind::Idle: break;
        case ActionKind::Eat: eat(agent, action.item, action.quantity, cfg); break;
        case ActionKind::Sleep:
            take_time(env, action.duration);
            sleep(agent, action.duration, cfg);
            fx.time_used = action.duration;
            break;
        case ActionKind::SeeDoctor:
            see_doctor(agent, cfg);
            fx.fee = cfg.params.physiology.doctor_fee;
            env.market->ledger().fees_collected += fx.fee;
            break;
        case ActionKind::Study:
            take_time(env, action.duration);
            fx.study = study(agent, action.study, action.duration, cfg);
            fx.fee = fx.study->fee;
            env.market->ledger().fees_collected += fx.fee;
            fx.time_used = action.duration;
            break;
        case ActionKind::Work: {
            if (!agent.job) throw InvalidAction("agent has no job");
            if (!env.wages) throw InvalidAction("no wage schedule");
            take_time(env, action.duration);
            fx.work = pay_and_deplete(agent, cfg.occupation(*agent.job), action.duration, env.wages->wage(*agent.job), cfg);
            env.market->ledger().wages_paid += fx.work->pay;
            fx.time_used = fx.work->worked;
            break;
        }
        case ActionKind::Craft: {
            const Duration labor = action.duration > Duration{} ? action.duration : env.remaining;
            take_time(env, labor);
            fx.production = execute_production(agent, {agent.id, action.item, action.quantity, labor}, rng, cfg);
            fx.time_used = fx.production->time_spent;
            break;
        }
        case ActionKind::Buy: fx.trade = env.market->buy(action.item, action.quantity, agent, env.now); break;
        case ActionKind::Sell: fx.trade = env.market->sell(action.item, action.quantity, agent, env.now); break;
    }
    env.remaining -= fx.time_used;
    return fx;
}

bool ValidationReport::all_ok() const {
    return revalidated_ok &&
           std::all_of(verdicts.begin(), verdicts.end(), [](const ActionVerdict& v) { return v.verdict == Verdict::Ok; });
}

namespace {

enum class Shortfall { None, Items, Energy, Satiety, Other };

struct Failure {
    Shortfall kind = Shortfall::Other;
    std::string reason;
    std::vector<std::pair<CommodityId, Units>> missing;
    Level needed;  // Energy / Satiety
};

struct DryRun {
    AgentState agent;
    Market market;
    ExecEnv env;
    Rng rng;

    DryRun(const AgentState& a, const WorldView& w, Rng r)
        : agent(a), market(*w.market), env{w.cfg, &market, w.wages, w.now, w.budget}, rng(r) {}
    DryRun(const DryRun& o) : agent(o.agent), market(o.market), env(o.env), rng(o.rng) { env.market = &market; }
    DryRun& operator=(const DryRun&) = delete;
};

Level shortfall(Level have, Level need) { return need > have ? need - have : Level{}; }

/// Shortfalls the executor would not raise as errors (zero-output craft, zero
/// hours worked), plus missing items, checked before the action runs.
std::optional<Failure> diagnose(const DryRun& s, const Action& a) {
    const WorldConfig& cfg = *s.env.cfg;
    const AgentState& ag = s.agent;
    switch (a.kind) {
        case ActionKind::Eat:
            if (a.quantity > 0 && ag.held(a.item) < a.quantity) {
                return Failure{Shortfall::Items, fmt::format("missing item {}", cfg.commodity(a.item).id),
                               {{a.item, a.quantity - ag.held(a.item)}}, {}};
            }
            break;
        case ActionKind::Study: {
            const auto& req = cfg.params.study.at(static_cast<std::size_t>(a.study)).requires_item;
            if (req && ag.held(*req) <= 0) {
                return Failure{Shortfall::Items, fmt::format("missing item {}", cfg.commodity(*req).id), {{*req, 1}}, {}};
            }
            break;
        }
        case ActionKind::Craft: {
            if (ag.incapacitated || a.quantity < 1) break;  // executor reports these
            const Recipe* r = cfg.recipe_for(a.item);
            if (!r) break;
            const Duration labor = a.duration > Duration{} ? a.duration : s.env.remaining;
            if (labor <= Duration{} || labor > s.env.remaining) break;
            const OutputBound b = max_output(ag, *r, cfg, effective_labor(labor, efficiency(ag, cfg)));
            if (b.units > 0) break;
            switch (b.binding.kind) {
                case ConstraintKind::Material: {
                    Failure f{Shortfall::Items, fmt::format("missing input {}", cfg.commodity(*b.binding.material).id), {}, {}};
                    for (const auto& in : r->inputs) {
                        const Units need = in.per_unit * a.quantity - ag.held(in.item);
                        if (need > 0) f.missing.emplace_back(in.item, need);
                    }
                    return f;
                }
                case ConstraintKind::Energy:
                    return Failure{Shortfall::Energy, "insufficient energy", {},
                                   shortfall(ag.energy, r->energy_cost * a.quantity)};
                case ConstraintKind::Satiety:
                    return Failure{Shortfall::Satiety, "insufficient satiety", {},
                                   shortfall(ag.satiety, r->satiety_cost * a.quantity)};
                case ConstraintKind::ResidentialGate:
                    return Failure{Shortfall::Other, "residential tier too low", {}, {}};
                case ConstraintKind::Labor: return Failure{Shortfall::Other, "insufficient time", {}, {}};
                case ConstraintKind::Requested: break;
            }
            break;
        }
        case ActionKind::Work: {
            if (!ag.job || ag.incapacitated || a.duration <= Duration{}) break;
            const auto& occ = cfg.occupation(*ag.job);
            const Level e_need = per_hour_cost(occ.energy_per_hour, a.duration);
            const Level s_need = per_hour_cost(occ.satiety_per_hour, a.duration);
            if (occ.energy_per_hour > Level{} && ag.energy == Level{}) {
                return Failure{Shortfall::Energy, "insufficient energy", {}, e_need};
            }
            if (occ.satiety_per_hour > Level{} && ag.satiety == Level{}) {
                return Failure{Shortfall::Satiety, "insufficient satiety", {}, s_need};
            }
            break;
        }
        default: break;
    }
    return std::nullopt;
}

/// Runs one action on the dry-run state; returns the failure instead of
/// throwing. The executor leaves state untouched when it throws.
std::optional<Failure> step(DryRun& s, const Action& a) {
    if (auto f = diagnose(s, a)) return f;
    try {
        execute_action(s.agent, a, s.env, s.rng);
    } catch (const Error& e) {
        return Failure{Shortfall::Other, e.what(), {}, {}};
    } catch (const std::invalid_argument& e) {
        return Failure{Shortfall::Other, e.what(), {}, {}};
    }
    return std::nullopt;
}

std::optional<std::vector<Action>> repair(const DryRun& s, const Action& a, const Failure& f) {
    const WorldConfig& cfg = *s.env.cfg;
    std::vector<Action> fix;
    switch (f.kind) {
        case Shortfall::Items:
            for (const auto& [item, q] : f.missing) fix.push_back(Action::buy(item, q));
            break;
        case Shortfall::Energy: {
            const Level rate = cfg.params.physiology.sleep_energy_per_hour;
            if (rate <= Level{} || f.needed <= Level{}) return std::nullopt;
            const __int128 ms = (static_cast<__int128>(f.needed.raw()) * kMillisPerHour + rate.raw() - 1) / rate.raw();
            const Duration d = std::min(Duration::from_raw(static_cast<std::int64_t>(ms)), s.env.remaining);
            if (d <= Duration{}) return std::nullopt;
            fix.push_back(Action::sleep(d));
            break;
        }
        case Shortfall::Satiety: {
            for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
                const auto& c = cfg.commodities[i];
                if (!c.edible() || s.agent.inventory[i] <= 0) continue;
                const auto per = static_cast<double>(Level::from_double(c.satiety_per_unit).raw());
                const auto want = static_cast<Units>(std::ceil(static_cast<double>(f.needed.raw()) / per));
                fix.push_back(Action::eat({static_cast<std::uint16_t>(i)}, std::clamp<Units>(want, 1, s.agent.inventory[i])));
                break;
            }
            if (fix.empty()) return std::nullopt;
            break;
        }
        default: return std::nullopt;
    }
    fix.push_back(a);
    DryRun trial(s);
    for (std::size_t i = 0; i + 1 < fix.size(); ++i) {
        if (step(trial, fix[i])) return std::nullopt;  // the repair itself is infeasible
    }
    return fix;
}

}  // namespace

ValidationReport simulate_actions(const AgentState& agent, const std::vector<Action>& actions, const WorldView& world,
                                  Rng rng) {
    ValidationReport rep;
    rep.verdicts.resize(actions.size());
    std::vector<Action> plan;
    std::vector<std::size_t> owner;  // plan entry -> submitted action

    DryRun s(agent, world, rng);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        ActionVerdict& v = rep.verdicts[i];
        auto f = step(s, actions[i]);
        if (!f) {
            plan.push_back(actions[i]);
            owner.push_back(i);
            continue;
        }
        v.reason = f->reason;
        if (auto fix = repair(s, actions[i], *f)) {
            v.verdict = Verdict::Repaired;
            v.replacement = *fix;
            for (const auto& a : *fix) {
                plan.push_back(a);
                owner.push_back(i);
                step(s, a);
            }
        } else {
            v.verdict = Verdict::Violation;
        }
    }

    // Second and last pass: no further repairs, cut at the first failure.
    DryRun check(agent, world, rng);
    for (std::size_t k = 0; k < plan.size(); ++k) {
        if (auto f = step(check, plan[k])) {
            rep.revalidated_ok = false;
            ActionVerdict& v = rep.verdicts[owner[k]];
            v.verdict = Verdict::Violation;
            v.reason = f->reason;
            v.replacement.clear();
            break;
        }
        rep.executable.push_back(plan[k]);
    }
    rep.projected = std::move(check.agent);
    return rep;
}

}  // namespace econsim
