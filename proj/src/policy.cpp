#include "econsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

double PolicyContext::param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

namespace policy_util {

std::optional<CommodityId> cheapest_food(const PolicyContext& ctx) {
    std::optional<CommodityId> best;
    double best_cost = 0.0;
    for (std::size_t i = 0; i < ctx.cfg.commodities.size(); ++i) {
        const auto& c = ctx.cfg.commodities[i];
        if (!c.edible() || !ctx.quotes[i]) continue;
        const double per_satiety = *ctx.quotes[i] / c.satiety_per_unit;
        if (!best || per_satiety < best_cost) {
            best = CommodityId{static_cast<std::uint16_t>(i)};
            best_cost = per_satiety;
        }
    }
    return best;
}

std::optional<double> recipe_margin(const PolicyContext& ctx, const Recipe& r) {
    const auto& out = ctx.quotes[r.output.index];
    if (!out) return std::nullopt;
    double margin = *out;
    for (const auto& in : r.inputs) {
        const auto& p = ctx.quotes[in.item.index];
        if (!p) return std::nullopt;
        margin -= static_cast<double>(in.per_unit) * *p;
    }
    const double energy = std::max(r.energy_cost.to_double(), 1e-9);
    return margin / energy;
}

std::optional<CommodityId> best_recipe(const PolicyContext& ctx) {
    std::optional<CommodityId> best;
    double best_margin = 0.0;
    for (const auto& r : ctx.cfg.recipes) {
        const auto& spec = ctx.cfg.commodity(r.output);
        if (spec.r_min && ctx.agent.residential_tier < *spec.r_min) continue;
        const auto m = recipe_margin(ctx, r);
        if (!m) continue;
        if (!best || *m > best_margin) {
            best = r.output;
            best_margin = *m;
        }
    }
    return best;
}

std::vector<OccupationId> reachable_jobs(const PolicyContext& ctx, bool ignore_prerequisite) {
    std::vector<OccupationId> out;
    for (std::size_t j = 0; j < ctx.cfg.occupations.size(); ++j) {
        const auto& occ = ctx.cfg.occupations[j];
        const double thr = j < ctx.thresholds.size() ? ctx.thresholds[j] : ctx.cfg.effective_floor(occ);
        if (ctx.agent.education < thr || ctx.agent.residential_tier < occ.r_min) continue;
        if (!ignore_prerequisite && occ.prereq_commodity && !ctx.agent.has_consumed(*occ.prereq_commodity)) continue;
        out.push_back({static_cast<std::uint16_t>(j)});
    }
    std::stable_sort(out.begin(), out.end(), [&](OccupationId a, OccupationId b) {
        return ctx.cfg.occupation(a).base_wage > ctx.cfg.occupation(b).base_wage;
    });
    return out;
}

}  // namespace policy_util

using namespace policy_util;

std::vector<OccupationId> Policy::applications(const PolicyContext& ctx) const {
    std::vector<OccupationId> jobs = reachable_jobs(ctx, false);
    if (ctx.agent.job) {
        const double current = ctx.cfg.occupation(*ctx.agent.job).base_wage;
        std::erase_if(jobs, [&](OccupationId o) { return ctx.cfg.occupation(o).base_wage <= current; });
    }
    return jobs;
}

namespace {

double frac(Level v, Level cap) { return cap.raw() > 0 ? static_cast<double>(v.raw()) / cap.raw() : 0.0; }

std::optional<Currency> buy_cost(const PolicyContext& ctx, CommodityId c, Units q) {
    const LiquidityPool* p = ctx.market.pool(c);
    if (!p || q <= 0 || q >= p->inventory_supply()) return std::nullopt;
    try {
        return p->buy_cost(q);
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// Eat held food first, then buy the cheapest satiety on the market.
void feed(const PolicyContext& ctx, std::vector<Action>& plan, double target) {
    const AgentState& a = ctx.agent;
    const StateCaps& caps = ctx.cfg.caps(a.residential_tier);
    double need = target * caps.satiety.to_double() - a.satiety.to_double();
    for (std::size_t i = 0; i < ctx.cfg.commodities.size() && need > 0.0; ++i) {
        const auto& c = ctx.cfg.commodities[i];
        if (!c.edible() || a.inventory[i] <= 0) continue;
        const auto q = std::min<Units>(a.inventory[i], static_cast<Units>(std::ceil(need / c.satiety_per_unit)));
        plan.push_back(Action::eat({static_cast<std::uint16_t>(i)}, q));
        need -= static_cast<double>(q) * c.satiety_per_unit;
    }
    if (need <= 0.0) return;
    const auto food = cheapest_food(ctx);
    if (!food) return;
    const double spu = ctx.cfg.commodity(*food).satiety_per_unit;
    auto q = static_cast<Units>(std::ceil(need / spu));
    const Currency budget = Currency::from_double(a.balance.to_double() * ctx.param("food_budget_share", 0.8));
    for (; q > 0; q = q / 2) {
        const auto cost = buy_cost(ctx, *food, q);
        if (cost && *cost <= budget) break;
    }
    if (q <= 0) return;
    plan.push_back(Action::buy(*food, q));
    plan.push_back(Action::eat(*food, q));
}

/// Eating, doctor visits and sleep. Returns true when the agent sleeps this tick.
bool look_after(const PolicyContext& ctx, std::vector<Action>& plan) {
    const AgentState& a = ctx.agent;
    const StateCaps& caps = ctx.cfg.caps(a.residential_tier);
    const auto& ph = ctx.cfg.params.physiology;

    if (frac(a.satiety, caps.satiety) < ctx.param("eat_below", 0.5)) feed(ctx, plan, ctx.param("eat_to", 0.9));

    const bool sick = a.health < ph.health_min || frac(a.health, caps.health) < ctx.param("doctor_below", 0.6);
    if (sick && a.balance.to_double() >= ph.doctor_fee.to_double() * 2.0) plan.push_back(Action::see_doctor());

    const double e = frac(a.energy, caps.energy);
    const bool resting = a.awake_time <= ctx.tick_length;
    if (a.energy < ph.energy_min || e < ctx.param("sleep_below", 0.25) || (resting && e < ctx.param("wake_at", 0.9))) {
        plan.push_back(Action::sleep(ctx.tick_length));
        return true;
    }
    return false;
}

/// Buy and consume the prerequisite good of the best job that only lacks it.
void unlock_prerequisite(const PolicyContext& ctx, std::vector<Action>& plan) {
    const auto jobs = reachable_jobs(ctx, true);
    const double current = ctx.agent.job ? ctx.cfg.occupation(*ctx.agent.job).base_wage : 0.0;
    for (const OccupationId o : jobs) {
        const auto& occ = ctx.cfg.occupation(o);
        if (occ.base_wage <= current) break;
        if (!occ.prereq_commodity || ctx.agent.has_consumed(*occ.prereq_commodity)) return;
        const CommodityId item = *occ.prereq_commodity;
        if (ctx.agent.held(item) > 0) {
            plan.push_back(Action::eat(item, 1));
            return;
        }
        const auto cost = buy_cost(ctx, item, 1);
        if (cost && cost->to_double() <= ctx.agent.balance.to_double() * ctx.param("unlock_budget_share", 0.5)) {
            plan.push_back(Action::buy(item, 1));
            plan.push_back(Action::eat(item, 1));
        }
        return;
    }
}

/// Sell everything held beyond the keep levels once a lot is large enough.
void sell_stock(const PolicyContext& ctx, std::vector<Action>& plan, Units lot, Units food_keep) {
    std::vector<Units> held = ctx.agent.inventory;
    for (const Action& p : plan) {
        if (p.kind == ActionKind::Eat || p.kind == ActionKind::Sell) held[p.item.index] -= p.quantity;
        if (p.kind == ActionKind::Buy) held[p.item.index] += p.quantity;
    }
    for (std::size_t i = 0; i < held.size(); ++i) {
        if (!ctx.quotes[i]) continue;
        const Units keep = ctx.cfg.commodities[i].edible() ? food_keep : 0;
        const Units spare = held[i] - keep;
        if (spare >= lot) plan.push_back(Action::sell({static_cast<std::uint16_t>(i)}, spare));
    }
}

/// Buy the missing inputs and craft up to `want` units of `item`.
void produce(const PolicyContext& ctx, std::vector<Action>& plan, CommodityId item, Units want) {
    const AgentState& a = ctx.agent;
    const Recipe* r = ctx.cfg.recipe_for(item);
    if (!r || want <= 0) return;
    Units q = want;
    if (r->energy_cost > Level{}) {
        const Level reserve = Level::from_double(ctx.cfg.caps(a.residential_tier).energy.to_double() * 0.1);
        q = std::min(q, std::max<std::int64_t>(0, (a.energy - reserve).raw()) / r->energy_cost.raw());
    }
    if (r->satiety_cost > Level{}) q = std::min(q, a.satiety.raw() / r->satiety_cost.raw());
    for (; q > 0; --q) {
        Currency total;
        bool ok = true;
        for (const auto& in : r->inputs) {
            const Units need = in.per_unit * q - a.held(in.item);
            if (need <= 0) continue;
            const auto cost = buy_cost(ctx, in.item, need);
            if (!cost) {
                ok = false;
                break;
            }
            total += *cost;
        }
        if (ok && total <= a.balance) break;
    }
    if (q <= 0) return;
    for (const auto& in : r->inputs) {
        const Units need = in.per_unit * q - a.held(in.item);
        if (need > 0) plan.push_back(Action::buy(in.item, need));
    }
    plan.push_back(Action::craft(item, q));
}

Units draw_lot(Rng& rng, double mean) {
    // Geometric lot sizes: mostly small, occasionally large.
    const double p = 1.0 / std::max(1.0, mean);
    const double u = std::max(rng.uniform01(), 1e-12);
    return 1 + static_cast<Units>(std::floor(std::log(u) / std::log1p(-std::min(p, 0.999999))));
}

class SubsistenceWorker : public Policy {
public:
    std::vector<Action> decide(const PolicyContext& ctx, Rng& rng) const override {
        std::vector<Action> plan;
        if (look_after(ctx, plan)) return plan;
        if (ctx.param("unlock", 1.0) > 0.0) unlock_prerequisite(ctx, plan);
        if (ctx.agent.job) {
            plan.push_back(Action::work(ctx.tick_length));
            return plan;
        }
        // Unemployed: gather a raw good and sell it.
        std::optional<CommodityId> best;
        double best_margin = 0.0;
        for (const auto& r : ctx.cfg.recipes) {
            if (!r.inputs.empty()) continue;
            const auto& spec = ctx.cfg.commodity(r.output);
            if (spec.r_min && ctx.agent.residential_tier < *spec.r_min) continue;
            const auto m = recipe_margin(ctx, r);
            if (m && (!best || *m > best_margin)) {
                best = r.output;
                best_margin = *m;
            }
        }
        if (best && rng.bernoulli(ctx.param("forage_prob", 0.5))) {
            produce(ctx, plan, *best, draw_lot(rng, ctx.param("forage_batch", 3.0)));
        }
        sell_stock(ctx, plan, static_cast<Units>(ctx.param("sell_lot", 5.0)),
                   static_cast<Units>(ctx.param("food_keep", 3.0)));
        return plan;
    }
};

class StudentInvestor : public Policy {
public:
    std::vector<Action> decide(const PolicyContext& ctx, Rng& rng) const override {
        std::vector<Action> plan;
        if (look_after(ctx, plan)) return plan;
        unlock_prerequisite(ctx, plan);
        const AgentState& a = ctx.agent;
        const bool studying = a.education < ctx.param("study_target", 400.0);
        if (a.job && (!studying || rng.bernoulli(ctx.param("work_share", 0.5)))) {
            plan.push_back(Action::work(ctx.tick_length));
            return plan;
        }
        if (!studying && ctx.param("keep_studying", 1.0) <= 0.0) return plan;

        const auto& paid = ctx.cfg.params.study[static_cast<std::size_t>(StudyKind::PaidLearning)];
        const double reserve = ctx.param("tuition_reserve", 300.0);
        const double tick_fee = paid.fee_per_hour.to_double() * to_hours(ctx.tick_length);
        const auto& reading = ctx.cfg.params.study[static_cast<std::size_t>(StudyKind::Reading)];
        if (a.balance.to_double() >= tick_fee + reserve) {
            plan.push_back(Action::learn(StudyKind::PaidLearning, ctx.tick_length));
        } else if (!reading.requires_item || a.held(*reading.requires_item) > 0) {
            plan.push_back(Action::learn(StudyKind::Reading, ctx.tick_length));
        } else {
            plan.push_back(Action::learn(StudyKind::SelfStudy, ctx.tick_length));
        }
        return plan;
    }

    std::vector<OccupationId> applications(const PolicyContext& ctx) const override {
        std::vector<OccupationId> jobs = Policy::applications(ctx);
        const int floor_tier = static_cast<int>(ctx.param("min_apply_tier", 1.0));
        std::erase_if(jobs, [&](OccupationId o) { return ctx.cfg.occupation(o).tier < floor_tier; });
        return jobs;
    }
};

class ProducerTrader : public Policy {
public:
    std::vector<Action> decide(const PolicyContext& ctx, Rng& rng) const override {
        std::vector<Action> plan;
        if (look_after(ctx, plan)) return plan;
        sell_stock(ctx, plan, draw_lot(rng, ctx.param("sell_lot", 4.0)), static_cast<Units>(ctx.param("food_keep", 3.0)));

        std::optional<CommodityId> target = best_recipe(ctx);
        if (rng.bernoulli(ctx.param("explore", 0.15))) {
            std::vector<CommodityId> allowed;
            for (const auto& r : ctx.cfg.recipes) {
                const auto& spec = ctx.cfg.commodity(r.output);
                if ((!spec.r_min || ctx.agent.residential_tier >= *spec.r_min) && spec.pooled()) allowed.push_back(r.output);
            }
            if (!allowed.empty()) target = allowed[rng.index(allowed.size())];
        }
        if (!target) return plan;
        const Recipe* r = ctx.cfg.recipe_for(*target);
        const auto margin = r ? recipe_margin(ctx, *r) : std::nullopt;
        if (!margin || *margin <= ctx.param("min_margin", 0.0)) return plan;
        produce(ctx, plan, *target, draw_lot(rng, ctx.param("craft_batch", 4.0)));
        return plan;
    }

    std::vector<OccupationId> applications(const PolicyContext& ctx) const override {
        if (ctx.param("apply", 0.0) <= 0.0) return {};
        return Policy::applications(ctx);
    }
};

class RandomExplorer : public Policy {
public:
    std::vector<Action> decide(const PolicyContext& ctx, Rng& rng) const override {
        std::vector<Action> plan;
        if (look_after(ctx, plan)) return plan;
        const AgentState& a = ctx.agent;
        const auto n = ctx.cfg.commodities.size();
        switch (rng.index(6)) {
            case 0: {
                const CommodityId c{static_cast<std::uint16_t>(rng.index(n))};
                const Units q = draw_lot(rng, ctx.param("trade_lot", 2.0));
                const auto cost = buy_cost(ctx, c, q);
                if (cost && cost->to_double() <= a.balance.to_double() * ctx.param("spend_share", 0.2)) {
                    plan.push_back(Action::buy(c, q));
                }
                break;
            }
            case 1: {
                const CommodityId c{static_cast<std::uint16_t>(rng.index(n))};
                if (ctx.quotes[c.index] && a.held(c) > 0) {
                    plan.push_back(Action::sell(c, 1 + static_cast<Units>(rng.index(static_cast<std::size_t>(a.held(c))))));
                }
                break;
            }
            case 2: {
                const auto& r = ctx.cfg.recipes[rng.index(ctx.cfg.recipes.size())];
                const auto& spec = ctx.cfg.commodity(r.output);
                if (!spec.r_min || a.residential_tier >= *spec.r_min) produce(ctx, plan, r.output, 1);
                break;
            }
            case 3:
                if (a.job) {
                    plan.push_back(Action::work(ctx.tick_length));
                } else {
                    plan.push_back(Action::learn(StudyKind::SelfStudy, ctx.tick_length));
                }
                break;
            case 4: sell_stock(ctx, plan, 1, 1); break;
            default: break;
        }
        return plan;
    }
};

class Idle : public Policy {
public:
    std::vector<Action> decide(const PolicyContext&, Rng&) const override { return {}; }
    std::vector<OccupationId> applications(const PolicyContext&) const override { return {}; }
};

}  // namespace

std::unique_ptr<Policy> make_policy(std::string_view name) {
    if (name == "SubsistenceWorker") return std::make_unique<SubsistenceWorker>();
    if (name == "StudentInvestor") return std::make_unique<StudentInvestor>();
    if (name == "ProducerTrader") return std::make_unique<ProducerTrader>();
    if (name == "RandomExplorer") return std::make_unique<RandomExplorer>();
    if (name == "Idle") return std::make_unique<Idle>();
    throw InvalidAction(fmt::format("unknown policy '{}'", name));
}

}  // namespace econsim
