#include "econsim/engine.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "econsim/errors.hpp"
#include "econsim/io.hpp"

namespace econsim {

struct Simulation::Runtime {
    std::unique_ptr<Policy> policy;
    const std::map<std::string, double>* params = nullptr;
    Rng rng;
    std::deque<std::string> failures;
};

namespace {

constexpr std::uint64_t kWageStream = 0xFFFF'FFFF'0000'0001ULL;
constexpr std::uint64_t kOrderStream = 0xFFFF'FFFF'0000'0002ULL;

std::string sanitize(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
    return s;
}

std::vector<double> initial_thresholds(const WorldConfig& cfg, const std::vector<AgentState>& agents) {
    std::vector<double> scores;
    scores.reserve(agents.size());
    for (const auto& a : agents) scores.push_back(a.education);
    std::sort(scores.begin(), scores.end());
    std::vector<double> out;
    for (const auto& occ : cfg.occupations) {
        const double floor = cfg.effective_floor(occ);
        out.push_back(scores.empty() ? floor
                                     : std::max(floor, empirical_quantile_sorted(scores, 1.0 - occ.eligibility_share)));
    }
    return out;
}

}  // namespace

Simulation::Simulation(WorldConfig cfg, std::uint64_t seed, LogSink* sink)
    : cfg_(std::move(cfg)),
      seed_(seed),
      sink_(sink),
      market_(cfg_),
      wage_rng_(mix_seed(seed, kWageStream)),
      order_rng_(mix_seed(seed, kOrderStream)) {
    clock_.tick_length = cfg_.params.tick_length;
    clock_.time_scale = cfg_.params.time_scale;

    AgentId next = 0;
    for (const auto& g : cfg_.population) {
        for (int k = 0; k < g.count; ++k) {
            AgentState a = make_agent(next, cfg_, g.residential_tier, Currency::from_double(g.balance), g.education);
            a.policy = g.policy;
            a.policy_tag = g.tag;
            for (const auto& item : g.inventory) a.inventory[item.item.index] += item.per_unit;
            agents_.push_back(std::move(a));
            runtime_.push_back(Runtime{make_policy(g.policy), &g.params, Rng(mix_seed(seed, next)), {}});
            ++next;
        }
    }
    initial_balances_ = total_balances();
    recruitment_.thresholds = initial_thresholds(cfg_, agents_);
    recruitment_.open_vacancies.clear();
    for (const auto& occ : cfg_.occupations) recruitment_.open_vacancies.push_back(occ.vacancies);
    wages_ = compute_wages(cfg_, recruitment_.thresholds, market_.price_index(cfg_).pcr_overall, wage_rng_);
}

Simulation::~Simulation() = default;

Currency Simulation::total_balances() const {
    Currency sum;
    for (const auto& a : agents_) sum += a.balance;
    return sum;
}

const std::deque<std::string>& Simulation::recent_failures(AgentId a) const { return runtime_.at(a).failures; }

void Simulation::check_accounting() const {
    const MoneyLedger& l = market_.ledger();
    const Currency expected = initial_balances_ + l.circulation_change();
    const Currency actual = total_balances();
    if (expected != actual) {
        throw AccountingMismatch(fmt::format("tick {}: balances {} but ledger implies {}", clock_.tick,
                                             format_currency(actual), format_currency(expected)));
    }
    const Currency net_mint = l.minted_by_sales - l.burned_by_purchases;
    if (net_mint != market_.reserve_drawdown()) {
        throw AccountingMismatch(fmt::format("tick {}: net mint {} but pool drawdown {}", clock_.tick,
                                             format_currency(net_mint), format_currency(market_.reserve_drawdown())));
    }
}

void Simulation::emit(std::string kind, AgentId agent, std::string subject, std::string value, std::string detail) {
    if (!sink_) return;
    sink_->event(EventRow{clock_.tick, clock_.in_game(), std::move(kind), agent, sanitize(std::move(subject)),
                          sanitize(std::move(value)), sanitize(std::move(detail))});
}

void Simulation::note_failure(std::size_t i, std::string reason) {
    auto& f = runtime_[i].failures;
    f.push_back(std::move(reason));
    while (f.size() > kRecentFailures) f.pop_front();
}

void Simulation::physiology_phase(TickReport& rep) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        AgentState& a = agents_[i];
        const bool was = a.incapacitated;
        tick_physiology(a, clock_.tick_length, runtime_[i].rng, cfg_);
        if (a.incapacitated != was) emit(a.incapacitated ? "incapacitated" : "recovered", a.id, "", "");
        if (apply_safety_net(a, cfg_)) {
            const auto& sn = cfg_.params.safety_net;
            market_.ledger().subsidy_units += sn.subsidy_amount;
            ++rep.subsidies;
            emit("subsidy", a.id, cfg_.commodity(sn.subsidy_item).id, fmt::format("{}", sn.subsidy_amount));
        }
    }
}

void Simulation::execute_plan(std::size_t i, const std::vector<Action>& plan, TickReport& rep) {
    AgentState& a = agents_[i];
    ExecEnv env{&cfg_, &market_, &wages_, clock_.in_game(), clock_.tick_length};
    for (const Action& act : plan) {
        ActionEffect fx;
        try {
            fx = execute_action(a, act, env, runtime_[i].rng);
        } catch (const Error& e) {
            ++rep.failures;
            note_failure(i, e.what());
            emit("failure", a.id, describe(act, cfg_), "", e.what());
            break;
        }
        if (fx.trade) {
            ++rep.trades;
            if (sink_) sink_->trade(clock_.tick, *fx.trade);
        }
        if (fx.production) {
            const ProductionOutcome& p = *fx.production;
            ++rep.productions;
            emit("production", a.id, cfg_.commodity(p.commodity).id, fmt::format("{}", p.produced_units),
                 describe(p.binding, cfg_));
            if (p.reward_granted) {
                emit("reward", a.id, cfg_.commodity(*p.reward_granted).id, fmt::format("{}", p.reward_units));
            }
        }
    }
}

void Simulation::recruitment_phase(TickReport& rep, std::vector<std::vector<OccupationId>>& applications) {
    run_recruitment_cycle(agents_, applications, cfg_, recruitment_);
    rep.recruitment = true;
    rep.assignments = recruitment_.assignments.size();
    for (const Assignment& as : recruitment_.assignments) {
        emit("assignment", as.agent, cfg_.occupation(as.occupation).id,
             fmt::format("{}", cfg_.occupation(as.occupation).tier),
             fmt::format("H={};R={};threshold={};previous={}", as.education, as.residential_tier, as.threshold,
                         as.previous ? cfg_.occupation(*as.previous).id : std::string{}));
    }
    for (std::size_t j = 0; j < cfg_.occupations.size(); ++j) {
        emit("threshold", 0, cfg_.occupations[j].id, format_price(recruitment_.thresholds[j]),
             fmt::format("open={}", recruitment_.open_vacancies[j]));
    }
    wages_ = compute_wages(cfg_, recruitment_.thresholds, market_.price_index(cfg_).pcr_overall, wage_rng_);
    for (std::size_t j = 0; j < cfg_.occupations.size(); ++j) {
        const WageComponents& w = wages_.wages[j];
        emit("wage", 0, cfg_.occupations[j].id, format_currency(w.wage),
             fmt::format("phi={:.9f};index={:.9f};delta={:.9f}", w.phi, w.index, w.delta));
    }
}

TickReport Simulation::step() {
    TickReport rep;
    rep.tick = clock_.tick;
    const std::size_t n = agents_.size();

    physiology_phase(rep);

    const Quotes quotes = market_.quotes();
    const int period = cfg_.params.recruitment_period;
    const bool cycle = period > 0 && clock_.tick % period == 0;
    std::vector<std::vector<Action>> plans(n);
    std::vector<std::vector<OccupationId>> applications(cycle ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
        Runtime& rt = runtime_[i];
        const PolicyContext ctx{agents_[i], cfg_,         market_,           quotes,       wages_,
                                recruitment_.thresholds, clock_.tick, clock_.tick_length, rt.failures, *rt.params};
        plans[i] = rt.policy->decide(ctx, rt.rng);
        if (cycle) applications[i] = rt.policy->applications(ctx);
    }

    const WorldView view{&cfg_, &market_, &wages_, clock_.in_game(), clock_.tick_length};
    for (std::size_t i = 0; i < n; ++i) {
        if (plans[i].empty()) continue;
        ValidationReport vr = simulate_actions(agents_[i], plans[i], view, runtime_[i].rng);
        for (const auto& v : vr.verdicts) {
            if (v.verdict == Verdict::Repaired) ++rep.repairs;
            if (v.verdict == Verdict::Violation) {
                ++rep.violations;
                note_failure(i, v.reason);
            }
        }
        plans[i] = std::move(vr.executable);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (cfg_.params.shuffle_order) {
        for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[order_rng_.index(k)]);
    }
    for (const std::size_t i : order) execute_plan(i, plans[i], rep);

    if (cycle) recruitment_phase(rep, applications);

    check_accounting();
    if (sink_) {
        sink_->prices(clock_.tick, market_.quotes(), market_.price_index(cfg_));
        sink_->flush();
    }
    ++clock_.tick;
    return rep;
}

void Simulation::run(std::int64_t ticks) {
    for (std::int64_t t = 0; t < ticks; ++t) step();
}

void Simulation::write_snapshots() {
    if (!sink_) return;
    const Quotes quotes = market_.quotes();
    for (const auto& a : agents_) sink_->snapshot(clock_.tick, a, net_worth(a, quotes, cfg_));
    sink_->flush();
}

RunSummary run_scenario(const WorldConfig& cfg, std::int64_t ticks, const std::filesystem::path& out_dir,
                        std::uint64_t seed) {
    if (ticks < 0) throw std::invalid_argument("ticks must be non-negative");
    CsvLogSink sink(cfg, out_dir);
    Simulation sim(cfg, seed, &sink);
    RunSummary s;
    s.ticks = ticks;
    s.agents = sim.agents().size();
    const int every = cfg.params.snapshot_interval;
    for (std::int64_t t = 0; t < ticks; ++t) {
        const TickReport r = sim.step();
        s.trades += r.trades;
        s.productions += r.productions;
        s.repairs += r.repairs;
        s.violations += r.violations;
        s.failures += r.failures;
        s.subsidies += r.subsidies;
        if (r.recruitment) ++s.recruitment_cycles;
        if (every > 0 && sim.clock().tick % every == 0 && sim.clock().tick != ticks) sim.write_snapshots();
    }
    if (ticks > 0) sim.write_snapshots();
    sink.flush();

    s.ledger = sim.market().ledger();
    s.total_balances = sim.total_balances();
    s.price_index = sim.market().price_index(cfg).pcr_overall;
    const Quotes quotes = sim.market().quotes();
    std::vector<double> worth;
    for (const auto& a : sim.agents()) worth.push_back(net_worth(a, quotes, cfg).to_double());
    if (!worth.empty()) {
        std::sort(worth.begin(), worth.end());
        const std::size_t m = worth.size() / 2;
        s.median_net_worth = worth.size() % 2 ? worth[m] : 0.5 * (worth[m - 1] + worth[m]);
    }

    nlohmann::ordered_json j;
    j["scenario"] = cfg.name;
    j["seed"] = seed;
    j["ticks"] = s.ticks;
    j["agents"] = s.agents;
    j["in_game_seconds"] = sim.clock().in_game().to_double();
    j["real_seconds_equivalent"] = sim.clock().real_seconds();
    j["trades"] = s.trades;
    j["productions"] = s.productions;
    j["repairs"] = s.repairs;
    j["violations"] = s.violations;
    j["failures"] = s.failures;
    j["subsidies"] = s.subsidies;
    j["recruitment_cycles"] = s.recruitment_cycles;
    j["ledger"] = {{"minted_by_sales", format_currency(s.ledger.minted_by_sales)},
                   {"burned_by_purchases", format_currency(s.ledger.burned_by_purchases)},
                   {"wages_paid", format_currency(s.ledger.wages_paid)},
                   {"fees_collected", format_currency(s.ledger.fees_collected)},
                   {"subsidy_units", s.ledger.subsidy_units}};
    j["initial_balances"] = format_currency(sim.initial_balances());
    j["total_balances"] = format_currency(s.total_balances);
    j["price_index"] = s.price_index;
    j["median_net_worth"] = s.median_net_worth;
    std::ofstream out(out_dir / "summary.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", (out_dir / "summary.json").string()));
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed to write summary.json");
    return s;
}

}  // namespace econsim
