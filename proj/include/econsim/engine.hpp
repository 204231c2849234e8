#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "econsim/actions.hpp"
#include "econsim/labor.hpp"
#include "econsim/market.hpp"
#include "econsim/policy.hpp"

namespace econsim {

/// In-game time. One tick covers tick_length of in-game time; time_scale only
/// converts to the real-time equivalent.
struct SimulationClock {
    std::int64_t tick = 0;
    Duration tick_length = Duration::whole(300);
    double time_scale = 7.0;

    [[nodiscard]] Duration in_game() const { return tick_length * tick; }
    [[nodiscard]] double real_seconds() const { return in_game().to_double() / time_scale; }
};

struct EventRow {
    std::int64_t tick = 0;
    Duration time;
    std::string kind;
    AgentId agent = 0;
    std::string subject;
    std::string value;
    std::string detail;
};

/// Receives everything the engine logs. Rows arrive in deterministic order.
class LogSink {
public:
    virtual ~LogSink() = default;
    virtual void trade(std::int64_t /*tick*/, const TradeReceipt& /*r*/) {}
    virtual void event(const EventRow& /*e*/) {}
    virtual void snapshot(std::int64_t /*tick*/, const AgentState& /*a*/, Currency /*net_worth*/) {}
    virtual void prices(std::int64_t /*tick*/, const Quotes& /*q*/, const PriceIndexSnapshot& /*index*/) {}
    virtual void flush() {}
};

struct TickReport {
    std::int64_t tick = 0;
    std::size_t trades = 0;
    std::size_t productions = 0;
    std::size_t repairs = 0;
    std::size_t violations = 0;
    std::size_t failures = 0;  // execution errors after validation
    std::size_t subsidies = 0;
    bool recruitment = false;
    std::size_t assignments = 0;
};

/// Full world state: agents, pools, labor market and clock.
class Simulation {
public:
    static constexpr std::size_t kRecentFailures = 8;

    Simulation(WorldConfig cfg, std::uint64_t seed, LogSink* sink = nullptr);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// One tick: physiology and safety net, policies, validation, execution,
    /// recruitment and wages on cycle ticks, then the log flush.
    TickReport step();
    void run(std::int64_t ticks);

    /// Throws AccountingMismatch when either ledger identity fails.
    void check_accounting() const;

    void write_snapshots();

    [[nodiscard]] const WorldConfig& config() const { return cfg_; }
    [[nodiscard]] const std::vector<AgentState>& agents() const { return agents_; }
    [[nodiscard]] std::vector<AgentState>& agents() { return agents_; }
    [[nodiscard]] const Market& market() const { return market_; }
    [[nodiscard]] const SimulationClock& clock() const { return clock_; }
    [[nodiscard]] const WageSchedule& wages() const { return wages_; }
    [[nodiscard]] const RecruitmentState& recruitment() const { return recruitment_; }
    [[nodiscard]] const std::deque<std::string>& recent_failures(AgentId a) const;
    [[nodiscard]] Currency initial_balances() const { return initial_balances_; }
    [[nodiscard]] Currency total_balances() const;
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

private:
    struct Runtime;

    void physiology_phase(TickReport& rep);
    void recruitment_phase(TickReport& rep, std::vector<std::vector<OccupationId>>& applications);
    void execute_plan(std::size_t i, const std::vector<Action>& plan, TickReport& rep);
    void note_failure(std::size_t i, std::string reason);
    void emit(std::string kind, AgentId agent, std::string subject, std::string value, std::string detail = {});

    WorldConfig cfg_;
    std::uint64_t seed_;
    LogSink* sink_;
    SimulationClock clock_;
    Market market_;
    std::vector<AgentState> agents_;
    std::vector<Runtime> runtime_;
    WageSchedule wages_;
    RecruitmentState recruitment_;
    Rng wage_rng_;
    Rng order_rng_;
    Currency initial_balances_;
};

struct RunSummary {
    std::int64_t ticks = 0;
    std::size_t agents = 0;
    std::size_t trades = 0;
    std::size_t productions = 0;
    std::size_t repairs = 0;
    std::size_t violations = 0;
    std::size_t failures = 0;
    std::size_t subsidies = 0;
    int recruitment_cycles = 0;
    MoneyLedger ledger;
    Currency total_balances;
    double price_index = 1.0;
    double median_net_worth = 0.0;
};

/// Runs `ticks` ticks writing transactions.csv, events.csv, snapshots.csv,
/// prices.csv and summary.json into `out_dir`. Throws IoError.
RunSummary run_scenario(const WorldConfig& cfg, std::int64_t ticks, const std::filesystem::path& out_dir,
                        std::uint64_t seed);

}  // namespace econsim
