#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "econsim/engine.hpp"

namespace econsim {

inline constexpr std::string_view kTransactionHeader =
    "tick,in_game_seconds,commodity,side,quantity,currency_delta,effective_price,marginal_price_pre,"
    "marginal_price_post,agent_id";
inline constexpr std::string_view kEventHeader = "tick,in_game_seconds,kind,agent_id,subject,value,detail";
inline constexpr std::string_view kSnapshotHeader =
    "tick,agent_id,policy,tag,balance,satiety,energy,health,education,residential_tier,job,incapacitated,"
    "low_satiety_streak,net_worth,inventory";

/// Exact decimal rendering of a fixed-point value ("-12.500000000").
std::string format_currency(Currency c);
std::string format_level(Level l);
std::string format_duration(Duration d);
/// Prices and other doubles: fixed 9 decimals.
std::string format_price(double p);

std::string trade_row(std::int64_t tick, const TradeReceipt& r, const WorldConfig& cfg);
std::string event_row(const EventRow& e);
std::string snapshot_row(std::int64_t tick, const AgentState& a, Currency net_worth, const WorldConfig& cfg);

/// Buffers rows in memory and hands them to streams on flush().
class StreamLogSink : public LogSink {
public:
    StreamLogSink(const WorldConfig& cfg, std::ostream* transactions, std::ostream* events, std::ostream* snapshots,
                  std::ostream* prices);

    void trade(std::int64_t tick, const TradeReceipt& r) override;
    void event(const EventRow& e) override;
    void snapshot(std::int64_t tick, const AgentState& a, Currency net_worth) override;
    void prices(std::int64_t tick, const Quotes& q, const PriceIndexSnapshot& index) override;
    void flush() override;

private:
    const WorldConfig& cfg_;
    std::ostream* out_[4];
    std::string buf_[4];
};

struct CsvFiles {
    explicit CsvFiles(const std::filesystem::path& dir);
    std::ofstream tx, ev, snap, px;
};

/// The four CSV files of a run directory, headers written on open.
class CsvLogSink : private CsvFiles, public StreamLogSink {
public:
    CsvLogSink(const WorldConfig& cfg, const std::filesystem::path& dir);
};

struct TradeRecord {
    std::int64_t tick = 0;
    double time = 0.0;  // in-game seconds
    std::string commodity;
    Side side = Side::Buy;
    Units quantity = 0;
    double currency_delta = 0.0;
    double effective_price = 0.0;
    double marginal_price_pre = 0.0;
    double marginal_price_post = 0.0;
    AgentId agent = 0;
};

struct EventRecord {
    std::int64_t tick = 0;
    double time = 0.0;
    std::string kind;
    AgentId agent = 0;
    std::string subject;
    std::string value;
    std::string detail;
};

struct SnapshotRecord {
    std::int64_t tick = 0;
    AgentId agent = 0;
    std::string policy;
    std::string tag;
    double balance = 0.0;
    double education = 0.0;
    int residential_tier = 1;
    std::string job;  // empty when unemployed
    double net_worth = 0.0;
};

/// Readers throw ParseError on malformed rows and IoError on unreadable files.
std::vector<TradeRecord> read_transactions(std::istream& in);
std::vector<TradeRecord> read_transactions(const std::filesystem::path& path);
std::vector<EventRecord> read_events(std::istream& in);
std::vector<EventRecord> read_events(const std::filesystem::path& path);
std::vector<SnapshotRecord> read_snapshots(std::istream& in);
std::vector<SnapshotRecord> read_snapshots(const std::filesystem::path& path);

/// Rows of the latest snapshot tick only.
std::vector<SnapshotRecord> final_snapshot(const std::vector<SnapshotRecord>& rows);

/// Splits one CSV line on commas (fields never contain commas or quotes).
std::vector<std::string> split_csv(std::string_view line);

}  // namespace econsim
