#include "econsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

namespace {

template <class Fixed>
std::string format_fixed(Fixed v, int digits) {
    const std::int64_t raw = v.raw();
    const std::uint64_t mag = raw < 0 ? 0 - static_cast<std::uint64_t>(raw) : static_cast<std::uint64_t>(raw);
    const auto scale = static_cast<std::uint64_t>(Fixed::scale);
    return fmt::format("{}{}.{:0{}}", raw < 0 ? "-" : "", mag / scale, mag % scale, digits);
}

}  // namespace

std::string format_currency(Currency c) { return format_fixed(c, 9); }
std::string format_level(Level l) { return format_fixed(l, 3); }
std::string format_duration(Duration d) { return format_fixed(d, 3); }
std::string format_price(double p) { return fmt::format("{:.9f}", p); }

std::string trade_row(std::int64_t tick, const TradeReceipt& r, const WorldConfig& cfg) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{}\n", tick, format_duration(r.timestamp),
                       cfg.commodity(r.commodity).id, to_string(r.side), r.quantity, format_currency(r.currency_delta),
                       format_price(r.effective_price), format_price(r.marginal_price_pre),
                       format_price(r.marginal_price_post), r.agent_id);
}

std::string event_row(const EventRow& e) {
    return fmt::format("{},{},{},{},{},{},{}\n", e.tick, format_duration(e.time), e.kind, e.agent, e.subject, e.value,
                       e.detail);
}

std::string snapshot_row(std::int64_t tick, const AgentState& a, Currency net_worth, const WorldConfig& cfg) {
    std::string inv;
    for (std::size_t i = 0; i < a.inventory.size(); ++i) {
        if (a.inventory[i] == 0) continue;
        if (!inv.empty()) inv += '|';
        inv += fmt::format("{}:{}", cfg.commodities[i].id, a.inventory[i]);
    }
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", tick, a.id, a.policy, a.policy_tag,
                       format_currency(a.balance), format_level(a.satiety), format_level(a.energy),
                       format_level(a.health), format_price(a.education), a.residential_tier,
                       a.job ? cfg.occupation(*a.job).id : std::string{}, a.incapacitated ? 1 : 0,
                       a.low_satiety_streak, format_currency(net_worth), inv);
}

StreamLogSink::StreamLogSink(const WorldConfig& cfg, std::ostream* transactions, std::ostream* events,
                             std::ostream* snapshots, std::ostream* prices)
    : cfg_(cfg), out_{transactions, events, snapshots, prices} {
    buf_[0] = fmt::format("{}\n", kTransactionHeader);
    buf_[1] = fmt::format("{}\n", kEventHeader);
    buf_[2] = fmt::format("{}\n", kSnapshotHeader);
    buf_[3] = "tick,pcr_food,pcr_nonfood,pcr_overall";
    for (const auto& c : cfg.commodities) {
        if (c.pooled()) buf_[3] += "," + c.id;
    }
    buf_[3] += '\n';
}

void StreamLogSink::trade(std::int64_t tick, const TradeReceipt& r) { buf_[0] += trade_row(tick, r, cfg_); }
void StreamLogSink::event(const EventRow& e) { buf_[1] += event_row(e); }
void StreamLogSink::snapshot(std::int64_t tick, const AgentState& a, Currency net_worth) {
    buf_[2] += snapshot_row(tick, a, net_worth, cfg_);
}

void StreamLogSink::prices(std::int64_t tick, const Quotes& q, const PriceIndexSnapshot& index) {
    std::string& b = buf_[3];
    b += fmt::format("{},{},{},{}", tick, format_price(index.pcr_food), format_price(index.pcr_nonfood),
                     format_price(index.pcr_overall));
    for (const auto& p : q) {
        if (p) b += "," + format_price(*p);
    }
    b += '\n';
}

void StreamLogSink::flush() {
    for (int i = 0; i < 4; ++i) {
        if (out_[i] && !buf_[i].empty()) {
            out_[i]->write(buf_[i].data(), static_cast<std::streamsize>(buf_[i].size()));
            if (!*out_[i]) throw IoError("failed to write log output");
        }
        buf_[i].clear();
    }
}

CsvFiles::CsvFiles(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    auto open = [&](std::ofstream& f, const char* name) {
        f.open(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError(fmt::format("cannot write '{}'", (dir / name).string()));
    };
    open(tx, "transactions.csv");
    open(ev, "events.csv");
    open(snap, "snapshots.csv");
    open(px, "prices.csv");
}

CsvLogSink::CsvLogSink(const WorldConfig& cfg, const std::filesystem::path& dir)
    : CsvFiles(dir), StreamLogSink(cfg, &tx, &ev, &snap, &px) {}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

namespace {

template <class T>
T parse_num(const std::string& s, std::size_t line_no) {
    T v{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(fmt::format("line {}: bad number '{}'", line_no, s));
    }
    return v;
}

double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError(fmt::format("line {}: bad number '{}'", line_no, s));
    }
    return v;
}

template <class Row, class F>
std::vector<Row> read_rows(std::istream& in, std::string_view header, std::size_t min_fields, F&& convert) {
    std::vector<Row> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw ParseError(fmt::format("unexpected header '{}'", line));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() < min_fields) {
            throw ParseError(fmt::format("line {}: expected {} fields, got {}", line_no, min_fields, f.size()));
        }
        rows.push_back(convert(f, line_no));
    }
    return rows;
}

template <class Fn>
auto with_file(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
    return fn(in);
}

}  // namespace

std::vector<TradeRecord> read_transactions(std::istream& in) {
    return read_rows<TradeRecord>(in, kTransactionHeader, 10, [](const std::vector<std::string>& f, std::size_t n) {
        TradeRecord r;
        r.tick = parse_num<std::int64_t>(f[0], n);
        r.time = parse_double(f[1], n);
        r.commodity = f[2];
        if (f[3] == "buy") {
            r.side = Side::Buy;
        } else if (f[3] == "sell") {
            r.side = Side::Sell;
        } else {
            throw ParseError(fmt::format("line {}: bad side '{}'", n, f[3]));
        }
        r.quantity = parse_num<Units>(f[4], n);
        r.currency_delta = parse_double(f[5], n);
        r.effective_price = parse_double(f[6], n);
        r.marginal_price_pre = parse_double(f[7], n);
        r.marginal_price_post = parse_double(f[8], n);
        r.agent = parse_num<AgentId>(f[9], n);
        return r;
    });
}

std::vector<TradeRecord> read_transactions(const std::filesystem::path& path) {
    return with_file(path, [](std::istream& in) { return read_transactions(in); });
}

std::vector<EventRecord> read_events(std::istream& in) {
    return read_rows<EventRecord>(in, kEventHeader, 7, [](const std::vector<std::string>& f, std::size_t n) {
        EventRecord e;
        e.tick = parse_num<std::int64_t>(f[0], n);
        e.time = parse_double(f[1], n);
        e.kind = f[2];
        e.agent = parse_num<AgentId>(f[3], n);
        e.subject = f[4];
        e.value = f[5];
        e.detail = f[6];
        return e;
    });
}

std::vector<EventRecord> read_events(const std::filesystem::path& path) {
    return with_file(path, [](std::istream& in) { return read_events(in); });
}

std::vector<SnapshotRecord> read_snapshots(std::istream& in) {
    return read_rows<SnapshotRecord>(in, kSnapshotHeader, 15, [](const std::vector<std::string>& f, std::size_t n) {
        SnapshotRecord s;
        s.tick = parse_num<std::int64_t>(f[0], n);
        s.agent = parse_num<AgentId>(f[1], n);
        s.policy = f[2];
        s.tag = f[3];
        s.balance = parse_double(f[4], n);
        s.education = parse_double(f[8], n);
        s.residential_tier = parse_num<int>(f[9], n);
        s.job = f[10];
        s.net_worth = parse_double(f[13], n);
        return s;
    });
}

std::vector<SnapshotRecord> read_snapshots(const std::filesystem::path& path) {
    return with_file(path, [](std::istream& in) { return read_snapshots(in); });
}

std::vector<SnapshotRecord> final_snapshot(const std::vector<SnapshotRecord>& rows) {
    if (rows.empty()) return {};
    const std::int64_t last =
        std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; })->tick;
    std::vector<SnapshotRecord> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [&](const auto& r) { return r.tick == last; });
    return out;
}

}  // namespace econsim
