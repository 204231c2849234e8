#include "econsim/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "econsim/analytics.hpp"
#include "econsim/config.hpp"
#include "econsim/engine.hpp"
#include "econsim/errors.hpp"
#include "econsim/io.hpp"

#ifndef ECONSIM_VERSION
#define ECONSIM_VERSION "0.0.0"
#endif

namespace econsim::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", p.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed writing '{}'", p.string()));
}

// Temp file then rename, so a reader never sees half a manifest.
void write_atomic(const fs::path& p, const std::string& text) {
    fs::path tmp = p;
    tmp += ".tmp";
    write_file(tmp, text);
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError(fmt::format("cannot move '{}' into place: {}", p.string(), ec.message()));
}

void make_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", p.string(), ec.message()));
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string{}; }

ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

struct ScenarioFile {
    fs::path path;
    std::string hash;
    WorldConfig cfg;
};

ScenarioFile open_scenario(const fs::path& path) {
    ScenarioFile s;
    s.path = path;
    s.hash = hash_hex(fnv1a(slurp(path)));
    s.cfg = load_scenario(path);
    return s;
}

std::optional<std::uint64_t> opt_seed(const std::optional<std::int64_t>& s) {
    if (!s) return std::nullopt;
    return static_cast<std::uint64_t>(*s);
}

ojson summary_json(const RunSummary& s) {
    ojson j;
    j["ticks"] = s.ticks;
    j["agents"] = s.agents;
    j["trades"] = s.trades;
    j["productions"] = s.productions;
    j["repairs"] = s.repairs;
    j["violations"] = s.violations;
    j["failures"] = s.failures;
    j["subsidies"] = s.subsidies;
    j["recruitment_cycles"] = s.recruitment_cycles;
    j["price_index"] = s.price_index;
    j["median_net_worth"] = s.median_net_worth;
    return j;
}

ojson manifest(const std::string& command, const ScenarioFile& sc, std::uint64_t seed, std::int64_t ticks,
               const std::vector<std::string>& artifacts) {
    ojson j;
    j["schema"] = "econsim-manifest/1";
    j["tool_version"] = ECONSIM_VERSION;
    j["command"] = command;
    j["scenario"] = sc.path.generic_string();
    j["scenario_hash"] = sc.hash;
    j["seed"] = seed;
    j["ticks"] = ticks;
    j["artifacts"] = artifacts;
    return j;
}

const std::vector<std::string> kRunArtifacts = {"transactions.csv", "events.csv", "snapshots.csv", "prices.csv",
                                                "summary.json"};

// --- analyze ---------------------------------------------------------------

constexpr const char* kFactsHeader =
    "commodity,trades,bars,mean,stddev,skewness,excess_kurtosis,acf1_abs,ljung_box_q,ljung_box_dof,ljung_box_p,"
    "log_price_range,max_drawdown";

std::string facts_row(const analytics::StylizedFacts& f) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", f.commodity, f.trades, f.bars, num(f.moments.mean),
                       num(f.moments.stddev), num(f.moments.skewness), num(f.moments.excess_kurtosis),
                       f.acf_abs.empty() ? std::string{} : num(f.acf_abs.front()), num(f.ljung_box.statistic),
                       f.ljung_box.dof, num(f.ljung_box.p_value), num(f.stability.log_price_range),
                       num(f.stability.max_drawdown));
}

ojson facts_json(const analytics::StylizedFacts& f) {
    ojson j;
    j["commodity"] = f.commodity;
    j["trades"] = f.trades;
    j["bars"] = f.bars;
    j["mean"] = jnum(f.moments.mean);
    j["stddev"] = jnum(f.moments.stddev);
    j["skewness"] = jnum(f.moments.skewness);
    j["excess_kurtosis"] = jnum(f.moments.excess_kurtosis);
    ojson acf = ojson::array();
    for (double r : f.acf_abs) acf.push_back(jnum(r));
    j["acf_abs"] = acf;
    j["ljung_box"] = {{"statistic", jnum(f.ljung_box.statistic)},
                      {"dof", f.ljung_box.dof},
                      {"p_value", jnum(f.ljung_box.p_value)}};
    j["log_price_range"] = jnum(f.stability.log_price_range);
    j["max_drawdown"] = jnum(f.stability.max_drawdown);
    return j;
}

std::string ohlc_csv(const std::vector<analytics::OhlcBar>& bars) {
    std::string s = "interval_start,open,high,low,close,volume,trades\n";
    for (const auto& b : bars) {
        s += fmt::format("{},{},{},{},{},{},{}\n", num(b.interval_start), format_price(b.open), format_price(b.high),
                         format_price(b.low), format_price(b.close), b.volume, b.trade_count);
    }
    return s;
}

std::string returns_csv(const std::vector<analytics::OhlcBar>& bars, const std::vector<double>& r) {
    std::string s = "interval_start,log_return\n";
    for (std::size_t i = 0; i < r.size(); ++i) s += fmt::format("{},{}\n", num(bars[i + 1].interval_start), num(r[i]));
    return s;
}

struct AnalyzeOptions {
    fs::path log;
    std::string commodity;
    double interval = analytics::kDefaultInterval;
    int lags = analytics::kDefaultLags;
    fs::path out;
};

ojson analyze(const std::vector<TradeRecord>& log, const AnalyzeOptions& o) {
    const auto bars = analytics::build_ohlc(log, o.interval, o.commodity);
    if (bars.empty()) throw MissingCommodity(fmt::format("no trades of '{}' in the log", o.commodity));
    const auto facts = analytics::stylized_facts(log, o.commodity, o.interval, o.lags);
    const auto r = analytics::log_returns(bars);

    make_dir(o.out);
    write_file(o.out / "ohlc.csv", ohlc_csv(bars));
    write_file(o.out / "returns.csv", returns_csv(bars, r));
    write_file(o.out / "stylized_facts.csv", std::string(kFactsHeader) + "\n" + facts_row(facts));
    ojson j;
    j["schema"] = kReportSchema;
    j["interval_s"] = o.interval;
    j["lags"] = o.lags;
    j["facts"] = facts_json(facts);
    write_file(o.out / "stylized_facts.json", j.dump(2) + "\n");
    return j;
}

// --- stratify --------------------------------------------------------------

ojson stratify(const std::vector<SnapshotRecord>& agents, double bin_width, const fs::path& out) {
    const auto rep = analytics::stratification_report(agents, bin_width);
    make_dir(out);
    std::string bins = "lo,hi,count,median_education,median_net_worth\n";
    for (const auto& b : rep.bins) {
        bins += fmt::format("{},{},{},{},{}\n", num(b.lo), num(b.hi), b.count, num(b.median_education),
                            num(b.median_net_worth));
    }
    write_file(out / "education_bins.csv", bins);
    std::string occ = "occupation,count,median_net_worth\n";
    for (const auto& o : rep.ranking) occ += fmt::format("{},{},{}\n", o.occupation, o.count, num(o.median_net_worth));
    write_file(out / "occupation_wealth.csv", occ);

    ojson j;
    j["schema"] = kReportSchema;
    j["agents"] = agents.size();
    j["bin_width"] = bin_width;
    ojson jb = ojson::array();
    for (const auto& b : rep.bins) {
        jb.push_back({{"lo", b.lo},
                      {"hi", b.hi},
                      {"count", b.count},
                      {"median_education", b.median_education},
                      {"median_net_worth", b.median_net_worth}});
    }
    j["bins"] = jb;
    if (rep.fitted) {
        j["fit"] = {{"c0", rep.fit[0]}, {"c1", rep.fit[1]}, {"c2", rep.fit[2]}};
    } else {
        j["fit"] = nullptr;
    }
    ojson jr = ojson::array();
    for (const auto& o : rep.ranking) {
        jr.push_back({{"occupation", o.occupation}, {"count", o.count}, {"median_net_worth", o.median_net_worth}});
    }
    j["ranking"] = jr;
    write_file(out / "stratification.json", j.dump(2) + "\n");
    return j;
}

// --- error mapping ---------------------------------------------------------

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
}

int cmd_validate(const fs::path& scenario, bool as_json, std::ostream& out, std::ostream& err) {
    if (!fs::exists(scenario)) {
        err << "error: cannot read '" << scenario.string() << "'\n";
        return kIoError;
    }
    std::vector<Diagnostic> diags;
    try {
        diags = validate_catalog(parse_scenario(scenario));
    } catch (const DanglingReference& e) {
        diags.push_back({"DANGLING_REFERENCE", "", e.what()});
    }
    if (as_json) {
        ojson arr = ojson::array();
        for (const auto& d : diags) arr.push_back({{"code", d.code}, {"path", d.path}, {"message", d.message}});
        out << ojson{{"scenario", scenario.generic_string()}, {"ok", diags.empty()}, {"diagnostics", arr}}.dump(2)
            << '\n';
    }
    for (const auto& d : diags) err << d.code << ' ' << d.path << ": " << d.message << '\n';
    if (!as_json && diags.empty()) out << "ok\n";
    return diags.empty() ? kOk : kDomainError;
}

int cmd_run(const fs::path& scenario, std::int64_t ticks, const std::optional<std::int64_t>& seed_flag,
            const fs::path& out_dir, bool as_json, std::ostream& out) {
    const ScenarioFile sc = open_scenario(scenario);
    const std::uint64_t seed = resolve_seed(sc.cfg, opt_seed(seed_flag));
    make_dir(out_dir);
    const RunSummary s = run_scenario(sc.cfg, ticks, out_dir, seed);
    write_atomic(out_dir / "manifest.json", manifest("run", sc, seed, ticks, kRunArtifacts).dump(2) + "\n");
    if (as_json) {
        out << summary_json(s).dump(2) << '\n';
    } else {
        out << fmt::format("{} ticks, {} agents, {} trades, seed {}\n", s.ticks, s.agents, s.trades, seed);
    }
    return kOk;
}

int cmd_replicate(const fs::path& scenario, std::int64_t ticks, const std::optional<std::int64_t>& seed_flag,
                  const fs::path& out_dir, double interval, int lags, bool as_json, std::ostream& out,
                  std::ostream& err) {
    const ScenarioFile sc = open_scenario(scenario);
    const std::uint64_t seed = resolve_seed(sc.cfg, opt_seed(seed_flag));

    const fs::path man = out_dir / "manifest.json";
    if (fs::exists(man)) {
        const auto prev = ojson::parse(slurp(man), nullptr, false);
        if (prev.is_discarded() || !prev.contains("scenario_hash") || prev["scenario_hash"] != sc.hash) {
            err << "error: '" << out_dir.string() << "' holds output of a different scenario; refusing to mix\n";
            return kDomainError;
        }
    }

    make_dir(out_dir);
    const RunSummary s = run_scenario(sc.cfg, ticks, out_dir, seed);
    std::vector<std::string> artifacts = kRunArtifacts;

    const fs::path report = out_dir / "report";
    make_dir(report);
    const auto log = read_transactions(out_dir / "transactions.csv");
    std::string table = std::string(kFactsHeader) + "\n";
    ojson rows = ojson::array();
    ojson skipped = ojson::array();
    for (const auto& c : log.empty() ? std::vector<std::string>{} : analytics::traded_commodities(log)) {
        try {
            const auto f = analytics::stylized_facts(log, c, interval, lags);
            table += facts_row(f);
            rows.push_back(facts_json(f));
        } catch (const InsufficientData& e) {
            skipped.push_back({{"commodity", c}, {"reason", e.what()}});
        } catch (const ZeroVariance& e) {
            skipped.push_back({{"commodity", c}, {"reason", e.what()}});
        }
    }
    write_file(report / "stylized_facts.csv", table);
    artifacts.push_back("report/stylized_facts.csv");

    ojson bundle;
    bundle["schema"] = kReportSchema;
    bundle["scenario"] = sc.cfg.name;
    bundle["seed"] = seed;
    bundle["run"] = summary_json(s);
    bundle["interval_s"] = interval;
    bundle["lags"] = lags;
    bundle["stylized_facts"] = rows;
    bundle["skipped"] = skipped;

    const auto agents = final_snapshot(read_snapshots(out_dir / "snapshots.csv"));
    if (!agents.empty()) {
        bundle["stratification"] = stratify(agents, 50.0, report);
        artifacts.insert(artifacts.end(), {"report/education_bins.csv", "report/occupation_wealth.csv",
                                           "report/stratification.json"});
    } else {
        bundle["stratification"] = nullptr;
    }
    write_file(report / "report.json", bundle.dump(2) + "\n");
    artifacts.push_back("report/report.json");
    write_atomic(man, manifest("replicate", sc, seed, ticks, artifacts).dump(2) + "\n");

    if (as_json) {
        out << bundle.dump(2) << '\n';
    } else {
        out << fmt::format("{} ticks, {} trades, {} commodities analysed, report in {}\n", s.ticks, s.trades,
                           rows.size(), report.string());
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agent-based economy simulator with market analytics", "econsim"};
    app.set_version_flag("--version", ECONSIM_VERSION);
    app.require_subcommand(1);

    bool as_json = false;
    fs::path scenario;
    fs::path out_dir;
    std::int64_t ticks = 0;
    std::optional<std::int64_t> seed;
    AnalyzeOptions ao;
    fs::path snapshots;
    double bin_width = 50.0;

    auto* v = app.add_subcommand("validate", "Check a scenario file; exit 1 lists broken rules");
    v->add_option("--scenario", scenario, "Scenario file")->required();
    v->add_flag("--json", as_json, "Print diagnostics as JSON");

    auto* r = app.add_subcommand("run", "Simulate a scenario and write CSV logs");
    r->add_option("--scenario", scenario, "Scenario file")->required();
    r->add_option("--ticks", ticks, "Number of ticks")->required()->check(CLI::NonNegativeNumber);
    r->add_option("--seed", seed, "RNG seed (overrides ECONSIM_SEED and the scenario)");
    r->add_option("--out", out_dir, "Output directory")->required();
    r->add_flag("--json", as_json, "Print the run summary as JSON");

    auto* a = app.add_subcommand("analyze", "Stylized facts of one commodity from a transaction log");
    a->add_option("--log", ao.log, "transactions.csv")->required();
    a->add_option("--commodity", ao.commodity, "Commodity id")->required();
    a->add_option("--interval", ao.interval, "Bar length in in-game seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    a->add_option("--lags", ao.lags, "Ljung-Box lags")->capture_default_str()->check(CLI::PositiveNumber);
    a->add_option("--out", ao.out, "Report directory")->required();
    a->add_flag("--json", as_json, "Print the report as JSON");

    auto* s = app.add_subcommand("stratify", "Education and occupation wealth report from snapshots");
    s->add_option("--snapshots", snapshots, "snapshots.csv (latest tick is used)")->required();
    s->add_option("--bin-width", bin_width, "Education bin width")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--out", out_dir, "Report directory")->required();
    s->add_flag("--json", as_json, "Print the report as JSON");

    double rep_interval = analytics::kDefaultInterval;
    int rep_lags = analytics::kDefaultLags;
    std::int64_t rep_ticks = 20000;
    auto* p = app.add_subcommand("replicate", "Run, then analyze every traded commodity and stratify");
    p->add_option("--scenario", scenario, "Scenario file")->required();
    p->add_option("--ticks", rep_ticks, "Number of ticks")->capture_default_str()->check(CLI::NonNegativeNumber);
    p->add_option("--seed", seed, "RNG seed (overrides ECONSIM_SEED and the scenario)");
    p->add_option("--out", out_dir, "Output directory")->required();
    p->add_option("--interval", rep_interval, "Bar length in in-game seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    p->add_option("--lags", rep_lags, "Ljung-Box lags")->capture_default_str()->check(CLI::PositiveNumber);
    p->add_flag("--json", as_json, "Print the report bundle as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kIoError;
    }

    if (*v) return guarded(err, [&] { return cmd_validate(scenario, as_json, out, err); });
    if (*r) return guarded(err, [&] { return cmd_run(scenario, ticks, seed, out_dir, as_json, out); });
    if (*a) {
        return guarded(err, [&] {
            const auto j = analyze(read_transactions(ao.log), ao);
            if (as_json) {
                out << j.dump(2) << '\n';
            } else {
                out << fmt::format("{}: report in {}\n", ao.commodity, ao.out.string());
            }
            return kOk;
        });
    }
    if (*s) {
        return guarded(err, [&] {
            const auto j = stratify(final_snapshot(read_snapshots(snapshots)), bin_width, out_dir);
            if (as_json) {
                out << j.dump(2) << '\n';
            } else {
                out << fmt::format("report in {}\n", out_dir.string());
            }
            return kOk;
        });
    }
    return guarded(err, [&] {
        return cmd_replicate(scenario, rep_ticks, seed, out_dir, rep_interval, rep_lags, as_json, out, err);
    });
}

}  // namespace econsim::cli
