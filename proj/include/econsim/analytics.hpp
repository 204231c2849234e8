#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econsim/io.hpp"

namespace econsim::analytics {

inline constexpr double kDefaultInterval = 300.0;  // in-game seconds per bar
inline constexpr int kDefaultLags = 20;

struct OhlcBar {
    std::string commodity;
    double interval_start = 0.0;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    Units volume = 0;
    int trade_count = 0;
};

/// Bars of effective trade prices; intervals without trades are omitted.
/// Throws EmptyLog for an empty log and UnsortedLog if time goes backwards.
std::vector<OhlcBar> build_ohlc(std::span<const TradeRecord> log, double interval, std::string_view commodity);

/// ln C_t - ln C_{t-1} over consecutive bars (or prices).
/// Throws InsufficientData (< 2 points) and NonPositivePrice.
std::vector<double> log_returns(std::span<const OhlcBar> bars);
std::vector<double> log_returns(std::span<const double> prices);

/// Biased (population) central moments: skew = m3 / m2^1.5, kurt = m4 / m2^2 - 3.
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};
/// Throws InsufficientData (n < 4) and ZeroVariance.
Moments moments(std::span<const double> x);

/// rho(k), k = 1..K, of the series itself, normalized by the lag-0 sum of
/// squared deviations. Throws InsufficientData (n <= K or K < 1), ZeroVariance.
std::vector<double> acf(std::span<const double> x, int max_lag);
/// acf of |r_t|.
std::vector<double> acf_abs(std::span<const double> returns, int max_lag);

struct LjungBox {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};
/// Q = n(n+2) sum_k rho_k^2 / (n-k) over rho of |r_t|; p from the chi-squared
/// survival function with `lags` degrees of freedom.
LjungBox ljung_box(std::span<const double> returns, int lags = kDefaultLags);
/// Same statistic on the series as given (no absolute value).
LjungBox ljung_box_raw(std::span<const double> x, int lags = kDefaultLags);

/// Largest peak-to-trough decline 1 - p / running_max. Throws EmptyInput.
double max_drawdown(std::span<const double> prices);
/// max ln p - min ln p. Throws EmptyInput, NonPositivePrice.
double log_price_range(std::span<const double> prices);

struct Stability {
    double log_price_range = 0.0;
    double max_drawdown = 0.0;
};
Stability stability_diagnostics(std::span<const OhlcBar> bars);

struct StylizedFacts {
    std::string commodity;
    std::size_t trades = 0;
    std::size_t bars = 0;
    Moments moments;
    std::vector<double> acf_abs;
    LjungBox ljung_box;
    Stability stability;
};
StylizedFacts stylized_facts(std::span<const TradeRecord> log, std::string_view commodity,
                             double interval = kDefaultInterval, int lags = kDefaultLags);

/// Commodity with the most trades (ties broken by name). Throws EmptyLog.
std::string most_traded(std::span<const TradeRecord> log);
/// Commodities in order of first appearance.
std::vector<std::string> traded_commodities(std::span<const TradeRecord> log);

struct ChainComparison {
    std::vector<std::string> chain;
    std::vector<double> grid;                    // bar starts, union over the chain
    std::vector<std::vector<double>> multipliers;  // per commodity; NaN before its first bar
};
/// Closes forward-filled on the common grid and divided by each commodity's
/// close at or before `normalize_at`. Throws MissingCommodity when a chain
/// member has no bar at or before that time.
ChainComparison chain_comparison(std::span<const TradeRecord> log, const std::vector<std::string>& chain,
                                 double normalize_at, double interval = kDefaultInterval);

struct EducationBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double median_education = 0.0;
    double median_net_worth = 0.0;
};

struct OccupationWealth {
    std::string occupation;
    std::size_t count = 0;
    double median_net_worth = 0.0;
};

struct StratificationReport {
    std::vector<EducationBin> bins;
    std::array<double, 3> fit{};  // c0 + c1 H + c2 H^2 over bin medians
    bool fitted = false;          // needs at least three bins
    std::vector<OccupationWealth> ranking;  // descending; unemployed excluded
};

/// Agents outside [lo, hi] are left out of the bins (not the occupation
/// ranking); empty bins are not emitted.
/// Throws EmptyPopulation when no agent falls in range.
StratificationReport stratification_report(std::span<const SnapshotRecord> agents, double bin_width = 50.0,
                                           double lo = 0.0, double hi = 1500.0);

/// Least-squares polynomial fit, coefficients lowest degree first.
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree);

double median(std::vector<double> v);

}  // namespace econsim::analytics
