#include "econsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim::analytics {

std::vector<OhlcBar> build_ohlc(std::span<const TradeRecord> log, double interval, std::string_view commodity) {
    if (!(interval > 0.0)) throw std::invalid_argument("bar interval must be positive");
    if (log.empty()) throw EmptyLog("transaction log has no trades");
    std::vector<OhlcBar> bars;
    double prev_time = -std::numeric_limits<double>::infinity();
    std::int64_t current = std::numeric_limits<std::int64_t>::min();
    for (const auto& t : log) {
        if (t.time < prev_time) {
            throw UnsortedLog(fmt::format("trade at {}s follows one at {}s", t.time, prev_time));
        }
        prev_time = t.time;
        if (t.commodity != commodity) continue;
        const auto idx = static_cast<std::int64_t>(std::floor(t.time / interval));
        const double p = t.effective_price;
        if (idx != current) {
            current = idx;
            bars.push_back({std::string(commodity), static_cast<double>(idx) * interval, p, p, p, p, 0, 0});
        }
        OhlcBar& b = bars.back();
        b.high = std::max(b.high, p);
        b.low = std::min(b.low, p);
        b.close = p;
        b.volume += t.quantity;
        ++b.trade_count;
    }
    return bars;
}

std::vector<double> log_returns(std::span<const double> prices) {
    if (prices.size() < 2) throw InsufficientData("need at least two prices for a return");
    std::vector<double> r;
    r.reserve(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) throw NonPositivePrice(fmt::format("price {} at index {}", prices[i], i));
        if (i > 0) r.push_back(std::log(prices[i]) - std::log(prices[i - 1]));
    }
    return r;
}

std::vector<double> log_returns(std::span<const OhlcBar> bars) {
    std::vector<double> closes;
    closes.reserve(bars.size());
    for (const auto& b : bars) closes.push_back(b.close);
    return log_returns(closes);
}

namespace {

// Rounding in the mean can leave a tiny positive variance on constant input.
bool constant(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

Moments moments(std::span<const double> x) {
    if (x.size() < 4) throw InsufficientData("need at least four observations for moments");
    Moments m;
    m.n = x.size();
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (const double v : x) sum += v;
    m.mean = sum / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (const double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0) || constant(x)) throw ZeroVariance("series has zero variance");
    m.stddev = std::sqrt(m2);
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

std::vector<double> acf(std::span<const double> x, int max_lag) {
    if (max_lag < 1) throw InsufficientData("max lag must be at least 1");
    if (x.size() <= static_cast<std::size_t>(max_lag)) {
        throw InsufficientData(fmt::format("series of length {} is too short for lag {}", x.size(), max_lag));
    }
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    std::vector<double> d(x.size());
    double denom = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        d[t] = x[t] - mean;
        denom += d[t] * d[t];
    }
    if (!(denom > 0.0) || constant(x)) throw ZeroVariance("series has zero variance");
    std::vector<double> rho;
    rho.reserve(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(k) < d.size(); ++t) num += d[t] * d[t + static_cast<std::size_t>(k)];
        rho.push_back(num / denom);
    }
    return rho;
}

std::vector<double> acf_abs(std::span<const double> returns, int max_lag) {
    std::vector<double> a(returns.size());
    std::transform(returns.begin(), returns.end(), a.begin(), [](double v) { return std::fabs(v); });
    return acf(a, max_lag);
}

LjungBox ljung_box_raw(std::span<const double> x, int lags) {
    if (lags < 1 || x.size() <= static_cast<std::size_t>(lags)) {
        throw InsufficientData(fmt::format("Ljung-Box needs more than {} observations, got {}", lags, x.size()));
    }
    const std::vector<double> rho = acf(x, lags);
    const double n = static_cast<double>(x.size());
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        const double r = rho[static_cast<std::size_t>(k - 1)];
        q += r * r / (n - k);
    }
    q *= n * (n + 2.0);
    return {q, lags, boost::math::gamma_q(lags / 2.0, q / 2.0)};
}

LjungBox ljung_box(std::span<const double> returns, int lags) {
    std::vector<double> a(returns.size());
    std::transform(returns.begin(), returns.end(), a.begin(), [](double v) { return std::fabs(v); });
    return ljung_box_raw(a, lags);
}

double max_drawdown(std::span<const double> prices) {
    if (prices.empty()) throw EmptyInput("no prices");
    double peak = prices[0];
    double mdd = 0.0;
    for (const double p : prices) {
        if (!(p > 0.0)) throw NonPositivePrice(fmt::format("price {}", p));
        peak = std::max(peak, p);
        mdd = std::max(mdd, 1.0 - p / peak);
    }
    return mdd;
}

double log_price_range(std::span<const double> prices) {
    if (prices.empty()) throw EmptyInput("no prices");
    const auto [lo, hi] = std::minmax_element(prices.begin(), prices.end());
    if (!(*lo > 0.0)) throw NonPositivePrice(fmt::format("price {}", *lo));
    return std::log(*hi) - std::log(*lo);
}

Stability stability_diagnostics(std::span<const OhlcBar> bars) {
    if (bars.empty()) throw EmptyInput("no bars");
    std::vector<double> closes;
    closes.reserve(bars.size());
    for (const auto& b : bars) closes.push_back(b.close);
    return {log_price_range(closes), max_drawdown(closes)};
}

StylizedFacts stylized_facts(std::span<const TradeRecord> log, std::string_view commodity, double interval, int lags) {
    StylizedFacts f;
    f.commodity = std::string(commodity);
    f.trades = static_cast<std::size_t>(
        std::count_if(log.begin(), log.end(), [&](const TradeRecord& t) { return t.commodity == commodity; }));
    const auto bars = build_ohlc(log, interval, commodity);
    f.bars = bars.size();
    f.stability = stability_diagnostics(bars);
    const auto r = log_returns(bars);
    f.moments = moments(r);
    f.acf_abs = acf_abs(r, lags);
    f.ljung_box = ljung_box(r, lags);
    return f;
}

std::string most_traded(std::span<const TradeRecord> log) {
    if (log.empty()) throw EmptyLog("transaction log has no trades");
    std::map<std::string, std::size_t> counts;
    for (const auto& t : log) ++counts[t.commodity];
    return std::max_element(counts.begin(), counts.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
}

std::vector<std::string> traded_commodities(std::span<const TradeRecord> log) {
    std::vector<std::string> out;
    for (const auto& t : log) {
        if (std::find(out.begin(), out.end(), t.commodity) == out.end()) out.push_back(t.commodity);
    }
    return out;
}

ChainComparison chain_comparison(std::span<const TradeRecord> log, const std::vector<std::string>& chain,
                                 double normalize_at, double interval) {
    ChainComparison out;
    out.chain = chain;
    std::vector<std::vector<OhlcBar>> bars;
    for (const auto& c : chain) {
        bars.push_back(build_ohlc(log, interval, c));
        if (bars.back().empty()) throw MissingCommodity(fmt::format("no trades of '{}'", c));
        for (const auto& b : bars.back()) out.grid.push_back(b.interval_start);
    }
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

    for (std::size_t c = 0; c < chain.size(); ++c) {
        const auto& bs = bars[c];
        double base = std::numeric_limits<double>::quiet_NaN();
        for (const auto& b : bs) {
            if (b.interval_start <= normalize_at) base = b.close;
        }
        if (std::isnan(base)) {
            throw MissingCommodity(fmt::format("'{}' has no trade at or before {}s", chain[c], normalize_at));
        }
        std::vector<double> series;
        series.reserve(out.grid.size());
        std::size_t k = 0;
        double last = std::numeric_limits<double>::quiet_NaN();
        for (const double g : out.grid) {
            while (k < bs.size() && bs[k].interval_start <= g) last = bs[k++].close;
            series.push_back(last / base);
        }
        out.multipliers.push_back(std::move(series));
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw EmptyInput("median of nothing");
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    const double hi = v[m];
    if (v.size() % 2) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
}

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
    if (degree < 0 || x.size() < static_cast<std::size_t>(degree) + 1) {
        throw InsufficientData(fmt::format("degree {} fit needs {} points", degree, degree + 1));
    }
    // Scale x into [-1, 1] for conditioning, then expand back.
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double center = 0.5 * (*lo_it + *hi_it);
    const double half = std::max(0.5 * (*hi_it - *lo_it), 1e-300);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, degree + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (x[static_cast<std::size_t>(i)] - center) / half;
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            a(i, d) = p;
            p *= u;
        }
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);

    // Coefficients in u = (x - center) / half  ->  coefficients in x.
    std::vector<double> out(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int d = 0; d <= degree; ++d) {
        // (x - center)^d / half^d expanded by the binomial theorem.
        double coef = 1.0;
        for (int k = 0; k <= d; ++k) {
            if (k > 0) coef = coef * (d - k + 1) / k;
            const double term = coef * std::pow(-center, d - k) / std::pow(half, d);
            out[static_cast<std::size_t>(k)] += c(d) * term;
        }
    }
    return out;
}

StratificationReport stratification_report(std::span<const SnapshotRecord> agents, double bin_width, double lo,
                                           double hi) {
    if (!(bin_width > 0.0) || !(hi > lo)) throw std::invalid_argument("bad binning");
    const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
    std::vector<std::vector<const SnapshotRecord*>> members(nbins);
    std::size_t in_range = 0;
    for (const auto& a : agents) {
        if (a.education < lo || a.education > hi) continue;
        auto b = static_cast<std::size_t>(std::floor((a.education - lo) / bin_width));
        b = std::min(b, nbins - 1);
        members[b].push_back(&a);
        ++in_range;
    }
    if (in_range == 0) throw EmptyPopulation("no agents with education in range");

    StratificationReport rep;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t b = 0; b < nbins; ++b) {
        if (members[b].empty()) continue;
        std::vector<double> h;
        std::vector<double> w;
        for (const auto* a : members[b]) {
            h.push_back(a->education);
            w.push_back(a->net_worth);
        }
        EducationBin bin;
        bin.lo = lo + static_cast<double>(b) * bin_width;
        bin.hi = std::min(hi, bin.lo + bin_width);
        bin.count = members[b].size();
        bin.median_education = median(h);
        bin.median_net_worth = median(w);
        xs.push_back(bin.median_education);
        ys.push_back(bin.median_net_worth);
        rep.bins.push_back(bin);
    }
    if (xs.size() >= 3) {
        const auto c = polyfit(xs, ys, 2);
        rep.fit = {c[0], c[1], c[2]};
        rep.fitted = true;
    }

    std::map<std::string, std::vector<double>> by_job;
    for (const auto& a : agents) {
        if (!a.job.empty()) by_job[a.job].push_back(a.net_worth);
    }
    for (auto& [job, worth] : by_job) rep.ranking.push_back({job, worth.size(), median(worth)});
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [](const auto& a, const auto& b) { return a.median_net_worth > b.median_net_worth; });
    return rep;
}

}  // namespace econsim::analytics
