#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "econsim/analytics.hpp"
#include "econsim/errors.hpp"
#include "fixtures/garch.hpp"

using namespace econsim;
using namespace econsim::analytics;

namespace {

TradeRecord trade(double time, std::string commodity, double price) {
    TradeRecord t;
    t.time = time;
    t.tick = static_cast<std::int64_t>(time / 300.0);
    t.commodity = std::move(commodity);
    t.quantity = 1;
    t.effective_price = price;
    t.marginal_price_pre = price;
    t.marginal_price_post = price;
    return t;
}

std::vector<OhlcBar> bars_from_closes(const std::vector<double>& closes) {
    std::vector<OhlcBar> bars;
    for (std::size_t i = 0; i < closes.size(); ++i) {
        OhlcBar b;
        b.interval_start = 300.0 * static_cast<double>(i);
        b.open = b.high = b.low = b.close = closes[i];
        bars.push_back(b);
    }
    return bars;
}

SnapshotRecord agent(AgentId id, double education, double worth, std::string job = {}) {
    SnapshotRecord s;
    s.agent = id;
    s.education = education;
    s.net_worth = worth;
    s.job = std::move(job);
    return s;
}

// Direct moment sums, two passes, as an independent check.
double kurtosis_oracle(const std::vector<double>& x) {
    long double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<long double>(x.size());
    long double m2 = 0, m4 = 0;
    for (double v : x) {
        const long double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<long double>(x.size());
    m4 /= static_cast<long double>(x.size());
    return static_cast<double>(m4 / (m2 * m2) - 3);
}

}  // namespace

TEST_CASE("OHLC bars") {
    std::vector<TradeRecord> log{trade(0, "Fish", 10), trade(10, "Fish", 12), trade(20, "Wood", 1),
                                 trade(30, "Fish", 9), trade(299, "Fish", 11), trade(900, "Fish", 7)};
    const auto bars = build_ohlc(log, 300.0, "Fish");
    REQUIRE(bars.size() == 2);  // the 300-600 and 600-900 intervals had no trades
    CHECK(bars[0].open == 10);
    CHECK(bars[0].high == 12);
    CHECK(bars[0].low == 9);
    CHECK(bars[0].close == 11);
    CHECK(bars[0].trade_count == 4);
    CHECK(bars[1].interval_start == 900.0);
    CHECK(bars[1].open == 7);
    CHECK(bars[1].high == 7);
    CHECK(bars[1].low == 7);
    CHECK(bars[1].close == 7);

    CHECK_THROWS_AS(build_ohlc(std::vector<TradeRecord>{}, 300.0, "Fish"), EmptyLog);
    std::vector<TradeRecord> backwards{trade(10, "Fish", 1), trade(5, "Fish", 1)};
    CHECK_THROWS_AS(build_ohlc(backwards, 300.0, "Fish"), UnsortedLog);
}

TEST_CASE("log returns") {
    const double e = std::exp(1.0);
    CHECK(log_returns(std::vector<double>{100, 100}) == std::vector<double>{0.0});
    CHECK(log_returns(std::vector<double>{100, 100 * e})[0] == doctest::Approx(1.0).epsilon(1e-14));
    const auto r = log_returns(std::vector<double>{e, e * e, e});
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(log_returns(std::vector<double>{5}), InsufficientData);
    CHECK_THROWS_AS(log_returns(std::vector<double>{5, 0}), NonPositivePrice);
    CHECK(log_returns(bars_from_closes({10, 20}))[0] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("moments: closed forms") {
    SUBCASE("Gaussian") {
        const auto x = econsim::test::gaussian(1'000'000, 1);
        const auto m = moments(x);
        CHECK(std::abs(m.excess_kurtosis) <= 0.05);
        CHECK(std::abs(m.skewness) <= 0.05);
        CHECK(m.excess_kurtosis == doctest::Approx(kurtosis_oracle(x)).epsilon(1e-9));
    }
    SUBCASE("Student t(5): estimator agrees with the direct sums") {
        const auto x = econsim::test::student_t(1'000'000, 5.0, 2);
        const auto m = moments(x);
        CHECK(m.excess_kurtosis == doctest::Approx(kurtosis_oracle(x)).epsilon(1e-9));
        CHECK(m.excess_kurtosis > 3.0);
    }
    SUBCASE("Laplace tails converge to 3") {
        std::mt19937_64 gen(6);
        std::exponential_distribution<double> ex(1.0);
        std::vector<double> x(1'000'000);
        for (auto& v : x) v = ex(gen) - ex(gen);
        CHECK(std::abs(moments(x).excess_kurtosis - 3.0) <= 0.1);
    }
    SUBCASE("two-point series") {
        std::vector<double> x;
        for (int i = 0; i < 100; ++i) x.push_back(i % 2 ? 1.0 : -1.0);
        const auto m = moments(x);
        CHECK(m.skewness == 0.0);
        CHECK(m.excess_kurtosis == doctest::Approx(-2.0));
    }
    CHECK_THROWS_AS(moments(std::vector<double>{1, 2, 3}), InsufficientData);
    CHECK_THROWS_AS(moments(std::vector<double>(10, 4.0)), ZeroVariance);
}

TEST_CASE("autocorrelation of absolute returns") {
    const auto iid = econsim::test::gaussian(100'000, 3);
    CHECK(std::abs(acf_abs(iid, 20)[0]) < 0.02);

    const auto g = econsim::test::garch11(100'000, 0.1, 0.85, 4);
    CHECK(acf_abs(g, 20)[0] > 0.1);
    const auto lb = ljung_box(g, 20);
    CHECK(lb.p_value < 1e-6);
    CHECK(lb.dof == 20);

    std::vector<double> alternating;
    for (int i = 0; i < 100; ++i) alternating.push_back(i % 2 ? 0.01 : -0.01);
    CHECK_THROWS_AS(acf_abs(alternating, 5), ZeroVariance);
    CHECK_THROWS_AS(ljung_box(std::vector<double>(20, 1.0), 20), InsufficientData);
}

TEST_CASE("acf matches a direct sum") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> z;
    std::vector<double> x(500);
    for (auto& v : x) v = z(gen);
    double mean = 0;
    for (double v : x) mean += v;
    mean /= 500.0;
    double c0 = 0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    const auto rho = acf(x, 5);
    for (int k = 1; k <= 5; ++k) {
        double ck = 0;
        for (std::size_t t = static_cast<std::size_t>(k); t < x.size(); ++t) ck += (x[t] - mean) * (x[t - k] - mean);
        CHECK(rho[static_cast<std::size_t>(k - 1)] == doctest::Approx(ck / c0).epsilon(1e-12));
    }
}

TEST_CASE("shuffling destroys volatility clustering") {
    int not_rejected = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        auto g = econsim::test::garch11(20'000, 0.1, 0.85, 1000 + static_cast<std::uint64_t>(s));
        std::mt19937_64 gen(static_cast<std::uint64_t>(s));
        std::shuffle(g.begin(), g.end(), gen);
        if (ljung_box(g, 20).p_value > 0.01) ++not_rejected;
    }
    CHECK(not_rejected >= 95);
}

TEST_CASE("Ljung-Box size on white noise is near nominal") {
    int rejections = 0;
    const int reps = 200;
    for (int s = 0; s < reps; ++s) {
        if (ljung_box(econsim::test::gaussian(10'000, 500 + static_cast<std::uint64_t>(s)), 20).p_value < 0.01) {
            ++rejections;
        }
    }
    // Binomial(200, 0.01): more than 8 rejections has probability below 1e-3.
    CHECK(rejections <= 8);
}

TEST_CASE("stability diagnostics") {
    CHECK(max_drawdown(std::vector<double>{100, 120, 90, 110}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(max_drawdown(std::vector<double>{1, 2, 3, 4, 5}) == 0.0);
    CHECK(log_price_range(std::vector<double>{304.398, 304.6, 304.808}) ==
          doctest::Approx(std::log(304.808 / 304.398)).epsilon(1e-12));
    CHECK(log_price_range(std::vector<double>{304.398, 304.808}) == doctest::Approx(0.00135).epsilon(0.01));
    CHECK_THROWS_AS(max_drawdown(std::vector<double>{}), EmptyInput);
    CHECK_THROWS_AS(log_price_range(std::vector<double>{1, -1}), NonPositivePrice);

    const auto s = stability_diagnostics(bars_from_closes({100, 120, 90, 110}));
    CHECK(s.max_drawdown == doctest::Approx(0.25));
    CHECK(s.log_price_range == doctest::Approx(std::log(120.0 / 90.0)));
}

TEST_CASE("chain comparison") {
    std::vector<TradeRecord> log;
    for (int t = 0; t < 20; ++t) {
        log.push_back(trade(300.0 * t + 1, "Silicon Ore", 100));
        if (t >= 2) log.push_back(trade(300.0 * t + 2, "Pure Silicon", 620));
        if (t % 3 == 0) log.push_back(trade(300.0 * t + 3, "Transistor", 1220));
    }
    const std::vector<std::string> chain{"Silicon Ore", "Pure Silicon", "Transistor"};
    const auto c = chain_comparison(log, chain, 900.0);
    REQUIRE(c.multipliers.size() == 3);
    for (const auto& series : c.multipliers) {
        REQUIRE(series.size() == c.grid.size());
        for (double m : series) {
            if (!std::isnan(m)) CHECK(m == 1.0);
        }
    }
    CHECK_THROWS_AS(chain_comparison(log, chain, 0.0), MissingCommodity);
    CHECK_THROWS_AS(chain_comparison(log, {"Chip"}, 5000.0), MissingCommodity);
}

TEST_CASE("stratification: quadratic wealth is recovered") {
    std::vector<SnapshotRecord> agents;
    AgentId id = 0;
    // Three agents per bin (odd count), so the bin median of H^2 is the square
    // of the bin median of H.
    for (int b = 0; b < 30; ++b) {
        for (double off : {5.0, 20.0, 41.0}) {
            const double h = 50.0 * b + off;
            agents.push_back(agent(id++, h, h * h));
        }
    }
    const auto rep = stratification_report(agents);
    CHECK(rep.bins.size() == 30);
    REQUIRE(rep.fitted);
    CHECK(rep.fit[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(rep.fit[1]) < 1e-6);
    CHECK(std::abs(rep.fit[0]) < 1e-3);
}

TEST_CASE("stratification: flat wealth gives a constant fit") {
    std::vector<SnapshotRecord> agents;
    for (int i = 0; i < 200; ++i) agents.push_back(agent(static_cast<AgentId>(i), 7.3 * i, 1234.0));
    const auto rep = stratification_report(agents);
    REQUIRE(rep.fitted);
    CHECK(rep.fit[0] == doctest::Approx(1234.0).epsilon(1e-9));
    CHECK(std::abs(rep.fit[1]) < 1e-9);
    CHECK(std::abs(rep.fit[2]) < 1e-12);
    CHECK(rep.bins.size() <= 30);
    for (const auto& b : rep.bins) CHECK(b.median_net_worth == 1234.0);
}

TEST_CASE("stratification: occupation ranking and range") {
    std::vector<SnapshotRecord> agents{agent(0, 100, 10, "Cleaner"), agent(1, 120, 30, "Cleaner"),
                                       agent(2, 400, 900, "CEO"),   agent(3, 50, 5),
                                       agent(4, 2000, 1e6, "CEO")};
    const auto rep = stratification_report(agents);
    REQUIRE(rep.ranking.size() == 2);
    CHECK(rep.ranking[0].occupation == "CEO");
    CHECK(rep.ranking[0].count == 2);
    CHECK(rep.ranking[1].median_net_worth == 20.0);
    std::size_t binned = 0;
    for (const auto& b : rep.bins) binned += b.count;
    CHECK(binned == 4);  // H = 2000 is outside the binning range
    CHECK(rep.bins.size() == 3);
    CHECK_THROWS_AS(stratification_report(std::vector<SnapshotRecord>{agent(0, 5000, 1)}), EmptyPopulation);
}

TEST_CASE("polyfit and median") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 - 3.0 * v + 0.5 * v * v);
    const auto c = polyfit(x, y, 2);
    CHECK(c[0] == doctest::Approx(2.0));
    CHECK(c[1] == doctest::Approx(-3.0));
    CHECK(c[2] == doctest::Approx(0.5));
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("most traded and report determinism") {
    std::vector<TradeRecord> log;
    std::mt19937_64 gen(12);
    std::normal_distribution<double> z(0, 0.01);
    double p = 300;
    for (int i = 0; i < 5000; ++i) {
        p *= std::exp(z(gen));
        log.push_back(trade(60.0 * i, "Fish", p));
        if (i % 3 == 0) log.push_back(trade(60.0 * i + 1, "Wood", 40));
    }
    CHECK(most_traded(log) == "Fish");
    CHECK(traded_commodities(log) == std::vector<std::string>{"Fish", "Wood"});
    const auto a = stylized_facts(log, "Fish");
    const auto b = stylized_facts(log, "Fish");
    CHECK(a.bars == 1000);
    CHECK(a.trades == 5000);
    CHECK(a.moments.excess_kurtosis == b.moments.excess_kurtosis);
    CHECK(a.ljung_box.statistic == b.ljung_box.statistic);
    CHECK(a.acf_abs == b.acf_abs);
    CHECK_THROWS_AS(most_traded(std::vector<TradeRecord>{}), EmptyLog);
}
