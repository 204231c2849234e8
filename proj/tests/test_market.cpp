#include <doctest.h>

#include <cmath>
#include <random>

#include "econsim/errors.hpp"
#include "econsim/market.hpp"
#include "support.hpp"

using namespace econsim;
using econsim::test::cid;
using econsim::test::default_world;

namespace {

const CommodityId kItem{0};

AgentState trader(Currency balance, Units held = 0) {
    AgentState a;
    a.id = 7;
    a.balance = balance;
    a.inventory.assign(1, held);
    a.consumed.assign(1, false);
    return a;
}

// Test-side oracle: reserves from k by exact rational rounding, independent of
// the pool class.
std::int64_t oracle_reserve(__int128 k, Units is) { return static_cast<std::int64_t>((k + is / 2) / is); }

}  // namespace

TEST_CASE("quote is CR / IS") {
    CHECK(LiquidityPool(kItem, 1000, Currency::whole(1000)).quote() == 1.0);
    CHECK(LiquidityPool(kItem, 100, Currency::whole(30440)).quote() == doctest::Approx(304.4).epsilon(1e-12));
}

TEST_CASE("buy 100 of 1000 against 1000 currency") {
    LiquidityPool pool(kItem, 1000, Currency::whole(1000));
    auto a = trader(Currency::whole(500));
    MoneyLedger ledger;
    const auto r = execute_buy(pool, 100, a, ledger, Duration::whole(12));
    CHECK(pool.inventory_supply() == 900);
    CHECK(pool.currency_reserve().to_double() == doctest::Approx(1111.111111111).epsilon(1e-12));
    CHECK(r.currency_delta.to_double() == doctest::Approx(111.111111111).epsilon(1e-12));
    CHECK(r.effective_price == doctest::Approx(1.11111111111).epsilon(1e-10));
    CHECK(r.marginal_price_pre == 1.0);
    CHECK(r.marginal_price_post == doctest::Approx(1.2345679).epsilon(1e-7));
    CHECK(r.marginal_price_pre < r.effective_price);
    CHECK(r.effective_price < r.marginal_price_post);
    CHECK(a.balance == Currency::whole(500) - r.currency_delta);
    CHECK(a.inventory[0] == 100);
    CHECK(ledger.burned_by_purchases == r.currency_delta);
    CHECK(r.timestamp == Duration::whole(12));
    CHECK(r.agent_id == 7);

    // Exact inverse.
    const auto s = execute_sell(pool, 100, a, ledger, Duration::whole(13));
    CHECK(s.currency_delta == r.currency_delta);
    CHECK(pool.inventory_supply() == 1000);
    CHECK(pool.currency_reserve() == Currency::whole(1000));
    CHECK(a.balance == Currency::whole(500));
    CHECK(s.marginal_price_post < s.effective_price);
    CHECK(s.effective_price < s.marginal_price_pre);
}

TEST_CASE("trade preconditions") {
    LiquidityPool pool(kItem, 50, Currency::whole(50));
    MoneyLedger ledger;
    auto rich = trader(Currency::whole(1'000'000));
    CHECK_THROWS_AS(execute_buy(pool, 50, rich, ledger, {}), InsufficientLiquidity);
    CHECK_THROWS_AS(execute_buy(pool, 0, rich, ledger, {}), NonPositiveQuantity);
    CHECK_THROWS_AS(execute_sell(pool, 1, rich, ledger, {}), InsufficientInventory);
    CHECK_THROWS_AS(execute_sell(pool, -1, rich, ledger, {}), NonPositiveQuantity);
    auto poor = trader(Currency::whole(1));
    CHECK_THROWS_AS(execute_buy(pool, 10, poor, ledger, {}), InsufficientFunds);
    // Failed trades change nothing.
    CHECK(pool.inventory_supply() == 50);
    CHECK(pool.currency_reserve() == Currency::whole(50));
    CHECK(poor.balance == Currency::whole(1));
    CHECK(ledger.burned_by_purchases == Currency{});
    CHECK_THROWS_AS(LiquidityPool(kItem, 0, Currency::whole(1)), std::invalid_argument);
}

TEST_CASE("random trade walk: reserves match the rational oracle and the invariant holds") {
    std::mt19937_64 gen(1234);
    for (int p = 0; p < 40; ++p) {
        const Units is0 = std::uniform_int_distribution<Units>(50, 10'000)(gen);
        const double price = std::exp(std::uniform_real_distribution<double>(std::log(0.5), std::log(500.0))(gen));
        const Currency cr0 = Currency::from_double(price * static_cast<double>(is0));
        LiquidityPool pool(kItem, is0, cr0);
        const __int128 k = static_cast<__int128>(is0) * cr0.raw();
        auto a = trader(Currency::whole(1'000'000'000LL), 0);
        MoneyLedger ledger;
        for (int t = 0; t < 2000; ++t) {
            const Units is = pool.inventory_supply();
            const double pre = pool.quote();
            if (gen() & 1) {
                const Units q = std::uniform_int_distribution<Units>(1, std::max<Units>(1, is / 20))(gen);
                if (q >= is || is < is0 / 4) continue;
                const auto r = execute_buy(pool, q, a, ledger, {});
                CHECK(r.currency_delta.raw() == oracle_reserve(k, is - q) - oracle_reserve(k, is));
                CHECK(pool.quote() > pre);
            } else if (a.inventory[0] > 0) {
                const Units q = std::uniform_int_distribution<Units>(1, a.inventory[0])(gen);
                const auto r = execute_sell(pool, q, a, ledger, {});
                CHECK(r.currency_delta.raw() == oracle_reserve(k, is) - oracle_reserve(k, is + q));
                CHECK(pool.quote() < pre);
            }
            REQUIRE(pool.invariant_error() <= 1e-9);
        }
        CHECK(pool.invariant() == k);
    }
}

TEST_CASE("split trades are path independent") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const Units is0 = std::uniform_int_distribution<Units>(100, 50'000)(gen);
        const Currency cr0 = Currency::from_raw(std::uniform_int_distribution<std::int64_t>(
            1'000'000'000LL, 5'000'000'000'000'000LL)(gen));
        const Units q = std::uniform_int_distribution<Units>(2, is0 / 2)(gen);
        LiquidityPool whole(kItem, is0, cr0), split(kItem, is0, cr0);
        auto a = trader(Currency::from_raw(std::numeric_limits<std::int64_t>::max() / 4));
        auto b = a;
        MoneyLedger la, lb;
        const auto one = execute_buy(whole, q, a, la, {});
        Units left = q;
        Currency total;
        while (left > 0) {
            const Units part = std::uniform_int_distribution<Units>(1, left)(gen);
            total += execute_buy(split, part, b, lb, {}).currency_delta;
            left -= part;
        }
        REQUIRE(total == one.currency_delta);
        REQUIRE(split.currency_reserve() == whole.currency_reserve());
        REQUIRE(a.balance == b.balance);

        // Selling back in pieces telescopes the same way.
        Currency back;
        left = q;
        while (left > 0) {
            const Units part = std::uniform_int_distribution<Units>(1, left)(gen);
            back += execute_sell(split, part, b, lb, {}).currency_delta;
            left -= part;
        }
        REQUIRE(back == one.currency_delta);
        REQUIRE(split.currency_reserve() == cr0);
    }
}

TEST_CASE("two buys of 50 cost exactly one buy of 100") {
    LiquidityPool a(kItem, 1000, Currency::whole(1000)), b(kItem, 1000, Currency::whole(1000));
    auto x = trader(Currency::whole(10'000)), y = trader(Currency::whole(10'000));
    MoneyLedger l;
    const Currency one = execute_buy(a, 100, x, l, {}).currency_delta;
    const Currency two = execute_buy(b, 50, y, l, {}).currency_delta + execute_buy(b, 50, y, l, {}).currency_delta;
    CHECK(one == two);
}

TEST_CASE("fees are charged on top and recorded") {
    LiquidityPool pool(kItem, 1000, Currency::whole(1000));
    auto a = trader(Currency::whole(500));
    MoneyLedger ledger;
    const auto r = execute_buy(pool, 100, a, ledger, {}, 0.01);
    CHECK(r.fee == Currency::from_raw(std::llround(static_cast<double>(r.currency_delta.raw()) * 0.01)));
    CHECK(a.balance == Currency::whole(500) - r.currency_delta - r.fee);
    CHECK(ledger.fees_collected == r.fee);
    CHECK(ledger.circulation_change() == a.balance - Currency::whole(500));
}

TEST_CASE("price index") {
    SUBCASE("all at initial") {
        std::vector<PriceObservation> obs = {{5, 5, true}, {7, 7, false}};
        const auto s = compute_price_index(obs);
        CHECK(s.pcr_food == 1.0);
        CHECK(s.pcr_nonfood == 1.0);
        CHECK(s.pcr_overall == 1.0);
    }
    SUBCASE("geometric cancellation") {
        std::vector<PriceObservation> obs = {{2, 1, true}, {1, 2, true}, {3, 3, false}, {4, 4, false}};
        const auto s = compute_price_index(obs);
        CHECK(s.pcr_food == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.pcr_overall == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.n_food == 2);
        CHECK(s.n_nonfood == 2);
    }
    SUBCASE("homogeneity") {
        std::vector<PriceObservation> obs = {{20, 10, true}, {6, 3, false}, {2, 1, false}};
        CHECK(compute_price_index(obs).pcr_overall == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("overall is the count-weighted combination of the category means") {
        std::mt19937_64 gen(4);
        std::uniform_real_distribution<double> u(0.1, 10.0);
        for (int t = 0; t < 500; ++t) {
            std::vector<PriceObservation> obs;
            const int nf = 1 + static_cast<int>(gen() % 6), nn = 1 + static_cast<int>(gen() % 6);
            double lf = 0, ln = 0;
            for (int i = 0; i < nf; ++i) {
                obs.push_back({u(gen), u(gen), true});
                lf += std::log(obs.back().current / obs.back().initial);
            }
            for (int i = 0; i < nn; ++i) {
                obs.push_back({u(gen), u(gen), false});
                ln += std::log(obs.back().current / obs.back().initial);
            }
            const auto s = compute_price_index(obs);
            const double food = std::exp(lf / nf), non = std::exp(ln / nn);
            CHECK(s.pcr_food == doctest::Approx(food).epsilon(1e-12));
            CHECK(s.pcr_nonfood == doctest::Approx(non).epsilon(1e-12));
            CHECK(s.pcr_overall == doctest::Approx((nf * food + nn * non) / (nf + nn)).epsilon(1e-12));
            CHECK(s.pcr_overall >= std::min(food, non) - 1e-12);
            CHECK(s.pcr_overall <= std::max(food, non) + 1e-12);
        }
    }
}

TEST_CASE("market over the shipped catalog: reserves track the mint/burn ledger") {
    const auto& cfg = default_world();
    Market m(cfg);
    CHECK(m.pool(cid(cfg, "Gold Apple")) == nullptr);
    CHECK(m.quote(cid(cfg, "Fish")).value() == doctest::Approx(300.0));
    CHECK(m.price_index(cfg).pcr_overall == doctest::Approx(1.0).epsilon(1e-12));

    auto a = make_agent(1, cfg, 6, Currency::whole(1'000'000));
    std::mt19937_64 gen(3);
    std::vector<CommodityId> pooled;
    for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
        if (cfg.commodities[i].pooled()) pooled.push_back(CommodityId{static_cast<std::uint16_t>(i)});
    }
    for (int t = 0; t < 3000; ++t) {
        const auto c = pooled[gen() % pooled.size()];
        if ((gen() & 1) && a.held(c) > 0) {
            m.sell(c, 1 + static_cast<Units>(gen() % a.held(c)), a, {});
        } else {
            try {
                m.buy(c, 1 + static_cast<Units>(gen() % 20), a, {});
            } catch (const InsufficientFunds&) {
            }
        }
        REQUIRE(m.ledger().minted_by_sales - m.ledger().burned_by_purchases == m.reserve_drawdown());
        REQUIRE(a.balance - Currency::whole(1'000'000) == m.ledger().circulation_change());
    }
    CHECK_THROWS_AS(m.buy(cid(cfg, "Gold Apple"), 1, a, {}), InvalidAction);
}
