#include <doctest.h>

#include <random>

#include "econsim/agent.hpp"
#include "econsim/errors.hpp"
#include "support.hpp"

using namespace econsim;
using econsim::test::cid;
using econsim::test::default_world;

namespace {

Quotes no_quotes(const WorldConfig& cfg) { return Quotes(cfg.commodities.size()); }

WorldConfig quiet_world() {
    WorldConfig cfg = default_world();
    auto& ph = cfg.params.physiology;
    ph.satiety_decay_per_hour = Level{};
    ph.illness_prob_per_tick = 0.0;
    ph.deprivation_health_per_hour = Level{};
    return cfg;
}

}  // namespace

TEST_CASE("net worth: balance plus marked inventory") {
    const auto& cfg = default_world();
    auto q = no_quotes(cfg);

    auto a = make_agent(1, cfg, 3, Currency::whole(100));
    a.inventory[cid(cfg, "Fish").index] = 2;
    q[cid(cfg, "Fish").index] = 304.5;
    CHECK(net_worth(a, q, cfg) == Currency::whole(709));

    auto b = make_agent(2, cfg, 1, Currency::whole(50));
    CHECK(net_worth(b, no_quotes(cfg), cfg) == Currency::whole(50));

    auto c = make_agent(3, cfg, 1, Currency{});
    c.inventory[cid(cfg, "Wood").index] = 3;
    c.inventory[cid(cfg, "Book").index] = 1;
    q[cid(cfg, "Wood").index] = 10.0;
    q[cid(cfg, "Book").index] = 40.0;
    CHECK(net_worth(c, q, cfg) == Currency::whole(70));
}

TEST_CASE("net worth: unpooled rewards count zero, missing pooled quote throws") {
    const auto& cfg = default_world();
    auto a = make_agent(1, cfg, 1, Currency::whole(5));
    a.inventory[cid(cfg, "Gold Apple").index] = 3;
    CHECK(net_worth(a, no_quotes(cfg), cfg) == Currency::whole(5));
    a.inventory[cid(cfg, "Wood").index] = 1;
    CHECK_THROWS_AS(net_worth(a, no_quotes(cfg), cfg), MissingPrice);
}

TEST_CASE("net worth minus balance is exactly the inventory value (random states)") {
    const auto& cfg = default_world();
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> price(0.01, 5000.0);
    std::uniform_int_distribution<Units> qty(0, 500);
    std::uniform_int_distribution<std::int64_t> raw(0, 10'000'000'000'000LL);
    for (int trial = 0; trial < 2000; ++trial) {
        auto a = make_agent(1, cfg, 1, Currency::from_raw(raw(gen)));
        Quotes q(cfg.commodities.size());
        Currency expected;
        for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
            if (!cfg.commodities[i].pooled()) continue;
            q[i] = price(gen);
            a.inventory[i] = qty(gen);
            expected += Currency::from_double(*q[i] * static_cast<double>(a.inventory[i]));
        }
        CHECK(net_worth(a, q, cfg) - a.balance == expected);
        CHECK(inventory_value(a, q, cfg) == expected);
    }
}

TEST_CASE("efficiency bounds") {
    const auto& cfg = default_world();
    const auto& p = cfg.params.efficiency;
    CHECK(efficiency(1.0, 1.0, 1.0, 6, p.education_saturation, p) == 1.0);
    CHECK(efficiency(0.0, 0.0, 0.0, 1, 0.0, p) == p.g_min);
    auto top = make_agent(1, cfg, 6, Currency{}, 1000.0);
    CHECK(efficiency(top, cfg) == 1.0);
}

TEST_CASE("efficiency is non-decreasing in every argument (pairwise sweep)") {
    const auto& p = default_world().params.efficiency;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> tier(1, 6);
    for (int i = 0; i < 5000; ++i) {
        double s = u(gen), e = u(gen), j = u(gen), h = 600.0 * u(gen);
        int r = tier(gen);
        const double g = efficiency(s, e, j, r, h, p);
        CHECK(g >= p.g_min);
        CHECK(g <= 1.0);
        CHECK(efficiency(std::min(1.0, s + u(gen)), e, j, r, h, p) >= g);
        CHECK(efficiency(s, std::min(1.0, e + u(gen)), j, r, h, p) >= g);
        CHECK(efficiency(s, e, std::min(1.0, j + u(gen)), r, h, p) >= g);
        CHECK(efficiency(s, e, j, std::min(6, r + 1), h, p) >= g);
        CHECK(efficiency(s, e, j, r, h + 100.0 * u(gen), p) >= g);
    }
}

TEST_CASE("eat adds the table satiety and marks consumption") {
    WorldConfig cfg = default_world();
    const auto bread = cid(cfg, "Bread");
    cfg.commodities[bread.index].satiety_per_unit = 60.0;
    for (auto& c : cfg.params.physiology.caps) c.satiety = Level::whole(500);
    auto a = make_agent(1, cfg, 3, Currency{});
    a.satiety = Level::whole(290);
    a.inventory[bread.index] = 1;
    const auto d = eat(a, bread, 1, cfg);
    CHECK(a.satiety == Level::whole(350));
    CHECK(d.satiety == Level::whole(60));
    CHECK(a.held(bread) == 0);
    CHECK(a.has_consumed(bread));
    CHECK_THROWS_AS(eat(a, bread, 1, cfg), InsufficientInventory);
}

TEST_CASE("sleep at the cap changes nothing; doctor needs the fee") {
    const auto& cfg = default_world();
    auto a = make_agent(1, cfg, 2, Currency{});
    const Level cap = a.energy;
    sleep(a, hours(8), cfg);
    CHECK(a.energy == cap);
    a.health = Level::whole(10);
    CHECK_THROWS_AS(see_doctor(a, cfg), InsufficientFunds);
    a.balance = cfg.params.physiology.doctor_fee;
    see_doctor(a, cfg);
    CHECK(a.balance == Currency{});
    CHECK(a.health == Level::whole(10) + cfg.params.physiology.doctor_heal);
}

TEST_CASE("recovery works while incapacitated") {
    const auto& cfg = default_world();
    auto a = make_agent(1, cfg, 1, Currency::whole(100));
    a.energy = Level{};
    a.incapacitated = true;
    const auto apple = cid(cfg, "Apple");
    a.inventory[apple.index] = 1;
    a.satiety = Level::whole(10);
    CHECK_NOTHROW(eat(a, apple, 1, cfg));
    CHECK_NOTHROW(sleep(a, hours(1), cfg));
    CHECK(a.energy == cfg.params.physiology.sleep_energy_per_hour);
}

TEST_CASE("tick physiology") {
    SUBCASE("zero dynamics is the identity") {
        const WorldConfig cfg = quiet_world();
        auto a = make_agent(1, cfg, 2, Currency{});
        Rng rng(1);
        CHECK(tick_physiology(a, Duration::whole(300), rng, cfg).empty());
    }
    SUBCASE("certain illness removes exactly the damage") {
        WorldConfig cfg = quiet_world();
        cfg.params.physiology.illness_prob_per_tick = 1.0;
        auto a = make_agent(1, cfg, 2, Currency{});
        const Level before = a.health;
        Rng rng(1);
        tick_physiology(a, Duration::whole(300), rng, cfg);
        CHECK(before - a.health == cfg.params.physiology.illness_damage);
    }
    SUBCASE("low energy incapacitates at the boundary") {
        const WorldConfig cfg = quiet_world();
        auto a = make_agent(1, cfg, 2, Currency{});
        a.energy = cfg.params.physiology.energy_min - Level::from_raw(1);
        CHECK_FALSE(a.incapacitated);
        Rng rng(1);
        tick_physiology(a, Duration::whole(300), rng, cfg);
        CHECK(a.incapacitated);
    }
    SUBCASE("sleep deprivation past the threshold costs health") {
        const WorldConfig base = quiet_world();
        WorldConfig cfg = base;
        cfg.params.physiology.deprivation_health_per_hour = Level::whole(6);
        auto a = make_agent(1, cfg, 2, Currency{});
        a.awake_time = cfg.params.physiology.awake_threshold;
        const Level before = a.health;
        Rng rng(1);
        tick_physiology(a, hours(0.5), rng, cfg);
        CHECK(before - a.health == Level::whole(3));
    }
    SUBCASE("same seed, same draws") {
        WorldConfig cfg = quiet_world();
        cfg.params.physiology.illness_prob_per_tick = 0.3;
        auto a = make_agent(1, cfg, 2, Currency{});
        auto b = a;
        Rng r1(99), r2(99);
        for (int t = 0; t < 200; ++t) {
            tick_physiology(a, Duration::whole(300), r1, cfg);
            tick_physiology(b, Duration::whole(300), r2, cfg);
            REQUIRE(a.health == b.health);
        }
    }
}

TEST_CASE("safety net fires exactly at the persistence threshold") {
    const auto& cfg = default_world();
    const auto& sn = cfg.params.safety_net;
    auto a = make_agent(1, cfg, 1, Currency{});
    a.satiety = Level::whole(1);
    a.low_satiety_streak = sn.persistence_ticks - 1;
    CHECK_FALSE(apply_safety_net(a, cfg).has_value());
    a.low_satiety_streak = sn.persistence_ticks;
    const auto d = apply_safety_net(a, cfg);
    REQUIRE(d.has_value());
    CHECK(a.held(sn.subsidy_item) == sn.subsidy_amount);
    CHECK(a.low_satiety_streak == 0);
}

TEST_CASE("safety net never fires for a fed agent") {
    const WorldConfig cfg = quiet_world();
    auto a = make_agent(1, cfg, 1, Currency{});
    Rng rng(3);
    for (int t = 0; t < 5000; ++t) {
        tick_physiology(a, Duration::whole(300), rng, cfg);
        REQUIRE_FALSE(apply_safety_net(a, cfg).has_value());
    }
}

TEST_CASE("a starving agent never stays at zero satiety past persistence + 1 ticks") {
    WorldConfig cfg = default_world();
    cfg.params.physiology.satiety_decay_per_hour = Level::whole(200);
    auto a = make_agent(1, cfg, 1, Currency{});
    Rng rng(8);
    int zero_run = 0;
    for (int t = 0; t < 3000; ++t) {
        tick_physiology(a, Duration::whole(300), rng, cfg);
        apply_safety_net(a, cfg);
        zero_run = a.satiety == Level{} ? zero_run + 1 : 0;
        REQUIRE(zero_run <= cfg.params.safety_net.persistence_ticks + 1);
    }
}

TEST_CASE("random recovery/physiology fuzz keeps levels within caps") {
    const auto& cfg = default_world();
    std::mt19937_64 gen(21);
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_int_distribution<int> tier(1, 6);
    const auto apple = cid(cfg, "Apple");
    const auto sushi = cid(cfg, "Sushi");
    for (int agent = 0; agent < 50; ++agent) {
        auto a = make_agent(static_cast<AgentId>(agent), cfg, tier(gen), Currency::whole(10'000));
        a.inventory[apple.index] = 1000;
        a.inventory[sushi.index] = 1000;
        Rng rng(static_cast<std::uint64_t>(agent));
        for (int step = 0; step < 400; ++step) {
            switch (pick(gen)) {
                case 0: eat(a, apple, 3, cfg); break;
                case 1: eat(a, sushi, 2, cfg); break;
                case 2: sleep(a, hours(3), cfg); break;
                case 3: see_doctor(a, cfg); break;
                default: tick_physiology(a, Duration::whole(3600), rng, cfg); break;
            }
            const auto& caps = cfg.caps(a.residential_tier);
            REQUIRE(a.satiety >= Level{});
            REQUIRE(a.satiety <= caps.satiety);
            REQUIRE(a.energy >= Level{});
            REQUIRE(a.energy <= caps.energy);
            REQUIRE(a.health >= Level{});
            REQUIRE(a.health <= caps.health);
        }
    }
}
