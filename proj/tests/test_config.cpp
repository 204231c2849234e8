#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "econsim/config.hpp"
#include "econsim/errors.hpp"
#include "support.hpp"

using namespace econsim;
using econsim::test::default_world;
using econsim::test::scenario_path;
using nlohmann::json;

namespace {

json catalog_json() {
    std::ifstream in(scenario_path("catalog.json"));
    return json::parse(in);
}

json world_json() {
    std::ifstream in(scenario_path("world.json"));
    return json::parse(in);
}

// Fully inlined scenario document, so tests can mutate any part of it.
json inline_scenario() {
    json doc = catalog_json();
    const json world = world_json();
    for (auto& [k, v] : world.items()) doc[k] = v;
    doc["format"] = "econsim-scenario";
    doc["version"] = 1;
    doc["name"] = "inline";
    return doc;
}

WorldConfig parse(const json& doc) { return parse_scenario_text(doc.dump()); }

bool has_code(const std::vector<Diagnostic>& d, std::string_view code) {
    for (const auto& x : d) {
        if (x.code == code) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("shipped catalog: 24 tradables in four sectors plus Gold Apple") {
    const auto& cfg = default_world();
    CHECK(cfg.commodities.size() == 25);
    int pooled = 0;
    std::set<Sector> sectors;
    for (const auto& c : cfg.commodities) {
        if (c.pooled()) {
            ++pooled;
            sectors.insert(c.sector);
        }
    }
    CHECK(pooled == 24);
    CHECK(sectors.size() == 4);
    const auto& gold = cfg.commodity(econsim::test::cid(cfg, "Gold Apple"));
    CHECK(gold.sector == Sector::SpecialReward);
    CHECK_FALSE(gold.r_min.has_value());
    CHECK(cfg.recipe_for(econsim::test::cid(cfg, "Gold Apple")) == nullptr);
}

TEST_CASE("shipped catalog: CEO row") {
    const auto& cfg = default_world();
    const auto& ceo = cfg.occupation(econsim::test::oid(cfg, "CEO"));
    CHECK(ceo.tier == 6);
    CHECK(ceo.r_min == 6);
    CHECK(ceo.h_floor == 604.0);
    CHECK(ceo.eligibility_share == doctest::Approx(0.065));
    CHECK(ceo.base_wage == 1411.0);
    CHECK(ceo.regime == WageRegime::Dynamic);
    CHECK(ceo.prereq_commodity == econsim::test::cid(cfg, "Circuit Board"));
}

TEST_CASE("shipped catalog: regimes follow tiers and floors respect tier minimums") {
    const auto& cfg = default_world();
    for (const auto& o : cfg.occupations) {
        CHECK((o.regime == WageRegime::Static) == (o.tier <= 3));
        CHECK(cfg.effective_floor(o) >= cfg.tier(o.tier)->min_h);
        CHECK(cfg.effective_floor(o) >= o.h_floor);
    }
}

TEST_CASE("shipped catalog: Chip recipe row") {
    const auto& cfg = default_world();
    const Recipe* r = cfg.recipe_for(econsim::test::cid(cfg, "Chip"));
    REQUIRE(r != nullptr);
    CHECK(r->inputs.size() == 2);
    CHECK(r->energy_cost == Level::whole(100));
    CHECK(r->satiety_cost == Level::whole(25));
    CHECK(r->time_cost == Duration::whole(5));
    CHECK(r->reward_prob == doctest::Approx(0.05));
}

TEST_CASE("every shipped scenario validates") {
    for (const char* name : {"default.json", "market-life.json", "stratification.json"}) {
        CAPTURE(name);
        CHECK(validate_catalog(parse_scenario(scenario_path(name))).empty());
    }
}

TEST_CASE("unknown recipe input is a dangling reference") {
    json doc = inline_scenario();
    doc["recipes"][0]["inputs"] = json::object({{"Unobtainium", 1}});
    CHECK_THROWS_AS(parse(doc), DanglingReference);
}

TEST_CASE("reward probability without an item is diagnosed") {
    json doc = inline_scenario();
    for (auto& r : doc["recipes"]) {
        if (r["output"] == "Wood") r["reward_prob"] = 0.05;
    }
    CHECK(has_code(validate_catalog(parse(doc)), "REWARD_ITEM_MISSING"));
}

TEST_CASE("zero eligibility share is diagnosed") {
    json doc = inline_scenario();
    doc["occupations"][3]["eligibility_share"] = 0.0;
    const auto d = validate_catalog(parse(doc));
    REQUIRE(has_code(d, "ELIGIBILITY_SHARE_RANGE"));
    CHECK(d.front().path == "occupations[3]");
}

TEST_CASE("other invariants produce their own codes") {
    SUBCASE("non-monotone quota") {
        json doc = inline_scenario();
        doc["labor"]["quota_table"] = {1, 2, 1, 4, 5, 6};
        CHECK(has_code(validate_catalog(parse(doc)), "QUOTA_TABLE"));
    }
    SUBCASE("caps decreasing in tier") {
        json doc = inline_scenario();
        doc["physiology"]["caps"][3]["energy"] = 10;
        CHECK(has_code(validate_catalog(parse(doc)), "STATE_CAPS"));
    }
    SUBCASE("negative delta bar") {
        json doc = inline_scenario();
        doc["labor"]["delta_bar"] = -0.1;
        CHECK(has_code(validate_catalog(parse(doc)), "DELTA_BAR_RANGE"));
    }
    SUBCASE("duplicate commodity id") {
        json doc = inline_scenario();
        doc["commodities"].push_back(doc["commodities"][0]);
        CHECK(has_code(validate_catalog(parse(doc)), "DUPLICATE_ID"));
    }
    SUBCASE("special reward with a recipe") {
        json doc = inline_scenario();
        doc["recipes"].push_back({{"output", "Gold Apple"}, {"energy", 1}});
        CHECK(has_code(validate_catalog(parse(doc)), "SPECIAL_REWARD_RECIPE"));
    }
}

TEST_CASE("load_scenario names the first broken rule") {
    const auto dir = econsim::test::temp_dir("config-load");
    json doc = inline_scenario();
    doc["occupations"][0]["eligibility_share"] = 1.5;
    std::ofstream(dir / "bad.json") << doc.dump();
    try {
        (void)load_scenario(dir / "bad.json");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("ELIGIBILITY_SHARE_RANGE") != std::string::npos);
    }
}

TEST_CASE("malformed input is a ParseError naming the field") {
    SUBCASE("not JSON") { CHECK_THROWS_AS(parse_scenario_text("{ nope"), ParseError); }
    SUBCASE("wrong header") {
        json doc = inline_scenario();
        doc["format"] = "something-else";
        CHECK_THROWS_AS(parse(doc), ParseError);
    }
    SUBCASE("unknown key") {
        json doc = inline_scenario();
        doc["commodities"][0]["colour"] = "red";
        try {
            (void)parse(doc);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("colour") != std::string::npos);
        }
    }
    SUBCASE("wrong type") {
        json doc = inline_scenario();
        doc["occupations"][0]["base_wage"] = "lots";
        CHECK_THROWS_AS(parse(doc), ParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(parse_scenario("/nonexistent/econsim.json"), IoError); }
}

TEST_CASE("identical bytes give identical configs; serialization round-trips") {
    const auto a = parse_scenario(scenario_path("default.json"));
    const auto b = parse_scenario(scenario_path("default.json"));
    CHECK(serialize_scenario(a) == serialize_scenario(b));
    const auto c = parse_scenario_text(serialize_scenario(a));
    CHECK(semantically_equal(a, c));
    CHECK(serialize_scenario(c) == serialize_scenario(a));
}

TEST_CASE("catalog order does not change meaning") {
    json doc = inline_scenario();
    json shuffled = doc;
    auto& occ = shuffled["occupations"];
    std::reverse(occ.begin(), occ.end());
    CHECK(semantically_equal(parse(doc), parse(shuffled)));
    shuffled["occupations"][0]["base_wage"] = 1.0;
    CHECK_FALSE(semantically_equal(parse(doc), parse(shuffled)));
}

TEST_CASE("seed precedence: flag, then environment, then scenario") {
    const auto& cfg = default_world();
    ::unsetenv(kSeedEnvVar);
    CHECK(resolve_seed(cfg, std::nullopt) == cfg.params.rng_seed);
    ::setenv(kSeedEnvVar, "77", 1);
    CHECK(resolve_seed(cfg, std::nullopt) == 77);
    CHECK(resolve_seed(cfg, 5) == 5);
    ::setenv(kSeedEnvVar, "seven", 1);
    CHECK_THROWS_AS(resolve_seed(cfg, std::nullopt), ParseError);
    ::unsetenv(kSeedEnvVar);
}

TEST_CASE("quota and floor lookups") {
    const auto& cfg = default_world();
    for (int r = 1; r <= 6; ++r) CHECK(cfg.application_quota(r) == r);
    CHECK(cfg.max_residential_tier() == 6);
}
