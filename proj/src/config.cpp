#include "econsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "econsim/errors.hpp"
#include "econsim/policy_names.hpp"

namespace econsim {

using nlohmann::json;

std::string_view to_string(Sector s) {
    switch (s) {
        case Sector::Primary: return "Primary";
        case Sector::SecondaryFood: return "SecondaryFood";
        case Sector::SecondaryRefining: return "SecondaryRefining";
        case Sector::TertiaryHighTech: return "TertiaryHighTech";
        case Sector::SpecialReward: return "SpecialReward";
    }
    return "?";
}

std::string_view to_string(WageRegime r) { return r == WageRegime::Static ? "static" : "dynamic"; }

std::string_view to_string(StudyKind k) {
    switch (k) {
        case StudyKind::PaidLearning: return "paid_learning";
        case StudyKind::Reading: return "reading";
        case StudyKind::SelfStudy: return "self_study";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// WorldConfig lookups

std::optional<CommodityId> WorldConfig::find_commodity(std::string_view id) const {
    for (std::size_t i = 0; i < commodities.size(); ++i) {
        if (commodities[i].id == id) return CommodityId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
}

std::optional<OccupationId> WorldConfig::find_occupation(std::string_view id) const {
    for (std::size_t i = 0; i < occupations.size(); ++i) {
        if (occupations[i].id == id) return OccupationId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
}

const Recipe* WorldConfig::recipe_for(CommodityId c) const {
    for (const auto& r : recipes) {
        if (r.output == c) return &r;
    }
    return nullptr;
}

const JobTier* WorldConfig::tier(int t) const {
    for (const auto& jt : tiers) {
        if (jt.tier == t) return &jt;
    }
    return nullptr;
}

const StateCaps& WorldConfig::caps(int residential_tier) const {
    const auto& caps = params.physiology.caps;
    const auto idx = static_cast<std::size_t>(std::clamp(residential_tier, 1, static_cast<int>(caps.size())) - 1);
    return caps.at(idx);
}

int WorldConfig::max_residential_tier() const { return static_cast<int>(params.physiology.caps.size()); }

double WorldConfig::effective_floor(const OccupationSpec& occ) const {
    const JobTier* jt = tier(occ.tier);
    return jt ? std::max(occ.h_floor, jt->min_h) : occ.h_floor;
}

int WorldConfig::application_quota(int residential_tier) const {
    const auto& q = params.quota_table;
    if (q.empty()) return 0;
    const auto idx = static_cast<std::size_t>(std::clamp(residential_tier, 1, static_cast<int>(q.size())) - 1);
    return q[idx];
}

std::size_t WorldConfig::population_size() const {
    std::size_t n = 0;
    for (const auto& g : population) n += static_cast<std::size_t>(std::max(g.count, 0));
    return n;
}

// ---------------------------------------------------------------------------
// Strict JSON reader

namespace {

/// Object view that records consumed keys so leftovers can be rejected.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(fmt::format("{}: expected an object", path_));
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) throw ParseError(fmt::format("{}.{}: missing required field", path_, key));
        return *it;
    }

    Node child(const std::string& key) { return Node(raw(key), field(key)); }

    template <class T>
    T get(const std::string& key) {
        const json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ParseError(fmt::format("{}: wrong type", field(key)));
        }
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return get<T>(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", field(key)));
        return v.get<double>();
    }
    double number_or(const std::string& key, double fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return number(key);
    }
    std::int64_t integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ParseError(fmt::format("{}: expected an integer", field(key)));
        return v.get<std::int64_t>();
    }
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        return integer(key);
    }
    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ParseError(fmt::format("{}: expected a string", field(key)));
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.contains(it.key())) {
                throw ParseError(fmt::format("{}.{}: unknown field", path_, it.key()));
            }
        }
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_ + "." + key; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

json parse_json_text(std::string_view text, const std::string& origin) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ParseError(fmt::format("{}:{}: malformed JSON ({})", origin, line, e.what()));
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open scenario file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_header(const json& j, const std::string& origin, bool required) {
    if (!j.is_object()) throw ParseError(fmt::format("{}: top level must be an object", origin));
    if (!j.contains("format")) {
        if (required) throw ParseError(fmt::format("{}: missing 'format' header", origin));
        return;
    }
    if (j["format"] != kScenarioFormat) {
        throw ParseError(fmt::format("{}: format must be '{}'", origin, kScenarioFormat));
    }
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kScenarioVersion) {
        throw ParseError(fmt::format("{}: unsupported scenario version (expected {})", origin, kScenarioVersion));
    }
}

/// Merge includes depth-first; keys of the including file win.
json resolve_includes(json doc, const std::filesystem::path& base_dir, const std::string& origin, int depth) {
    if (depth > 8) throw ParseError(fmt::format("{}: include nesting too deep", origin));
    json merged = json::object();
    if (doc.contains("include")) {
        const json& inc = doc["include"];
        if (!inc.is_array()) throw ParseError(fmt::format("{}.include: expected an array of paths", origin));
        for (const auto& p : inc) {
            if (!p.is_string()) throw ParseError(fmt::format("{}.include: expected an array of paths", origin));
            const auto path = base_dir / p.get<std::string>();
            const std::string text = read_file(path);
            json sub = parse_json_text(text, path.string());
            check_header(sub, path.string(), false);
            sub = resolve_includes(std::move(sub), path.parent_path(), path.string(), depth + 1);
            for (auto it = sub.begin(); it != sub.end(); ++it) merged[it.key()] = it.value();
        }
        doc.erase("include");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) merged[it.key()] = it.value();
    return merged;
}

Sector parse_sector(const std::string& s, const std::string& where) {
    for (Sector v : {Sector::Primary, Sector::SecondaryFood, Sector::SecondaryRefining, Sector::TertiaryHighTech,
                     Sector::SpecialReward}) {
        if (to_string(v) == s) return v;
    }
    throw ParseError(fmt::format("{}: unknown sector '{}'", where, s));
}

WageRegime parse_regime(const std::string& s, const std::string& where) {
    if (s == "static") return WageRegime::Static;
    if (s == "dynamic") return WageRegime::Dynamic;
    throw ParseError(fmt::format("{}: regime must be 'static' or 'dynamic'", where));
}

class Builder {
public:
    explicit Builder(WorldConfig& cfg) : cfg_(cfg) {}

    CommodityId resolve(const std::string& id, const std::string& where) const {
        auto c = cfg_.find_commodity(id);
        if (!c) throw DanglingReference(fmt::format("{}: unknown commodity '{}'", where, id));
        return *c;
    }

    std::optional<CommodityId> resolve_optional(Node& n, const std::string& key) const {
        if (!n.has(key)) {
            return std::nullopt;
        }
        const json& v = n.raw(key);
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) throw ParseError(fmt::format("{}: expected a commodity id or null", n.field(key)));
        return resolve(v.get<std::string>(), n.field(key));
    }

    void commodities(const json& arr) {
        if (!arr.is_array()) throw ParseError("commodities: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], fmt::format("commodities[{}]", i));
            CommoditySpec c;
            c.id = n.string("id");
            c.sector = parse_sector(n.string("sector"), n.field("sector"));
            if (n.has("r_min") && !n.raw("r_min").is_null()) {
                c.r_min = static_cast<int>(n.integer("r_min"));
            }
            c.is_food = n.get_or<bool>("is_food", false);
            c.satiety_per_unit = n.number_or("satiety", 0.0);
            c.initial_price = n.number_or("initial_price", 0.0);
            c.initial_pool_inventory = n.integer_or("initial_pool_inventory", 0);
            n.finish();
            cfg_.commodities.push_back(std::move(c));
        }
    }

    void recipes(const json& arr) {
        if (!arr.is_array()) throw ParseError("recipes: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], fmt::format("recipes[{}]", i));
            Recipe r;
            r.output = resolve(n.string("output"), n.field("output"));
            if (n.has("inputs")) {
                const json& ins = n.raw("inputs");
                if (!ins.is_object()) throw ParseError(fmt::format("{}: expected an object", n.field("inputs")));
                for (auto it = ins.begin(); it != ins.end(); ++it) {
                    const std::string where = n.field("inputs") + "." + it.key();
                    if (!it.value().is_number_integer()) throw ParseError(where + ": expected an integer");
                    r.inputs.push_back({resolve(it.key(), where), it.value().get<Units>()});
                }
            }
            std::sort(r.inputs.begin(), r.inputs.end(),
                      [](const RecipeInput& a, const RecipeInput& b) { return a.item < b.item; });
            r.energy_cost = Level::from_double(n.number_or("energy", 0.0));
            r.satiety_cost = Level::from_double(n.number_or("satiety", 0.0));
            r.time_cost = seconds(n.number_or("time_s", 0.0));
            r.reward_prob = n.number_or("reward_prob", 0.0);
            r.reward_item = resolve_optional(n, "reward_item");
            n.finish();
            cfg_.recipes.push_back(std::move(r));
        }
    }

    void tiers(const json& arr) {
        if (!arr.is_array()) throw ParseError("job_tiers: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], fmt::format("job_tiers[{}]", i));
            JobTier t;
            t.tier = static_cast<int>(n.integer("tier"));
            t.name = n.get_or<std::string>("name", "");
            t.min_r = static_cast<int>(n.integer("min_r"));
            t.min_h = n.number("min_h");
            t.prerequisite = resolve_optional(n, "prerequisite");
            t.regime = parse_regime(n.string("regime"), n.field("regime"));
            n.finish();
            cfg_.tiers.push_back(std::move(t));
        }
    }

    void occupations(const json& arr) {
        if (!arr.is_array()) throw ParseError("occupations: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], fmt::format("occupations[{}]", i));
            OccupationSpec o;
            o.id = n.string("id");
            o.tier = static_cast<int>(n.integer("tier"));
            const JobTier* jt = cfg_.tier(o.tier);
            o.r_min = static_cast<int>(n.integer_or("r_min", jt ? jt->min_r : 1));
            o.h_floor = n.number("h_floor");
            o.eligibility_share = n.number("eligibility_share");
            o.base_wage = n.number("base_wage");
            if (n.has("regime")) {
                o.regime = parse_regime(n.string("regime"), n.field("regime"));
            } else {
                o.regime = jt ? jt->regime : (o.tier >= 4 ? WageRegime::Dynamic : WageRegime::Static);
            }
            if (n.has("prerequisite")) {
                o.prereq_commodity = resolve_optional(n, "prerequisite");
            } else {
                o.prereq_commodity = jt ? jt->prerequisite : std::nullopt;
            }
            o.energy_per_hour = Level::from_double(n.number_or("energy_per_hour", 0.0));
            o.satiety_per_hour = Level::from_double(n.number_or("satiety_per_hour", 0.0));
            o.vacancies = static_cast<int>(n.integer_or("vacancies", 0));
            o.phi_beta = n.number_or("phi_beta", 0.0);
            o.phi_ref = n.number_or("phi_ref", std::max(1.0, cfg_.effective_floor(o)));
            n.finish();
            cfg_.occupations.push_back(std::move(o));
        }
    }

    void time(Node n) {
        cfg_.params.time_scale = n.number_or("time_scale", 7.0);
        cfg_.params.tick_length = seconds(n.number_or("tick_length_s", 300.0));
        n.finish();
    }

    void market(Node n) {
        cfg_.params.fee_rate = n.number_or("fee_rate", 0.0);
        cfg_.params.shuffle_order = n.get_or<bool>("shuffle_order", false);
        n.finish();
    }

    void physiology(Node n) {
        auto& p = cfg_.params.physiology;
        const json& caps = n.raw("caps");
        if (!caps.is_array()) throw ParseError(n.field("caps") + ": expected an array");
        for (std::size_t i = 0; i < caps.size(); ++i) {
            Node c(caps[i], fmt::format("{}[{}]", n.field("caps"), i));
            p.caps.push_back({Level::from_double(c.number("satiety")), Level::from_double(c.number("energy")),
                              Level::from_double(c.number("health"))});
            c.finish();
        }
        p.satiety_decay_per_hour = Level::from_double(n.number_or("satiety_decay_per_hour", 0.0));
        p.illness_prob_per_tick = n.number_or("illness_prob_per_tick", 0.0);
        p.illness_damage = Level::from_double(n.number_or("illness_damage", 0.0));
        p.awake_threshold = hours(n.number_or("awake_threshold_h", 24.0));
        p.deprivation_health_per_hour = Level::from_double(n.number_or("deprivation_health_per_hour", 0.0));
        p.sleep_energy_per_hour = Level::from_double(n.number_or("sleep_energy_per_hour", 0.0));
        p.doctor_fee = Currency::from_double(n.number_or("doctor_fee", 0.0));
        p.doctor_heal = Level::from_double(n.number_or("doctor_heal", 0.0));
        p.energy_min = Level::from_double(n.number_or("energy_min", 0.0));
        p.health_min = Level::from_double(n.number_or("health_min", 0.0));
        n.finish();
    }

    void safety_net(Node n) {
        auto& s = cfg_.params.safety_net;
        s.enabled = n.get_or<bool>("enabled", true);
        s.satiety_threshold = Level::from_double(n.number("satiety_threshold"));
        s.persistence_ticks = static_cast<int>(n.integer("persistence_ticks"));
        s.subsidy_item = resolve(n.string("subsidy_item"), n.field("subsidy_item"));
        s.subsidy_amount = n.integer("subsidy_amount");
        n.finish();
    }

    void efficiency(Node n) {
        auto& e = cfg_.params.efficiency;
        e.w_satiety = n.number_or("w_satiety", e.w_satiety);
        e.w_energy = n.number_or("w_energy", e.w_energy);
        e.w_health = n.number_or("w_health", e.w_health);
        e.residential_factor = n.get<std::vector<double>>("residential_factor");
        e.education_floor = n.number_or("education_floor", e.education_floor);
        e.education_saturation = n.number_or("education_saturation", e.education_saturation);
        e.g_min = n.number_or("g_min", e.g_min);
        n.finish();
    }

    StudyCost study_cost(Node n) {
        StudyCost s;
        s.fee_per_hour = Currency::from_double(n.number_or("fee_per_hour", 0.0));
        s.energy_per_hour = Level::from_double(n.number_or("energy_per_hour", 0.0));
        s.satiety_per_hour = Level::from_double(n.number_or("satiety_per_hour", 0.0));
        s.requires_item = resolve_optional(n, "requires_item");
        n.finish();
        return s;
    }

    void education(Node n) {
        cfg_.params.eta_per_hour = n.number("eta_per_hour");
        for (StudyKind k : {StudyKind::PaidLearning, StudyKind::Reading, StudyKind::SelfStudy}) {
            const std::string key(to_string(k));
            if (n.has(key)) {
                cfg_.params.study[static_cast<std::size_t>(k)] = study_cost(n.child(key));
            }
        }
        n.finish();
    }

    void labor(Node n) {
        auto& p = cfg_.params;
        p.recruitment_period = static_cast<int>(n.integer_or("recruitment_period_ticks", 288));
        p.standard_work_hours = n.number_or("standard_work_hours", 8.0);
        p.delta_bar = n.number_or("delta_bar", 0.0);
        p.quota_table = n.get<std::vector<int>>("quota_table");
        n.finish();
    }

    void output(Node n) {
        cfg_.params.snapshot_interval = static_cast<int>(n.integer_or("snapshot_interval_ticks", 0));
        n.finish();
    }

    void population(const json& arr) {
        if (!arr.is_array()) throw ParseError("population: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Node n(arr[i], fmt::format("population[{}]", i));
            PopulationGroup g;
            g.policy = n.string("policy");
            g.count = static_cast<int>(n.integer("count"));
            g.residential_tier = static_cast<int>(n.integer_or("residential_tier", 1));
            g.balance = n.number_or("balance", 0.0);
            g.education = n.number_or("education", 0.0);
            g.tag = n.get_or<std::string>("tag", "");
            g.params = n.get_or<std::map<std::string, double>>("params", {});
            if (n.has("inventory")) {
                const json& inv = n.raw("inventory");
                if (!inv.is_object()) throw ParseError(n.field("inventory") + ": expected an object");
                for (auto it = inv.begin(); it != inv.end(); ++it) {
                    const std::string where = n.field("inventory") + "." + it.key();
                    if (!it.value().is_number_integer()) throw ParseError(where + ": expected an integer");
                    g.inventory.push_back({resolve(it.key(), where), it.value().get<Units>()});
                }
            }
            n.finish();
            cfg_.population.push_back(std::move(g));
        }
    }

private:
    WorldConfig& cfg_;
};

WorldConfig build(const json& doc, const std::string& origin) {
    WorldConfig cfg;
    Builder b(cfg);
    Node top(doc, "scenario");
    (void)top.raw("format");
    (void)top.raw("version");
    cfg.name = top.get_or<std::string>("name", "");
    cfg.params.rng_seed = top.get_or<std::uint64_t>("seed", 0);

    // Catalog first so later sections can resolve commodity ids.
    b.commodities(top.raw("commodities"));
    b.recipes(top.raw("recipes"));
    b.tiers(top.raw("job_tiers"));
    b.occupations(top.raw("occupations"));
    if (top.has("time")) b.time(top.child("time"));
    if (top.has("market")) b.market(top.child("market"));
    b.physiology(top.child("physiology"));
    b.safety_net(top.child("safety_net"));
    b.efficiency(top.child("efficiency"));
    b.education(top.child("education"));
    b.labor(top.child("labor"));
    if (top.has("output")) b.output(top.child("output"));
    if (top.has("population")) b.population(top.raw("population"));
    try {
        top.finish();
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", origin, e.what()));
    }
    return cfg;
}

}  // namespace

WorldConfig parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir) {
    json doc = parse_json_text(text, "<scenario>");
    check_header(doc, "<scenario>", true);
    doc = resolve_includes(std::move(doc), base_dir, "<scenario>", 0);
    return build(doc, "<scenario>");
}

WorldConfig parse_scenario(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json doc = parse_json_text(text, path.string());
    check_header(doc, path.string(), true);
    doc = resolve_includes(std::move(doc), path.parent_path(), path.string(), 0);
    try {
        return build(doc, path.string());
    } catch (const ParseError& e) {
        const std::string what = e.what();
        if (what.rfind(path.string(), 0) == 0) throw;
        throw ParseError(fmt::format("{}: {}", path.string(), what));
    }
}

WorldConfig load_scenario(const std::filesystem::path& path) {
    WorldConfig cfg = parse_scenario(path);
    const auto diags = validate_catalog(cfg);
    if (!diags.empty()) {
        throw ValidationError(fmt::format("{} at {}: {}", diags.front().code, diags.front().path,
                                          diags.front().message));
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate_catalog(const WorldConfig& cfg) {
    std::vector<Diagnostic> out;
    auto diag = [&out](std::string code, std::string path, std::string msg) {
        out.push_back({std::move(code), std::move(path), std::move(msg)});
    };
    const auto& p = cfg.params;
    const int max_tier = cfg.max_residential_tier();

    std::set<std::string> seen;
    std::size_t n_food = 0;
    std::size_t n_nonfood = 0;
    for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
        const auto& c = cfg.commodities[i];
        const std::string path = fmt::format("commodities[{}]", i);
        if (!seen.insert(c.id).second) diag("DUPLICATE_ID", path, fmt::format("duplicate commodity '{}'", c.id));
        if (c.sector == Sector::SpecialReward) {
            if (cfg.recipe_for(CommodityId{static_cast<std::uint16_t>(i)}) != nullptr) {
                diag("SPECIAL_REWARD_RECIPE", path, fmt::format("special reward '{}' must not have a recipe", c.id));
            }
        } else if (!c.r_min || *c.r_min < 1 || *c.r_min > max_tier) {
            diag("R_MIN_RANGE", path, fmt::format("'{}' needs a residential tier in [1, {}]", c.id, max_tier));
        }
        if (c.initial_pool_inventory < 0) {
            diag("POOL_INVENTORY_RANGE", path, fmt::format("'{}' pool inventory must be >= 0", c.id));
        }
        if (c.pooled()) {
            if (!(c.initial_price > 0.0)) {
                diag("INITIAL_PRICE_RANGE", path, fmt::format("'{}' initial price must be > 0", c.id));
            }
            (c.is_food ? n_food : n_nonfood) += 1;
        }
        if (c.satiety_per_unit < 0.0) diag("SATIETY_RANGE", path, "satiety per unit must be >= 0");
    }
    if (n_food + n_nonfood > 0 && (n_food == 0 || n_nonfood == 0)) {
        diag("FOOD_PARTITION", "commodities", "pooled catalog needs both food and non-food commodities");
    }

    std::set<std::uint16_t> outputs;
    for (std::size_t i = 0; i < cfg.recipes.size(); ++i) {
        const auto& r = cfg.recipes[i];
        const std::string path = fmt::format("recipes[{}]", i);
        if (!outputs.insert(r.output.index).second) {
            diag("DUPLICATE_RECIPE", path, fmt::format("second recipe for '{}'", cfg.commodity(r.output).id));
        }
        if (r.energy_cost < Level{} || r.satiety_cost < Level{} || r.time_cost < Duration{}) {
            diag("RECIPE_COST_RANGE", path, "energy, satiety and time costs must be >= 0");
        }
        if (r.inputs.empty() && r.energy_cost == Level{} && r.satiety_cost == Level{} && r.time_cost == Duration{}) {
            diag("RECIPE_EMPTY", path, "recipe needs inputs or a positive cost");
        }
        for (const auto& in : r.inputs) {
            if (in.per_unit < 1) diag("RECIPE_INPUT_QUANTITY", path, "input coefficients must be positive integers");
        }
        if (!(r.reward_prob >= 0.0 && r.reward_prob <= 1.0)) {
            diag("REWARD_PROB_RANGE", path, "reward probability must lie in [0, 1]");
        }
        if (r.reward_prob > 0.0 && !r.reward_item) {
            diag("REWARD_ITEM_MISSING", path, "reward_prob > 0 requires a reward_item");
        }
    }

    for (std::size_t i = 0; i < cfg.tiers.size(); ++i) {
        const auto& t = cfg.tiers[i];
        if (t.tier < 1 || t.tier > 6) diag("TIER_RANGE", fmt::format("job_tiers[{}]", i), "tier must be in [1, 6]");
    }

    seen.clear();
    for (std::size_t i = 0; i < cfg.occupations.size(); ++i) {
        const auto& o = cfg.occupations[i];
        const std::string path = fmt::format("occupations[{}]", i);
        if (!seen.insert(o.id).second) diag("DUPLICATE_ID", path, fmt::format("duplicate occupation '{}'", o.id));
        if (o.tier < 1 || o.tier > 6 || cfg.tier(o.tier) == nullptr) {
            diag("TIER_RANGE", path, fmt::format("'{}' references an undefined job tier {}", o.id, o.tier));
        }
        if (!(o.eligibility_share > 0.0 && o.eligibility_share <= 1.0)) {
            diag("ELIGIBILITY_SHARE_RANGE", path, fmt::format("'{}' eligibility share must lie in (0, 1]", o.id));
        }
        if (o.r_min < 1 || o.r_min > max_tier) {
            diag("R_MIN_RANGE", path, fmt::format("'{}' residential floor must be in [1, {}]", o.id, max_tier));
        }
        if (o.h_floor < 0.0) diag("H_FLOOR_RANGE", path, "knowledge floor must be >= 0");
        if (o.base_wage < 0.0) diag("BASE_WAGE_RANGE", path, "base wage must be >= 0");
        if (o.vacancies < 0) diag("VACANCIES_RANGE", path, "vacancies must be >= 0");
        if (o.energy_per_hour < Level{} || o.satiety_per_hour < Level{}) {
            diag("JOB_COST_RANGE", path, "per-hour costs must be >= 0");
        }
        if (o.phi_beta < 0.0 || !(o.phi_ref > 0.0)) diag("PHI_PARAMS", path, "phi_beta >= 0 and phi_ref > 0 required");
    }

    if (!(p.time_scale > 0.0)) diag("TIME_SCALE_RANGE", "time.time_scale", "time scale must be > 0");
    if (p.tick_length <= Duration{}) diag("TICK_LENGTH_RANGE", "time.tick_length_s", "tick length must be > 0");
    if (!(p.delta_bar >= 0.0 && p.delta_bar < 1.0)) diag("DELTA_BAR_RANGE", "labor.delta_bar", "delta_bar must lie in [0, 1)");
    if (p.recruitment_period < 1) diag("RECRUITMENT_PERIOD", "labor.recruitment_period_ticks", "must be >= 1");
    if (!(p.standard_work_hours > 0.0)) diag("WORK_HOURS_RANGE", "labor.standard_work_hours", "must be > 0");
    if (!(p.eta_per_hour >= 0.0)) diag("ETA_RANGE", "education.eta_per_hour", "must be >= 0");
    if (!(p.fee_rate >= 0.0 && p.fee_rate < 1.0)) diag("FEE_RATE_RANGE", "market.fee_rate", "must lie in [0, 1)");

    const auto& caps = p.physiology.caps;
    if (caps.empty()) diag("STATE_CAPS", "physiology.caps", "at least one residential tier required");
    for (std::size_t i = 0; i < caps.size(); ++i) {
        const auto& c = caps[i];
        if (c.satiety <= Level{} || c.energy <= Level{} || c.health <= Level{}) {
            diag("STATE_CAPS", fmt::format("physiology.caps[{}]", i), "caps must be > 0");
        }
        if (i > 0 && (c.satiety < caps[i - 1].satiety || c.energy < caps[i - 1].energy ||
                      c.health < caps[i - 1].health)) {
            diag("STATE_CAPS", fmt::format("physiology.caps[{}]", i), "caps must be non-decreasing in tier");
        }
    }
    if (p.quota_table.size() != caps.size()) {
        diag("QUOTA_TABLE", "labor.quota_table", "needs one entry per residential tier");
    }
    for (std::size_t i = 0; i < p.quota_table.size(); ++i) {
        if (p.quota_table[i] < 0 || (i > 0 && p.quota_table[i] < p.quota_table[i - 1])) {
            diag("QUOTA_TABLE", fmt::format("labor.quota_table[{}]", i), "quota must be non-negative and non-decreasing");
        }
    }
    const auto& ph = p.physiology;
    if (!(ph.illness_prob_per_tick >= 0.0 && ph.illness_prob_per_tick <= 1.0)) {
        diag("PROBABILITY_RANGE", "physiology.illness_prob_per_tick", "must lie in [0, 1]");
    }
    if (ph.satiety_decay_per_hour < Level{} || ph.illness_damage < Level{} || ph.deprivation_health_per_hour < Level{} ||
        ph.sleep_energy_per_hour < Level{} || ph.doctor_fee < Currency{} || ph.doctor_heal < Level{}) {
        diag("PHYSIOLOGY_RANGE", "physiology", "rates, fees and amounts must be >= 0");
    }
    if (p.safety_net.persistence_ticks < 1 || p.safety_net.subsidy_amount < 1) {
        diag("SAFETY_NET", "safety_net", "persistence_ticks and subsidy_amount must be >= 1");
    }

    const auto& e = p.efficiency;
    if (!(e.g_min > 0.0 && e.g_min <= 1.0)) diag("EFFICIENCY_PARAMS", "efficiency.g_min", "g_min must lie in (0, 1]");
    if (e.w_satiety < 0.0 || e.w_energy < 0.0 || e.w_health < 0.0) {
        diag("EFFICIENCY_PARAMS", "efficiency", "exponents must be >= 0");
    }
    if (!(e.education_floor > 0.0 && e.education_floor <= 1.0) || !(e.education_saturation > 0.0)) {
        diag("EFFICIENCY_PARAMS", "efficiency", "education_floor in (0, 1] and education_saturation > 0 required");
    }
    if (e.residential_factor.size() != caps.size()) {
        diag("EFFICIENCY_PARAMS", "efficiency.residential_factor", "needs one entry per residential tier");
    }
    for (std::size_t i = 0; i < e.residential_factor.size(); ++i) {
        const double f = e.residential_factor[i];
        if (!(f > 0.0 && f <= 1.0) || (i > 0 && f < e.residential_factor[i - 1])) {
            diag("EFFICIENCY_PARAMS", fmt::format("efficiency.residential_factor[{}]", i),
                 "factors must lie in (0, 1] and be non-decreasing");
        }
    }

    for (std::size_t i = 0; i < cfg.population.size(); ++i) {
        const auto& g = cfg.population[i];
        const std::string path = fmt::format("population[{}]", i);
        if (!is_known_policy(g.policy)) diag("UNKNOWN_POLICY", path, fmt::format("unknown policy '{}'", g.policy));
        if (g.count < 0) diag("POPULATION_RANGE", path, "count must be >= 0");
        if (g.residential_tier < 1 || g.residential_tier > max_tier) {
            diag("POPULATION_RANGE", path, fmt::format("residential tier must be in [1, {}]", max_tier));
        }
        if (g.balance < 0.0 || g.education < 0.0) diag("POPULATION_RANGE", path, "balance and education must be >= 0");
        for (const auto& inv : g.inventory) {
            if (inv.per_unit < 0) diag("POPULATION_RANGE", path, "inventory quantities must be >= 0");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json opt_commodity(const WorldConfig& cfg, const std::optional<CommodityId>& c) {
    return c ? json(cfg.commodity(*c).id) : json(nullptr);
}

json to_json(const WorldConfig& cfg, bool canonical) {
    json j;
    j["format"] = std::string(kScenarioFormat);
    j["version"] = kScenarioVersion;
    j["name"] = cfg.name;
    j["seed"] = cfg.params.rng_seed;

    json commodities = json::array();
    for (const auto& c : cfg.commodities) {
        json o;
        o["id"] = c.id;
        o["sector"] = std::string(to_string(c.sector));
        o["r_min"] = c.r_min ? json(*c.r_min) : json(nullptr);
        o["is_food"] = c.is_food;
        o["satiety"] = c.satiety_per_unit;
        o["initial_price"] = c.initial_price;
        o["initial_pool_inventory"] = c.initial_pool_inventory;
        commodities.push_back(std::move(o));
    }
    json recipes = json::array();
    for (const auto& r : cfg.recipes) {
        json o;
        o["output"] = cfg.commodity(r.output).id;
        json ins = json::object();
        for (const auto& in : r.inputs) ins[cfg.commodity(in.item).id] = in.per_unit;
        o["inputs"] = std::move(ins);
        o["energy"] = r.energy_cost.to_double();
        o["satiety"] = r.satiety_cost.to_double();
        o["time_s"] = r.time_cost.to_double();
        o["reward_prob"] = r.reward_prob;
        o["reward_item"] = opt_commodity(cfg, r.reward_item);
        recipes.push_back(std::move(o));
    }
    json tiers = json::array();
    for (const auto& t : cfg.tiers) {
        tiers.push_back({{"tier", t.tier},
                         {"name", t.name},
                         {"min_r", t.min_r},
                         {"min_h", t.min_h},
                         {"prerequisite", opt_commodity(cfg, t.prerequisite)},
                         {"regime", std::string(to_string(t.regime))}});
    }
    json occupations = json::array();
    for (const auto& o : cfg.occupations) {
        occupations.push_back({{"id", o.id},
                               {"tier", o.tier},
                               {"r_min", o.r_min},
                               {"h_floor", o.h_floor},
                               {"eligibility_share", o.eligibility_share},
                               {"base_wage", o.base_wage},
                               {"regime", std::string(to_string(o.regime))},
                               {"prerequisite", opt_commodity(cfg, o.prereq_commodity)},
                               {"energy_per_hour", o.energy_per_hour.to_double()},
                               {"satiety_per_hour", o.satiety_per_hour.to_double()},
                               {"vacancies", o.vacancies},
                               {"phi_beta", o.phi_beta},
                               {"phi_ref", o.phi_ref}});
    }
    if (canonical) {
        auto by_key = [](const char* key) {
            return [key](const json& a, const json& b) { return a[key].dump() < b[key].dump(); };
        };
        std::sort(commodities.begin(), commodities.end(), by_key("id"));
        std::sort(recipes.begin(), recipes.end(), by_key("output"));
        std::sort(tiers.begin(), tiers.end(), by_key("tier"));
        std::sort(occupations.begin(), occupations.end(), by_key("id"));
    }
    j["commodities"] = std::move(commodities);
    j["recipes"] = std::move(recipes);
    j["job_tiers"] = std::move(tiers);
    j["occupations"] = std::move(occupations);

    const auto& p = cfg.params;
    j["time"] = {{"time_scale", p.time_scale}, {"tick_length_s", p.tick_length.to_double()}};
    j["market"] = {{"fee_rate", p.fee_rate}, {"shuffle_order", p.shuffle_order}};
    json caps = json::array();
    for (const auto& c : p.physiology.caps) {
        caps.push_back({{"satiety", c.satiety.to_double()}, {"energy", c.energy.to_double()},
                        {"health", c.health.to_double()}});
    }
    const auto& ph = p.physiology;
    j["physiology"] = {{"caps", caps},
                       {"satiety_decay_per_hour", ph.satiety_decay_per_hour.to_double()},
                       {"illness_prob_per_tick", ph.illness_prob_per_tick},
                       {"illness_damage", ph.illness_damage.to_double()},
                       {"awake_threshold_h", to_hours(ph.awake_threshold)},
                       {"deprivation_health_per_hour", ph.deprivation_health_per_hour.to_double()},
                       {"sleep_energy_per_hour", ph.sleep_energy_per_hour.to_double()},
                       {"doctor_fee", ph.doctor_fee.to_double()},
                       {"doctor_heal", ph.doctor_heal.to_double()},
                       {"energy_min", ph.energy_min.to_double()},
                       {"health_min", ph.health_min.to_double()}};
    const auto& sn = p.safety_net;
    j["safety_net"] = {{"enabled", sn.enabled},
                       {"satiety_threshold", sn.satiety_threshold.to_double()},
                       {"persistence_ticks", sn.persistence_ticks},
                       {"subsidy_item", cfg.commodity(sn.subsidy_item).id},
                       {"subsidy_amount", sn.subsidy_amount}};
    const auto& e = p.efficiency;
    j["efficiency"] = {{"w_satiety", e.w_satiety},
                       {"w_energy", e.w_energy},
                       {"w_health", e.w_health},
                       {"residential_factor", e.residential_factor},
                       {"education_floor", e.education_floor},
                       {"education_saturation", e.education_saturation},
                       {"g_min", e.g_min}};
    json edu = {{"eta_per_hour", p.eta_per_hour}};
    for (StudyKind k : {StudyKind::PaidLearning, StudyKind::Reading, StudyKind::SelfStudy}) {
        const auto& s = p.study[static_cast<std::size_t>(k)];
        edu[std::string(to_string(k))] = {{"fee_per_hour", s.fee_per_hour.to_double()},
                                          {"energy_per_hour", s.energy_per_hour.to_double()},
                                          {"satiety_per_hour", s.satiety_per_hour.to_double()},
                                          {"requires_item", opt_commodity(cfg, s.requires_item)}};
    }
    j["education"] = std::move(edu);
    j["labor"] = {{"recruitment_period_ticks", p.recruitment_period},
                  {"standard_work_hours", p.standard_work_hours},
                  {"delta_bar", p.delta_bar},
                  {"quota_table", p.quota_table}};
    j["output"] = {{"snapshot_interval_ticks", p.snapshot_interval}};

    json pop = json::array();
    for (const auto& g : cfg.population) {
        json inv = json::object();
        for (const auto& it : g.inventory) inv[cfg.commodity(it.item).id] = it.per_unit;
        pop.push_back({{"policy", g.policy},
                       {"count", g.count},
                       {"residential_tier", g.residential_tier},
                       {"balance", g.balance},
                       {"education", g.education},
                       {"tag", g.tag},
                       {"params", g.params},
                       {"inventory", std::move(inv)}});
    }
    j["population"] = std::move(pop);
    return j;
}

}  // namespace

std::string serialize_scenario(const WorldConfig& config) { return to_json(config, false).dump(2) + "\n"; }

bool semantically_equal(const WorldConfig& a, const WorldConfig& b) {
    return to_json(a, true) == to_json(b, true);
}

std::uint64_t resolve_seed(const WorldConfig& config, std::optional<std::uint64_t> explicit_seed) {
    if (explicit_seed) return *explicit_seed;
    if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == nullptr || *end != '\0') {
            throw ParseError(fmt::format("{} must be an unsigned integer, got '{}'", kSeedEnvVar, env));
        }
        return v;
    }
    return config.params.rng_seed;
}

}  // namespace econsim
