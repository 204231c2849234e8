#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "econsim/types.hpp"

namespace econsim {

inline constexpr std::string_view kScenarioFormat = "econsim-scenario";
inline constexpr int kScenarioVersion = 1;

enum class Sector { Primary, SecondaryFood, SecondaryRefining, TertiaryHighTech, SpecialReward };
enum class WageRegime { Static, Dynamic };
enum class StudyKind { PaidLearning = 0, Reading = 1, SelfStudy = 2 };

std::string_view to_string(Sector s);
std::string_view to_string(WageRegime r);
std::string_view to_string(StudyKind k);

struct CommoditySpec {
    std::string id;
    Sector sector = Sector::Primary;
    std::optional<int> r_min;  // absent for special rewards
    bool is_food = false;
    double satiety_per_unit = 0.0;  // restored when eaten; 0 means not edible
    double initial_price = 0.0;     // p_i(0)
    Units initial_pool_inventory = 0;  // IS_i(0); 0 means no pool

    [[nodiscard]] bool pooled() const { return initial_pool_inventory > 0; }
    [[nodiscard]] bool edible() const { return satiety_per_unit > 0.0; }
};

struct RecipeInput {
    CommodityId item;
    Units per_unit = 1;  // alpha_{i,m}
};

/// Per-unit Leontief recipe.
struct Recipe {
    CommodityId output;
    std::vector<RecipeInput> inputs;
    Level energy_cost;    // epsilon_i
    Level satiety_cost;   // sigma_i
    Duration time_cost;   // tau_i
    double reward_prob = 0.0;
    std::optional<CommodityId> reward_item;
};

struct JobTier {
    int tier = 1;
    std::string name;
    int min_r = 1;
    double min_h = 0.0;
    std::optional<CommodityId> prerequisite;
    WageRegime regime = WageRegime::Static;
};

struct OccupationSpec {
    std::string id;
    int tier = 1;
    int r_min = 1;
    double h_floor = 0.0;
    double eligibility_share = 1.0;  // pi_j
    double base_wage = 0.0;          // w_0 per pay period
    WageRegime regime = WageRegime::Static;
    std::optional<CommodityId> prereq_commodity;
    Level energy_per_hour;
    Level satiety_per_hour;
    int vacancies = 0;
    double phi_beta = 0.0;  // wage premium slope
    double phi_ref = 1.0;   // reference knowledge score for the premium
};

struct StateCaps {
    Level satiety;
    Level energy;
    Level health;
};

struct PhysiologyParams {
    std::vector<StateCaps> caps;  // indexed by residential tier - 1
    Level satiety_decay_per_hour;
    double illness_prob_per_tick = 0.0;
    Level illness_damage;
    Duration awake_threshold;
    Level deprivation_health_per_hour;
    Level sleep_energy_per_hour;
    Currency doctor_fee;
    Level doctor_heal;
    Level energy_min;  // incapacitated below
    Level health_min;  // incapacitated below
};

struct SafetyNetParams {
    bool enabled = true;
    Level satiety_threshold;
    int persistence_ticks = 1;
    CommodityId subsidy_item;
    Units subsidy_amount = 1;
};

/// Parameters of the efficiency map G(S, E, J, R, H).
struct EfficiencyParams {
    double w_satiety = 0.5;
    double w_energy = 0.5;
    double w_health = 0.5;
    std::vector<double> residential_factor;  // r(R), indexed by tier - 1
    double education_floor = 0.5;             // h(0)
    double education_saturation = 500.0;      // h(H) = 1 for H >= this
    double g_min = 0.1;
};

struct StudyCost {
    Currency fee_per_hour;
    Level energy_per_hour;
    Level satiety_per_hour;
    std::optional<CommodityId> requires_item;  // held, not consumed
};

struct WorldParams {
    double time_scale = 7.0;
    Duration tick_length = Duration::whole(300);
    double eta_per_hour = 1.0;  // education accumulation rate
    EfficiencyParams efficiency;
    double delta_bar = 0.0;
    int recruitment_period = 288;  // ticks; also the pay period
    double standard_work_hours = 8.0;  // hours per pay period the base wage covers
    std::vector<int> quota_table;      // N^max(R), indexed by tier - 1
    SafetyNetParams safety_net;
    PhysiologyParams physiology;
    std::array<StudyCost, 3> study{};
    std::uint64_t rng_seed = 0;
    double fee_rate = 0.0;  // AMM trading fee hook; must be 0 for lossless pools
    bool shuffle_order = false;
    int snapshot_interval = 0;  // ticks; 0 means final snapshot only
};

struct PopulationGroup {
    std::string policy;
    int count = 0;
    int residential_tier = 1;
    double balance = 0.0;
    double education = 0.0;
    std::string tag;
    std::map<std::string, double> params;
    std::vector<RecipeInput> inventory;  // (item, quantity)
};

/// Immutable world definition. Safe to share across threads once built.
struct WorldConfig {
    std::string name;
    std::vector<CommoditySpec> commodities;
    std::vector<Recipe> recipes;
    std::vector<JobTier> tiers;
    std::vector<OccupationSpec> occupations;
    WorldParams params;
    std::vector<PopulationGroup> population;

    [[nodiscard]] std::optional<CommodityId> find_commodity(std::string_view id) const;
    [[nodiscard]] std::optional<OccupationId> find_occupation(std::string_view id) const;
    [[nodiscard]] const CommoditySpec& commodity(CommodityId c) const { return commodities.at(c.index); }
    [[nodiscard]] const OccupationSpec& occupation(OccupationId o) const { return occupations.at(o.index); }
    [[nodiscard]] const Recipe* recipe_for(CommodityId c) const;
    [[nodiscard]] const JobTier* tier(int t) const;
    [[nodiscard]] const StateCaps& caps(int residential_tier) const;
    [[nodiscard]] int max_residential_tier() const;
    /// Binding knowledge floor: the occupation floor or the tier's Min H, whichever is larger.
    [[nodiscard]] double effective_floor(const OccupationSpec& occ) const;
    [[nodiscard]] int application_quota(int residential_tier) const;
    [[nodiscard]] std::size_t population_size() const;
};

struct Diagnostic {
    std::string code;
    std::string path;
    std::string message;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Parse a scenario file (and its includes) without checking invariants.
/// Throws ParseError on malformed input, DanglingReference on unknown ids.
WorldConfig parse_scenario(const std::filesystem::path& path);
WorldConfig parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir = ".");

/// Every invariant violation in `config`; empty iff the config is valid.
std::vector<Diagnostic> validate_catalog(const WorldConfig& config);

/// parse_scenario + validate_catalog; throws ValidationError naming the first rule.
WorldConfig load_scenario(const std::filesystem::path& path);

/// Self-contained JSON (no includes) that parses back to an equal config.
std::string serialize_scenario(const WorldConfig& config);

/// Catalog-order-insensitive equality.
bool semantically_equal(const WorldConfig& a, const WorldConfig& b);

/// Seed precedence: explicit value, then ECONSIM_SEED, then the scenario.
std::uint64_t resolve_seed(const WorldConfig& config, std::optional<std::uint64_t> explicit_seed);

inline constexpr const char* kSeedEnvVar = "ECONSIM_SEED";

}  // namespace econsim
