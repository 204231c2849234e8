#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "econsim/agent.hpp"
#include "econsim/config.hpp"

#ifndef ECONSIM_SCENARIO_DIR
#error "ECONSIM_SCENARIO_DIR must point at the shipped scenarios"
#endif

namespace econsim::test {

inline std::filesystem::path scenario_path(std::string_view name) {
    return std::filesystem::path(ECONSIM_SCENARIO_DIR) / name;
}

inline const WorldConfig& default_world() {
    static const WorldConfig cfg = load_scenario(scenario_path("default.json"));
    return cfg;
}

inline CommodityId cid(const WorldConfig& cfg, std::string_view id) {
    auto c = cfg.find_commodity(id);
    if (!c) throw std::out_of_range(std::string("no commodity ") + std::string(id));
    return *c;
}

inline OccupationId oid(const WorldConfig& cfg, std::string_view id) {
    for (std::size_t i = 0; i < cfg.occupations.size(); ++i) {
        if (cfg.occupations[i].id == id) return OccupationId{static_cast<std::uint16_t>(i)};
    }
    throw std::out_of_range(std::string("no occupation ") + std::string(id));
}

inline std::filesystem::path temp_dir(std::string_view name) {
    auto p = std::filesystem::temp_directory_path() / ("econsim-test-" + std::string(name));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

/// Scenario text with the shipped catalog and world parameters and a custom
/// population block.
inline std::string scenario_with_population(std::string_view population_json) {
    return std::string(R"({"format":"econsim-scenario","version":1,"name":"t","seed":1,)") +
           R"("include":["catalog.json","world.json"],"population":)" + std::string(population_json) + "}";
}

}  // namespace econsim::test
