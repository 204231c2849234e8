#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace econsim {

inline constexpr std::array<std::string_view, 5> kPolicyNames = {
    "SubsistenceWorker", "StudentInvestor", "ProducerTrader", "RandomExplorer", "Idle"};

inline bool is_known_policy(std::string_view name) {
    return std::find(kPolicyNames.begin(), kPolicyNames.end(), name) != kPolicyNames.end();
}

}  // namespace econsim
