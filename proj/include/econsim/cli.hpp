#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace econsim::cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kIoError = 2 };

inline constexpr const char* kReportSchema = "econsim-report/1";

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

}  // namespace econsim::cli
