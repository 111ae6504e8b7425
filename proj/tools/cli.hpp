#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace soberdse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0..4", "1,3,7" or a mix such as "0..2,9". Throws std::invalid_argument.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Six significant digits, as used in every CSV report.
std::string csv_number(double v);

}  // namespace soberdse::cli
