#pragma once

#include <iosfwd>

namespace ctepa::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kInadmissible = 3;
inline constexpr int kInternal = 4;

// Entry point of the ctepa tool; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctepa::cli
