#pragma once

#include <iosfwd>

namespace genderprobe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitTransport = 2;
inline constexpr int kExitUsage = 64;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace genderprobe
