#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eev::cli {

// Process exit codes of `eeverify verify`; every other command returns
// kOk on success.
inline constexpr int kSafe = 0;
inline constexpr int kUnsafe = 1;
inline constexpr int kUnknown = 2;
inline constexpr int kUsage = 3;
inline constexpr int kInternal = 4;
inline constexpr int kOk = 0;

// Runs one eeverify invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eev::cli
