#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vinebud::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Environment variable naming the default corpus root.
inline constexpr const char* kCorpusEnv = "VINEBUD_CORPUS";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace vinebud::cli
