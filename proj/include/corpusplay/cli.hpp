#pragma once

#include <ostream>

namespace corpusplay::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `corpusplay` command with injectable streams.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace corpusplay::cli
