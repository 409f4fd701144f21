#pragma once

namespace deepgraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

int run(int argc, char** argv);

}  // namespace deepgraph::cli
