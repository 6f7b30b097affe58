#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace minacc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `minacc` tool. `args` excludes the program name.
/// Subcommands: run, floor-table, leakage, augment, double.
/// Returns 0 on success, 1 on a usage error, 2 on a data error; diagnostics
/// go to `err` as one line.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minacc
