#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowdist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (args excludes the program name) and returns the
/// process exit status. Subcommands: ingest, distances, embed, anneal,
/// diagnose.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace flowdist::cli
