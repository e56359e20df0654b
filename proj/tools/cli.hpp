#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graftforest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Entry point of the `graftforest` command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads `key = value` lines (blank lines and # comments skipped) into flags:
/// `key = value` becomes `--key value`; `key = true` becomes `--key`; `key = false` is dropped.
std::vector<std::string> expand_config_file(const std::string& path);

}  // namespace graftforest::cli
