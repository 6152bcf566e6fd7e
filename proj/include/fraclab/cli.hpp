#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fraclab {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int numerical_abort = 3;
}  // namespace exit_code

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<std::string> outputs;
  double wall_time = 0.0;
};

struct DispatchResult {
  int exit_code = exit_code::ok;
  std::optional<RunManifest> manifest;
};

/// Entry point behind the `fraclab` binary. Subcommands: solve-elliptic,
/// solve-parabolic, diagnose, sweep-p, spectrum. Outputs land in
/// <out>/<command>/<config_hash>/.
DispatchResult dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fraclab
