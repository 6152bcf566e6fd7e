#pragma once

#include "fraclab/problem.hpp"

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace fraclab {

/// Everything a CLI run needs, read from a flat `key = value` file.
///
/// Keys: kind, n, resolution, R, s, p, f.id, f.c, f.q, gamma, tolerance,
/// max_iter, dt, eps, seed, plus abs_x1 / weight, method, k, T,
/// init_amplitude, sweep_p, pohozaev_halfpower, snapshot_every.
struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  int eigen_count = 3;            // k
  double horizon = 1.0;           // T
  double init_amplitude = 0.5;
  std::vector<double> sweep_p = {0.5, 1.0, 2.0, 3.0, 4.0};
  bool pohozaev_halfpower = false;
  int snapshot_every = 10;

  /// Fixed-order rendering of every parsed value; input to config_hash.
  std::string canonical() const;
};

/// Raw key/value pairs; later duplicates override earlier ones.
std::map<std::string, std::string> parse_key_values(std::istream& in);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace fraclab
