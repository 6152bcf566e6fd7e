#include "fraclab/config.hpp"

#include "fraclab/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fraclab {
namespace {

std::string trim(const std::string& text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

long long to_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "kind",  "n",        "resolution", "R",       "s",          "p",      "f.id",
      "f.c",   "f.q",      "gamma",      "tolerance", "max_iter", "dt",     "eps",
      "seed",  "abs_x1",   "weight",     "method",  "k",          "T",      "init_amplitude",
      "sweep_p", "pohozaev_halfpower", "snapshot_every"};
  return keys;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key or value");
    if (!known_keys().count(key)) throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    out[key] = value;
  }
  return out;
}

RunConfig parse_config(std::istream& in) {
  const auto kv = parse_key_values(in);
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto need = [&](const std::string& key) -> const std::string& {
    const auto* v = get(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  };

  RunConfig cfg;
  auto& problem = cfg.problem;
  auto& domain = problem.domain;
  domain.kind = parse_domain_kind(need("kind"));
  domain.dimension = domain.kind == DomainKind::interval ? 1 : 2;
  if (const auto* v = get("n")) domain.dimension = static_cast<int>(to_integer("n", *v));
  if (const auto* v = get("resolution")) domain.resolution = static_cast<int>(to_integer("resolution", *v));
  if (const auto* v = get("R")) domain.truncation_radius = to_double("R", *v);
  else if (domain.kind == DomainKind::half_space) domain.truncation_radius = 4.0;

  problem.s = to_double("s", need("s"));
  problem.p = to_double("p", need("p"));
  if (const auto* v = get("f.id")) problem.f.id = parse_nonlinearity_id(*v);
  if (const auto* v = get("f.c")) problem.f.c = to_double("f.c", *v);
  if (const auto* v = get("f.q")) problem.f.q = to_double("f.q", *v);
  if (const auto* v = get("gamma")) problem.gamma = to_double("gamma", *v);
  if (const auto* v = get("abs_x1")) problem.weight = to_bool("abs_x1", *v) ? WeightMode::abs_x1 : WeightMode::x1;
  if (const auto* v = get("weight")) problem.weight = parse_weight_mode(*v);

  auto& solver = cfg.solver;
  if (const auto* v = get("tolerance")) solver.tolerance = to_double("tolerance", *v);
  if (const auto* v = get("max_iter")) solver.max_iterations = static_cast<int>(to_integer("max_iter", *v));
  if (const auto* v = get("dt")) solver.dt = to_double("dt", *v);
  if (const auto* v = get("eps")) solver.eps = to_double("eps", *v);
  if (const auto* v = get("seed")) solver.seed = static_cast<std::uint64_t>(to_integer("seed", *v));
  if (const auto* v = get("method")) solver.method = parse_solve_method(*v);

  if (const auto* v = get("k")) cfg.eigen_count = static_cast<int>(to_integer("k", *v));
  if (const auto* v = get("T")) cfg.horizon = to_double("T", *v);
  if (const auto* v = get("init_amplitude")) cfg.init_amplitude = to_double("init_amplitude", *v);
  if (const auto* v = get("sweep_p")) cfg.sweep_p = to_list("sweep_p", *v);
  if (const auto* v = get("pohozaev_halfpower")) cfg.pohozaev_halfpower = to_bool("pohozaev_halfpower", *v);
  if (const auto* v = get("snapshot_every")) cfg.snapshot_every = static_cast<int>(to_integer("snapshot_every", *v));

  problem.validate();
  solver.validate();
  detail::require(cfg.eigen_count >= 1, "k must be positive");
  detail::require(cfg.horizon > 0.0, "T must be positive");
  detail::require(cfg.init_amplitude > 0.0, "init_amplitude must be positive");
  detail::require(cfg.snapshot_every >= 1, "snapshot_every must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  const auto& d = problem.domain;
  out << "kind=" << to_string(d.kind) << '\n'
      << "n=" << d.dimension << '\n'
      << "resolution=" << d.resolution << '\n'
      << "R=" << (d.truncation_radius ? format_double(*d.truncation_radius) : "none") << '\n'
      << "s=" << format_double(problem.s) << '\n'
      << "p=" << format_double(problem.p) << '\n'
      << "f.id=" << to_string(problem.f.id) << '\n'
      << "f.c=" << format_double(problem.f.c) << '\n'
      << "f.q=" << format_double(problem.f.q) << '\n'
      << "gamma=" << (problem.gamma ? format_double(*problem.gamma) : "none") << '\n'
      << "weight=" << to_string(problem.weight) << '\n'
      << "tolerance=" << format_double(solver.tolerance) << '\n'
      << "max_iter=" << solver.max_iterations << '\n'
      << "dt=" << format_double(solver.dt) << '\n'
      << "eps=" << format_double(solver.eps) << '\n'
      << "seed=" << solver.seed << '\n'
      << "method=" << to_string(solver.method) << '\n'
      << "k=" << eigen_count << '\n'
      << "T=" << format_double(horizon) << '\n'
      << "init_amplitude=" << format_double(init_amplitude) << '\n'
      << "sweep_p=";
  for (std::size_t i = 0; i < sweep_p.size(); ++i) out << (i ? "," : "") << format_double(sweep_p[i]);
  out << '\n'
      << "pohozaev_halfpower=" << (pohozaev_halfpower ? "true" : "false") << '\n'
      << "snapshot_every=" << snapshot_every << '\n';
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : config.canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fraclab
