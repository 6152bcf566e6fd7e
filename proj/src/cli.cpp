#include "fraclab/cli.hpp"

#include "fraclab/config.hpp"
#include "fraclab/diagnostics.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/io.hpp"
#include "fraclab/operator.hpp"
#include "fraclab/parabolic.hpp"
#include "fraclab/spectrum.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

namespace fraclab {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string out_dir = "./out";
  std::string format = "both";
  std::string field_path;
  bool dump_operator = false;
};

class Run {
 public:
  Run(std::string command, const Options& opt)
      : opt_(opt), config_(load_config(opt.config_path)), hash_(config_hash(config_)), command_(std::move(command)) {
    dir_ = fs::path(opt.out_dir) / command_ / hash_;
    fs::create_directories(dir_);
  }

  const RunConfig& config() const { return config_; }
  bool want_csv() const { return opt_.format != "json"; }
  bool want_json() const { return opt_.format != "csv"; }
  const Options& options() const { return opt_; }

  std::string path(const std::string& name) {
    const auto p = (dir_ / name).string();
    outputs_.push_back(p);
    return p;
  }

  std::string subdir(const std::string& name) {
    fs::create_directories(dir_ / name);
    return name;
  }

  RunManifest finish(double wall_time) {
    RunManifest manifest{command_, hash_, outputs_, wall_time};
    const auto manifest_path = (dir_ / "manifest.json").string();
    manifest.outputs.push_back(manifest_path);
    write_json(manifest_path, {{"command", manifest.command},
                               {"config_hash", manifest.config_hash},
                               {"outputs", manifest.outputs},
                               {"wall_time", manifest.wall_time}});
    return manifest;
  }

 private:
  Options opt_;
  RunConfig config_;
  std::string hash_;
  std::string command_;
  fs::path dir_;
  std::vector<std::string> outputs_;
};

struct Setup {
  GridPtr<double> grid;
  NonlocalOperator<double> op;
};

Setup build(const RunConfig& cfg) {
  auto grid = build_grid<double>(cfg.problem.domain);
  auto op = assemble_operator<double>(grid, cfg.problem.s);
  return {grid, std::move(op)};
}

Field<double> initial_guess(const RunConfig& cfg, const NonlocalOperator<double>& op) {
  return default_initial_guess<double>(op, cfg.init_amplitude, cfg.solver.eps, cfg.solver.seed);
}

DiagnoseOptions diagnose_options(const RunConfig& cfg) {
  DiagnoseOptions d;
  d.pohozaev_halfpower = cfg.pohozaev_halfpower;
  d.eps = cfg.solver.eps;
  return d;
}

void run_solve_elliptic(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  auto [grid, op] = build(cfg);
  const auto result = solve_elliptic(cfg.problem, op, cfg.solver, initial_guess(cfg, op));
  if (run.want_csv()) write_field_csv(run.path("solution.csv"), result.field);
  if (run.want_json()) {
    write_json(run.path("solve_result.json"), to_json(result));
    write_json(run.path("diagnostics.json"), to_json(diagnose(cfg.problem, op, result.field, diagnose_options(cfg))));
  }
  out << "converged=" << (result.converged ? "true" : "false") << " iterations=" << result.iterations
      << " residual=" << format_double(result.final_residual) << "\n";
}

void run_solve_parabolic(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  auto [grid, op] = build(cfg);
  const auto traj = integrate(cfg.problem, op, initial_guess(cfg, op), cfg.horizon, cfg.solver.dt, cfg.solver);
  std::vector<std::string> files;
  if (run.want_csv()) {
    const std::size_t last = traj.snapshots.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
      if (k % static_cast<std::size_t>(cfg.snapshot_every) != 0 && k != last) continue;
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%06zu.csv", k);
      write_field_csv(run.path(name), traj.snapshots[k]);
      files.emplace_back(name);
    }
  }
  if (run.want_json()) {
    auto manifest = trajectory_manifest(traj, files);
    if (traj.snapshots.size() >= 3) manifest["dissipation_check"] = to_json(dissipation_check(traj));
    write_json(run.path("trajectory.json"), manifest);
  }
  out << "steps=" << traj.snapshots.size() - 1 << " halted_early=" << (traj.halted_early ? "true" : "false") << "\n";
}

void run_diagnose(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  if (run.options().field_path.empty()) throw ConfigError("diagnose needs --field <solution.csv>");
  auto [grid, op] = build(cfg);
  const auto u = read_field_csv(run.options().field_path, grid);
  const auto report = diagnose(cfg.problem, op, u, diagnose_options(cfg));
  if (run.want_json()) write_json(run.path("diagnostics.json"), to_json(report));
  if (run.want_csv()) {
    const bool half = grid->domain().kind == DomainKind::half_space;
    const auto trace = moving_plane_sweep(u, half ? SweepDirection::from_zero_halfspace : SweepDirection::from_left_disk);
    write_text(run.path("moving_plane.csv"), moving_plane_csv(trace));
  }
  out << to_json(report).dump() << "\n";
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void run_sweep(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  auto [grid, op] = build(cfg);
  const auto init = initial_guess(cfg, op);
  std::string table = "p,regime,converged,J,symmetry_defect,lambda0,pohozaev_residual,boundary_slope\n";
  for (double p : cfg.sweep_p) {
    ProblemSpec problem = cfg.problem;
    problem.p = p;
    const auto regime = regime_classify(problem);
    const std::string label = run.subdir("p_" + format_double(p));
    std::string row = format_double(p) + "," + std::string(to_string(regime)) + ",";
    try {
      const auto result = solve_elliptic(problem, op, cfg.solver, init);
      const auto report = diagnose(problem, op, result.field, diagnose_options(cfg));
      if (run.want_csv()) write_field_csv(run.path(label + "/solution.csv"), result.field);
      if (run.want_json()) {
        write_json(run.path(label + "/solve_result.json"), to_json(result));
        write_json(run.path(label + "/diagnostics.json"), to_json(report));
      }
      row += std::string(result.converged ? "true" : "false") + "," + format_double(result.energy_trace.back()) + "," +
             optional_cell(report.symmetry_defect) + "," + (report.lambda0 ? format_double(*report.lambda0) : "inf") +
             "," + format_double(report.pohozaev_residual) + "," + optional_cell(report.boundary_slope);
    } catch (const NumericalError& e) {
      row += "abort,,,,,";
      out << "p=" << format_double(p) << ": numerical abort: " << e.what() << "\n";
    }
    table += row + "\n";
  }
  if (run.want_csv()) write_text(run.path("summary.csv"), table);
  out << table;
}

void run_spectrum(Run& run, std::ostream& out) {
  const auto& cfg = run.config();
  auto [grid, op] = build(cfg);
  EigenOptions eopt;
  eopt.seed = cfg.solver.seed;
  const auto spectrum = eigendecompose(op, cfg.eigen_count, eopt);
  if (run.want_csv()) write_text(run.path("eigenvalues.csv"), eigenvalues_csv(spectrum));
  if (run.options().dump_operator) write_operator_dump(op, run.path("operator.bin"));
  out << eigenvalues_csv(spectrum);
}

}  // namespace

DispatchResult dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fraclab: fractional Laplacian laboratory", "fraclab"};
  app.require_subcommand(1);
  Options opt;
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(Run&, std::ostream&);
  };
  const Command commands[] = {
      {"solve-elliptic", "solve the stationary problem and write the solution", run_solve_elliptic},
      {"solve-parabolic", "integrate the evolution problem and write the trajectory", run_solve_parabolic},
      {"diagnose", "run symmetry/monotonicity/Pohozaev/boundary diagnostics on a solution CSV", run_diagnose},
      {"sweep-p", "solve and diagnose over a list of exponents p", run_sweep},
      {"spectrum", "write the smallest eigenvalues of the discrete operator", run_spectrum},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config_path, "key = value config file")->required();
    sub->add_option("--out", opt.out_dir, "output root")->capture_default_str();
    sub->add_option("--format", opt.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    if (std::string(c.name) == "diagnose") sub->add_option("--field", opt.field_path, "solution CSV")->required();
    if (std::string(c.name) == "spectrum") sub->add_flag("--dump-operator", opt.dump_operator, "write operator.bin");
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return {exit_code::ok, std::nullopt};
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return {exit_code::config_error, std::nullopt};
  }

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    try {
      Run run(commands[k].name, opt);
      commands[k].fn(run, out);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return {exit_code::ok, run.finish(wall)};
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return {exit_code::config_error, std::nullopt};
    } catch (const NumericalError& e) {
      err << "numerical abort: " << e.what() << "\n";
      return {exit_code::numerical_abort, std::nullopt};
    } catch (const fs::filesystem_error& e) {
      err << "filesystem error: " << e.what() << "\n";
      return {exit_code::config_error, std::nullopt};
    }
  }
  err << app.help();
  return {exit_code::config_error, std::nullopt};
}

}  // namespace fraclab
