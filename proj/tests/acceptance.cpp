// Acceptance run: one PASS/FAIL line per criterion, numbered 1..10.
// Exit status is the number of failed criteria.

#include "fraclab/cli.hpp"
#include "fraclab/diagnostics.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/io.hpp"
#include "fraclab/parabolic.hpp"
#include "fraclab/spectrum.hpp"
#include "support.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

using namespace fraclab;
using namespace fraclab::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// (-Delta)^{1/2} of (1-x^2)_+^{1/2} at x = 0, straight from the singular
// integral: (1/pi) * 2 * int_0^inf (1 - sqrt(1-y^2)_+) / y^2 dy.
double half_laplacian_of_semicircle_at_zero() {
  boost::math::quadrature::tanh_sinh<double> q;
  const double inner = q.integrate([](double y) {
    if (y < 1e-4) return 0.5 + y * y / 8.0;  // series, avoids cancellation
    return (1.0 - std::sqrt(1.0 - y * y)) / (y * y);
  }, 0.0, 1.0);
  const double outer = 1.0;  // int_1^inf y^-2
  return 2.0 * (inner + outer) / detail::pi<double>();
}

double semicircle_error(int resolution, double oracle) {
  auto [grid, op] = lab(interval(resolution), 0.5);
  const auto u = field_from_fn<double>(grid, [](const auto& x) { return std::sqrt(1.0 - x(0) * x(0)); });
  const auto au = apply_operator(op, u);
  double err = 0;
  for (Eigen::Index i = 0; i < au.size(); ++i) {
    if (std::abs(grid->x1(i)) <= 0.8 + 1e-12) err = std::max(err, std::abs(au[i] - oracle));
  }
  return err;
}

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double oracle = half_laplacian_of_semicircle_at_zero();
  const double e64 = semicircle_error(64, oracle);
  const double e128 = semicircle_error(128, oracle);
  const double elapsed = seconds_since(t0);
  const double ratio = e64 / e128;
  return {e128 <= 5e-2 && ratio >= 1.5 && elapsed <= 10.0 && std::abs(oracle - 1.0) < 1e-10,
          fmt("oracle=%.12f err128=%.3e ratio64/128=%.2f time=%.2fs", oracle, e128, ratio, elapsed)};
}

Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto coarse = lab(interval(64), 0.5);
  const auto spec = eigendecompose(coarse.op, 6);
  auto fine = lab(interval(256), 0.5);
  const double oracle = eigendecompose(fine.op, 1).eigenvalues(0);
  const double elapsed = seconds_since(t0);

  bool ascending = true;
  for (Eigen::Index k = 1; k < spec.count(); ++k) ascending = ascending && spec.eigenvalues(k) >= spec.eigenvalues(k - 1);
  const bool positive = spec.eigenvalues(0) > 0;
  const auto& phi = spec.modes.col(0);
  const bool definite = (phi.array() > 0).all() || (phi.array() < 0).all();
  const double rel = std::abs(spec.eigenvalues(0) - oracle) / oracle;
  return {ascending && positive && definite && rel <= 0.02 && elapsed <= 30.0,
          fmt("lambda1(64)=%.6f lambda1(256)=%.6f rel=%.2e time=%.2fs", spec.eigenvalues(0), oracle, rel, elapsed)};
}

Outcome criterion_3() {
  const auto pr = problem(disk(24), 0.5, 2.0, NonlinearitySpec::linear(0.1));
  auto [grid, op] = lab(pr.domain, pr.s);
  const auto u = default_initial_guess(op, 0.5, 1e-12, 7);
  const auto g = energy_gradient(pr, op, u);
  const double hn = grid->cell_volume();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector<double> v(u.size());
    for (auto& x : v) x = gauss(rng);
    v /= v.cwiseAbs().maxCoeff();
    const double step = 1e-4;
    const double jp = energy(pr, op, u.with_values(u.values() + step * v));
    const double jm = energy(pr, op, u.with_values(u.values() - step * v));
    const double fd = (jp - jm) / (2 * step);
    const double an = hn * g.values().dot(v);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
  }
  return {worst <= 1e-5, fmt("worst relative error over 20 directions=%.3e", worst)};
}

Outcome criterion_4() {
  const auto pr = problem(disk(16), 0.5, 2.0);
  auto [grid, op] = lab(pr.domain, pr.s);
  SolverConfig cfg;
  cfg.tolerance = 0;  // integrate over the whole horizon
  const auto init = default_initial_guess(op, 0.5, cfg.eps, cfg.seed);
  double defect[2] = {0, 0};
  bool ok = true;
  const double dts[2] = {0.01, 0.005};
  for (int r = 0; r < 2; ++r) {
    cfg.dt = dts[r];
    const auto traj = integrate(pr, op, init, 0.5, dts[r], cfg);
    const auto rep = dissipation_check(traj);
    for (std::size_t k = 0; k + 1 < traj.energies.size(); ++k) {
      ok = ok && (traj.energies[k + 1] - traj.energies[k]) / dts[r] <= 10 * dts[r];
    }
    ok = ok && rep.passes;
    defect[r] = rep.defect;
  }
  const double ratio = defect[0] / defect[1];
  ok = ok && ratio >= 2 * 0.75 && ratio <= 2 * 1.25;
  return {ok, fmt("defect(dt=.01)=%.3e defect(dt=.005)=%.3e ratio=%.3f", defect[0], defect[1], ratio)};
}

// The nontrivial disk solution used by criteria 5 and 9.
struct DiskSolution {
  Lab lab;
  ProblemSpec problem;
  SolveResult<double> result;
};

const DiskSolution& disk_solution() {
  static const DiskSolution sol = [] {
    const auto pr = problem(disk(32), 0.5, 2.0, NonlinearitySpec::zero(), WeightMode::abs_x1);
    auto l = lab(pr.domain, pr.s);
    SolverConfig cfg;
    cfg.method = SolveMethod::minimax;
    const auto init = default_initial_guess(l.op, 0.5, cfg.eps, cfg.seed);
    auto result = solve_elliptic(pr, l.op, cfg, init);
    return DiskSolution{std::move(l), pr, std::move(result)};
  }();
  return sol;
}

Outcome criterion_5() {
  const auto& sol = disk_solution();
  const auto& u = sol.result.field;
  const double defect = symmetry_defect(u);
  const auto trace = moving_plane_sweep(u, SweepDirection::from_left_disk);
  const double h = sol.lab.grid->spacing();
  const bool lambda_ok = trace.lambda0 && std::abs(*trace.lambda0) <= h;
  const double lambda0 = trace.lambda0 ? *trace.lambda0 : INFINITY;
  const double sup = u.values().maxCoeff();
  return {sol.result.converged && defect <= 1e-4 && lambda_ok,
          fmt("converged=%.0f symmetry_defect=%.3e lambda0=%.5f (h=%.5f)", sol.result.converged, defect, lambda0, h) +
              fmt(" sup=%.4f", sup)};
}

Outcome criterion_6() {
  auto grid = build_grid<double>(half_space(4.0, 8));
  const std::vector<std::function<double(const Grid<double>::Point&)>> fields = {
      [](const auto& x) { return x(0); },
      [](const auto& x) { return (1.0 - std::exp(-x(0))) * (2.0 + std::cos(3.0 * x(1))); },
      [](const auto& x) { return std::atan(x(0) - 2.0) + 0.5 * x(1) * x(1); },
      [](const auto& x) { return std::pow(x(0), 0.5) * std::exp(-x(1) * x(1)); },
  };
  bool ok = true;
  double worst_fraction = 1;
  int sentinels = 0;
  for (const auto& fn : fields) {
    const auto u = field_from_fn<double>(grid, fn);
    const auto mono = monotonicity_profile(u, MonotoneMode::increasing_all);
    const auto trace = moving_plane_sweep(u, SweepDirection::from_zero_halfspace);
    worst_fraction = std::min(worst_fraction, mono.fraction);
    ok = ok && mono.fraction == 1.0 && !trace.lambda0;
    sentinels += !trace.lambda0;
  }
  return {ok, fmt("%.0f fields, min fraction=%.3f, +inf sentinels=%.0f", double(fields.size()), worst_fraction, sentinels)};
}

Outcome criterion_7() {
  // Disk: |x1| weight keeps the reaction term from cancelling on the
  // symmetric ground state. Half-space: x1 > 0 already.
  const std::vector<ProblemSpec> problems = {
      problem(disk(16), 0.5, 4.0, NonlinearitySpec::zero(), WeightMode::abs_x1),
      problem(half_space(4.0, 8), 0.5, 4.0),
  };
  const std::vector<double> taus = {0.5, 1, 2, 4, 8, 16, 32};
  bool ok = true;
  std::string detail;
  for (const auto& pr : problems) {
    auto [grid, op] = lab(pr.domain, pr.s);
    SolverConfig cfg;
    // The residual test is absolute: descent toward zero stops once
    // lambda1 * ||u||_inf <= tolerance, so the floor is only resolvable
    // when the tolerance is of the order of eps.
    cfg.tolerance = cfg.eps;
    const auto init = default_initial_guess(op, 0.5, cfg.eps, cfg.seed);
    const auto ray = scaling_probe(pr, op, init, taus);
    const double j_last = ray.back().second;
    const auto res = solve_elliptic(pr, op, cfg, init);
    const double sup = res.field.values().cwiseAbs().maxCoeff();
    const bool floor = res.converged && sup <= 10 * cfg.eps;
    const bool outcome = !res.converged || floor;
    ok = ok && j_last < 0 && outcome;
    detail += std::string(to_string(pr.domain.kind)) + ": J(32u)=" + fmt("%.3e", j_last) +
              " converged=" + (res.converged ? "yes" : "no") + " (" + res.stop_reason + ")" + fmt(" sup=%.2e; ", sup);
  }
  return {ok, detail};
}

Outcome criterion_8() {
  const auto pr = problem(disk(32), 0.5, -2.0);
  auto [grid, op] = lab(pr.domain, pr.s);
  const auto d = distance_to_boundary(grid);
  const auto u = d.with_values(d.values().array().pow(pr.s).matrix());
  const auto probe = rhs_singularity_probe(pr, op, u);
  const double target = pr.s * pr.p;
  const bool exponent_ok = std::abs(probe.rhs_exponent - target) <= 0.1;

  SolverConfig cfg;
  cfg.max_iterations = 2000;
  bool flagged = false;
  std::string how;
  try {
    const auto res = solve_elliptic(pr, op, cfg, default_initial_guess(op, 0.5, cfg.eps, cfg.seed));
    bool signature = false;
    try {
      signature = rhs_singularity_probe(pr, op, res.field).nonexistence_signature;
    } catch (const ConfigError&) {
    }
    flagged = !res.converged || signature;
    how = std::string("solve converged=") + (res.converged ? "yes" : "no") + " (" + res.stop_reason + ")" +
          " signature=" + (signature ? "yes" : "no");
  } catch (const NumericalError& e) {
    flagged = true;
    how = std::string("solve aborted: ") + e.what();
  }
  return {exponent_ok && flagged, fmt("rhs exponent=%.4f (target %.1f) lhs exponent=%.4f; ", probe.rhs_exponent,
                                      target, probe.lhs_exponent) + how};
}

Outcome criterion_9() {
  bool exact_ok = true;
  double worst = 0;
  for (const auto& domain : {interval(64), disk(32)}) {
    auto grid = build_grid<double>(domain);
    const auto d = distance_to_boundary(grid);
    for (double a : {0.25, 0.5, 0.75, 1.0}) {
      const auto u = d.with_values(d.values().array().pow(a).matrix());
      const auto fit = boundary_exponent_fit(u);
      worst = std::max(worst, std::abs(fit.slope - a));
    }
  }
  exact_ok = worst <= 1e-6;
  const auto& sol = disk_solution();
  const auto fit = boundary_exponent_fit(sol.result.field);
  const bool sol_ok = sol.result.converged && std::abs(fit.slope - 0.5) <= 0.15;
  return {exact_ok && sol_ok, fmt("power-law worst error=%.2e; solution slope=%.4f r2=%.4f", worst, fit.slope, fit.r2)};
}

std::map<std::string, std::string> csv_files(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[std::filesystem::relative(entry.path(), root).string()] = ss.str();
  }
  return out;
}

Outcome criterion_10() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "fraclab_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto config = (root / "sweep.cfg").string();
  std::ofstream(config) << "kind = disk\nresolution = 10\ns = 0.5\np = 2\nweight = abs_x1\n"
                           "method = minimax\nsweep_p = 0.5, 1, 2, 3, 4\nmax_iter = 3000\n";
  std::ostringstream sink;
  std::map<std::string, std::string> runs[2];
  int codes[2];
  for (int r = 0; r < 2; ++r) {
    const auto out = (root / ("run" + std::to_string(r))).string();
    codes[r] = dispatch({"sweep-p", "--config", config, "--out", out}, sink, sink).exit_code;
    runs[r] = csv_files(out);
  }
  const bool ok = codes[0] == 0 && codes[1] == 0 && !runs[0].empty() && runs[0] == runs[1];
  return {ok, fmt("%.0f CSV files per run, identical=%.0f", double(runs[0].size()), runs[0] == runs[1])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"operator oracle", criterion_1},
      {"spectral sanity", criterion_2},
      {"gradient consistency", criterion_3},
      {"energy dissipation", criterion_4},
      {"symmetry on the disk", criterion_5},
      {"monotonicity sentinel", criterion_6},
      {"supercritical signature", criterion_7},
      {"negative-exponent signature", criterion_8},
      {"boundary exponent", criterion_9},
      {"determinism", criterion_10},
  };
  // With arguments only the listed criteria run, e.g. `acceptance 3 7`.
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
      return 64;
    }
    selected[k - 1] = true;
  }
  int failed = 0;
  int ran = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected[index++]) continue;
    ++ran;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed;
}
