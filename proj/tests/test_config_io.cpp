#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fraclab/config.hpp"
#include "fraclab/io.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fraclab;
using namespace fraclab::testing;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "fraclab_config_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("minimal config fills in defaults") {
  const auto cfg = parse("kind = disk\ns = 0.5\np = 2\n");
  CHECK(cfg.problem.domain.kind == DomainKind::disk);
  CHECK(cfg.problem.domain.dimension == 2);
  CHECK_FALSE(cfg.problem.domain.truncation_radius);
  CHECK(cfg.problem.weight == WeightMode::x1);
  CHECK(cfg.problem.f.id == NonlinearityId::zero);
  CHECK(cfg.solver.method == SolveMethod::descent);
  CHECK(cfg.sweep_p == std::vector<double>{0.5, 1, 2, 3, 4});

  const auto half = parse("kind = half_space\ns = 0.5\np = 2\n");
  REQUIRE(half.problem.domain.truncation_radius);
  CHECK(*half.problem.domain.truncation_radius == 4.0);
}

TEST_CASE("full config with comments") {
  const auto cfg = parse(
      "# a comment\n"
      "kind = interval   # trailing\n"
      "resolution = 48\n"
      "s = 0.3\n"
      "p = 1.5\n"
      "f.id = lipschitz_custom\n"
      "f.c = 0.25\n"
      "abs_x1 = true\n"
      "tolerance = 1e-9\n"
      "max_iter = 77\n"
      "dt = 0.002\n"
      "eps = 1e-10\n"
      "seed = 99\n"
      "method = minimax\n"
      "k = 4\n"
      "T = 2.5\n"
      "sweep_p = 1, 2 ,3\n"
      "pohozaev_halfpower = true\n"
      "snapshot_every = 5\n");
  CHECK(cfg.problem.domain.resolution == 48);
  CHECK(cfg.problem.s == 0.3);
  CHECK(cfg.problem.f.id == NonlinearityId::lipschitz_custom);
  CHECK(cfg.problem.f.c == 0.25);
  CHECK(cfg.problem.weight == WeightMode::abs_x1);
  CHECK(cfg.solver.tolerance == 1e-9);
  CHECK(cfg.solver.max_iterations == 77);
  CHECK(cfg.solver.seed == 99);
  CHECK(cfg.solver.method == SolveMethod::minimax);
  CHECK(cfg.eigen_count == 4);
  CHECK(cfg.horizon == 2.5);
  CHECK(cfg.sweep_p == std::vector<double>{1, 2, 3});
  CHECK(cfg.pohozaev_halfpower);
  CHECK(cfg.snapshot_every == 5);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\n"), ConfigError);                  // p missing
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = two\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 1.5\np = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\nresolution = 8.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\nabs_x1 = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\ngamma = 0.5\n"), ConfigError);  // gamma is half-space only
  CHECK_THROWS_AS(parse("kind = half_space\ns = 0.5\np = 2\ngamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\nf.id = power\nf.q = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\nthis line has no equals\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = disk\ns = 0.5\np = 2\nT = 0\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/fraclab.cfg"), ConfigError);
  CHECK_NOTHROW(parse("kind = half_space\ns = 0.5\np = 2\ngamma = 0.5\n"));
}

TEST_CASE("config hash is a function of the parsed content") {
  const auto a = parse("kind = disk\ns = 0.5\np = 2\n");
  const auto b = parse("p=2\n# reordered\nkind=disk\n   s =   0.50\n");
  const auto c = parse("kind = disk\ns = 0.5\np = 3\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a).find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.5e-300) == "-1.5000000000000001e-300");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("field CSV round trip is exact") {
  for (const auto& domain : {interval(16), disk(7), half_space(1.0, 4)}) {
    const auto grid = build_grid<double>(domain);
    const auto u = field_from_fn<double>(grid, [](const auto& x) { return std::sin(3.1 * x(0)) / 7.0 + x(1); });
    const auto path = scratch("field.csv").string();
    write_field_csv(path, u);
    const auto back = read_field_csv(path, grid);
    CHECK(back.values() == u.values());
  }
}

TEST_CASE("field CSV header and row format") {
  const auto grid = build_grid<double>(interval(4));
  const auto text = field_csv(Field<double>::constant(grid, 0.5));
  CHECK(text.rfind("x1,value\n-0.75,0.5\n", 0) == 0);
  const auto disk_text = field_csv(Field<double>::constant(build_grid<double>(disk(4)), 1.0));
  CHECK(disk_text.rfind("x1,x2,value\n", 0) == 0);
}

TEST_CASE("field CSV must match the grid") {
  const auto coarse = build_grid<double>(interval(8));
  const auto fine = build_grid<double>(interval(16));
  const auto path = scratch("mismatch.csv").string();
  write_field_csv(path, Field<double>::constant(coarse, 1.0));
  CHECK_THROWS_AS(read_field_csv(path, fine), ConfigError);
  write_text(path, "x1,value\n-0.875,nan\n");
  CHECK_THROWS_AS(read_field_csv(path, coarse), ConfigError);
  write_text(path, "x1,value\n-0.875,abc\n");
  CHECK_THROWS_AS(read_field_csv(path, coarse), ConfigError);
  CHECK_THROWS_AS(read_field_csv(scratch("missing.csv").string(), coarse), ConfigError);
}

TEST_CASE("report JSON keeps the +inf sentinel as a string") {
  DiagnosticsReport<double> rep;
  rep.symmetry_defect = 0.25;
  const auto j = to_json(rep);
  CHECK(j["lambda0"] == "inf");
  CHECK(j["symmetry_defect"] == 0.25);
  CHECK(j["boundary_slope"].is_null());
  rep.lambda0 = -0.5;
  CHECK(to_json(rep)["lambda0"] == -0.5);
}

TEST_CASE("small CSV tables") {
  MovingPlaneTrace<double> trace;
  trace.lambdas = {-0.5, -0.25};
  trace.w_min = {0.0, -1.0};
  CHECK(moving_plane_csv(trace) == "lambda,w_min\n-0.5,0\n-0.25,-1\n");
}
