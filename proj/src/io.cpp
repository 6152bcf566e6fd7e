#include "fraclab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fraclab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string field_csv(const Field<double>& field) {
  const auto& grid = field.grid();
  std::string out = grid.dimension() == 1 ? "x1,value\n" : "x1,x2,value\n";
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const auto& x = grid.point(i);
    out += format_double(x(0));
    if (grid.dimension() == 2) out += "," + format_double(x(1));
    out += "," + format_double(field[i]) + "\n";
  }
  return out;
}

void write_field_csv(const std::string& path, const Field<double>& field) { write_text(path, field_csv(field)); }

Field<double> read_field_csv(const std::string& path, const GridPtr<double>& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read field file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field file '" + path + "' is empty");
  const int columns = grid->dimension() + 1;
  Vector<double> values(grid->interior_count());
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= values.size()) throw ConfigError("field file has more rows than the grid has interior nodes");
    std::stringstream ss(line);
    std::string cell;
    double parsed[3] = {0, 0, 0};
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= columns) throw ConfigError("too many columns in field file row " + std::to_string(row + 1));
      try {
        parsed[c++] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + cell + "' in field file row " + std::to_string(row + 1));
      }
    }
    if (c != columns) throw ConfigError("expected " + std::to_string(columns) + " columns in field file");
    const auto& x = grid->point(row);
    for (int d = 0; d < grid->dimension(); ++d) {
      if (std::abs(parsed[d] - x(d)) > 1e-12) {
        throw ConfigError("field file row " + std::to_string(row + 1) + " does not match the grid node");
      }
    }
    values(row++) = parsed[columns - 1];
  }
  if (row != values.size()) throw ConfigError("field file has fewer rows than the grid has interior nodes");
  if (!values.allFinite()) throw ConfigError("field file holds non-finite values");
  return Field<double>(grid, std::move(values));
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

nlohmann::json to_json(const SolveResult<double>& result) {
  return {{"converged", result.converged},
          {"iterations", result.iterations},
          {"final_residual", result.final_residual},
          {"energy_trace", result.energy_trace},
          {"stop_reason", result.stop_reason}};
}

nlohmann::json to_json(const DiagnosticsReport<double>& report) {
  nlohmann::json j;
  j["symmetry_defect"] = optional_number(report.symmetry_defect);
  j["monotone_fraction"] = report.monotone_fraction;
  j["lambda0"] = report.lambda0 ? nlohmann::json(*report.lambda0) : nlohmann::json("inf");
  j["pohozaev_residual"] = report.pohozaev_residual;
  j["pohozaev_halfpower"] = report.pohozaev_halfpower;
  j["boundary_slope"] = optional_number(report.boundary_slope);
  j["boundary_r2"] = optional_number(report.boundary_r2);
  j["regime"] = std::string(to_string(report.regime));
  j["notes"] = report.notes;
  return j;
}

nlohmann::json to_json(const DissipationReport<double>& report) {
  return {{"defect", report.defect},
          {"max_signed", report.max_signed},
          {"constant", report.constant},
          {"bound_constant", report.bound_constant},
          {"passes", report.passes}};
}

nlohmann::json trajectory_manifest(const Trajectory<double>& traj, const std::vector<std::string>& snapshot_files) {
  return {{"dt", traj.dt},
          {"times", traj.times},
          {"energies", traj.energies},
          {"dissipation", traj.dissipation},
          {"halted_early", traj.halted_early},
          {"snapshots", snapshot_files}};
}

std::string moving_plane_csv(const MovingPlaneTrace<double>& trace) {
  std::string out = "lambda,w_min\n";
  for (std::size_t k = 0; k < trace.lambdas.size(); ++k) {
    out += format_double(trace.lambdas[k]) + "," + format_double(trace.w_min[k]) + "\n";
  }
  return out;
}

std::string eigenvalues_csv(const Spectrum<double>& spectrum) {
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index k = 0; k < spectrum.count(); ++k) {
    out += std::to_string(k + 1) + "," + format_double(spectrum.eigenvalues(k)) + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const nlohmann::json& value) { write_text(path, value.dump(2) + "\n"); }

}  // namespace fraclab
