#pragma once

#include "fraclab/diagnostics.hpp"
#include "fraclab/domain.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/parabolic.hpp"
#include "fraclab/spectrum.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fraclab {

/// 17 significant digits, '.' separator; "inf"/"-inf"/"nan" for non-finite.
std::string format_double(double value);

/// Columns x1[,x2],value; one row per interior node in grid order.
void write_field_csv(const std::string& path, const Field<double>& field);
std::string field_csv(const Field<double>& field);

/// Reads a field written by write_field_csv onto `grid`; coordinates must
/// match the grid's interior nodes row by row.
Field<double> read_field_csv(const std::string& path, const GridPtr<double>& grid);

nlohmann::json to_json(const SolveResult<double>& result);
nlohmann::json to_json(const DiagnosticsReport<double>& report);
nlohmann::json to_json(const DissipationReport<double>& report);
/// Manifest of a trajectory: times, energies, dissipation, halted_early.
nlohmann::json trajectory_manifest(const Trajectory<double>& traj, const std::vector<std::string>& snapshot_files);

std::string moving_plane_csv(const MovingPlaneTrace<double>& trace);
std::string eigenvalues_csv(const Spectrum<double>& spectrum);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& value);

}  // namespace fraclab
