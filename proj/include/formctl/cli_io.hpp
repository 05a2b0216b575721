#pragma once

#include <filesystem>
#include <string>

#include "formctl/common.hpp"
#include "formctl/sim_engine.hpp"

namespace formctl {

/// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Parses and validates a scenario JSON document. Rejects duplicate and
/// unknown keys; every module invariant is enforced with a field-level
/// diagnostic. Throws ConfigError.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text);

/// Serializes a config back to its JSON document form.
std::string serialize_config(const ScenarioConfig& config);

/// The built-in nine-robot, three-group scenario: side-7 triangles inside a
/// side-20 triangle, sinusoid-tracking centroid, three-time-scale gains.
ScenarioConfig preset_paper_scenario();

/// Two groups of two robots swapping sides head-on; exercises the potential
/// field. Collision mode off by default so the same config doubles as the
/// near-collision baseline.
ScenarioConfig preset_headon_scenario();

/// Looks up a preset by name ("paper_3x3", "headon_2x2").
ScenarioConfig preset_by_name(const std::string& name);

/// Formation basis of the nine-robot scenario: three side-`b` equilateral
/// triangles whose centroids form a side-`a` equilateral triangle, centered
/// at the origin.
Eigen::VectorXd triangle_formation_basis(double a, double b);

/// Writes trajectory.csv, shape.csv, mindist.csv and report.json into
/// out_dir (write-temp-then-rename; partial files are removed on failure).
/// Throws IoError.
void write_outputs(const SimResult& result, const ConvergenceReport& report,
                   const ScenarioConfig& config, const std::filesystem::path& out_dir);

} // namespace formctl
