#pragma once

// File formats: JSON run configs / layouts / materials, CSV trajectories and
// reports. See README.md for the schemas.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cablerender/geometry.hpp"
#include "cablerender/haptics.hpp"
#include "cablerender/simulation.hpp"
#include "cablerender/solver.hpp"

namespace cablerender {

struct RunConfig {
  ModuleLayout layout;
  Vec3 end_effector;
  SolverConfig solver;
  ValidationProtocol protocol;
  PlantModel plant = IdealPlant{};
};

/// Bench layout with default solver, protocol, and ideal plant.
RunConfig default_run_config();

/// Parses a run config. `base_dir` resolves a relative "layout_file".
/// Throws ConfigError on malformed input or violated invariants.
RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Layout + end effector as a standalone run-config document.
std::string layout_to_json(const ModuleLayout& layout, const Vec3& ee);
std::string run_config_to_json(const RunConfig& config);

MaterialModel parse_material(std::string_view json_text);
MaterialModel load_material(const std::filesystem::path& path);
std::string material_to_json(const MaterialModel& model);

/// Rows of t,x,y,z[,vx,vy,vz]. An optional non-numeric header row, blank
/// lines and '#' comments are skipped. Missing velocities are estimated by
/// backward differences (forward difference on the first row; zero for a
/// lone row).
std::vector<EndEffectorState> parse_trajectory(std::istream& in);
std::vector<EndEffectorState> load_trajectory(const std::filesystem::path& path);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view text);

std::string solve_result_to_json(const SolveResult& result, const ModuleLayout& layout,
                                 const Vec3& desired_force);

inline constexpr std::string_view kValidationCsvHeader =
    "cx,cy,cz,mx,my,mz,angle_err_deg,mag_err_N,feasible";

std::string validation_to_csv(const ValidationReport& report);
std::string validation_summary_to_json(const ValidationReport& report, const RunConfig& config);

}  // namespace cablerender
