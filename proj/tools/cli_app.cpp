#include "cli_app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "cablerender/config_io.hpp"
#include "cablerender/errors.hpp"

namespace cablerender::cli {
namespace {

namespace fs = std::filesystem;

// Noisy-plant defaults when neither the config nor flags give values.
constexpr double kDefaultNoiseStd = 0.3;      // N
constexpr double kDefaultRotationDeg = 5.0;
constexpr double kDefaultTensionBias = 0.1;   // N

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw ConfigError(std::string(flag) + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

Vec3 parse_vec3(const std::string& text, const char* flag) {
  const auto v = parse_list(text, flag);
  if (v.size() != 3) throw ConfigError(std::string(flag) + " expects \"x,y,z\"");
  return {v[0], v[1], v[2]};
}

RunConfig load_config(const std::string& layout_path) {
  if (layout_path.empty()) return default_run_config();
  if (!fs::exists(layout_path)) throw ConfigError("layout file '" + layout_path + "' not found");
  return load_run_config(layout_path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
  } else {
    write_text(path, text);
  }
}

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::FeasibleExact: return kExitOk;
    case SolveStatus::NearestFeasible: return kExitNearestFeasible;
    case SolveStatus::IterationCap: return kExitIterationCap;
  }
  return kExitError;
}

struct SolveOptions {
  std::string layout;
  std::string force;
};

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const RunConfig cfg = load_config(o.layout);
  const Vec3 f = parse_vec3(o.force, "--force");
  const StructureMatrix a = structure_matrix(cfg.layout, cfg.end_effector);
  const auto bounds = cfg.layout.cable_bounds();
  const SolveResult r = solve(a, f, bounds, cfg.solver);
  out << solve_result_to_json(r, cfg.layout, f);
  return exit_code_for(r.status);
}

struct ValidateOptions {
  std::string layout;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string plant;
  std::optional<int> samples;
  std::optional<double> radius;
  std::optional<double> noise_std;
  std::optional<double> rotation_deg;
  std::optional<double> tension_bias;
};

int cmd_validate(const ValidateOptions& o, std::ostream& out) {
  RunConfig cfg = load_config(o.layout);
  if (o.plant == "ideal") {
    cfg.plant = IdealPlant{};
  } else if (o.plant == "noisy" && !std::holds_alternative<NoisyPlant>(cfg.plant)) {
    cfg.plant = NoisyPlant{kDefaultNoiseStd, kDefaultRotationDeg * std::numbers::pi / 180.0,
                           kDefaultTensionBias, 42};
  }
  const bool tuning_noise = o.seed || o.noise_std || o.rotation_deg || o.tension_bias;
  if (tuning_noise && !std::holds_alternative<NoisyPlant>(cfg.plant)) {
    throw ConfigError("--seed/--noise-std/--rotation-deg/--tension-bias need --plant noisy");
  }
  if (auto* n = std::get_if<NoisyPlant>(&cfg.plant)) {
    if (o.seed) n->seed = *o.seed;
    if (o.noise_std) n->force_noise_std = *o.noise_std;
    if (o.rotation_deg) n->frame_rotation_z = *o.rotation_deg * std::numbers::pi / 180.0;
    if (o.tension_bias) n->tension_bias = *o.tension_bias;
  }
  if (o.samples) cfg.protocol.sample_count = *o.samples;
  if (o.radius) cfg.protocol.sphere_radius = *o.radius;
  try {
    cfg.protocol.validate();
    validate(cfg.plant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const ValidationReport report =
      run_validation(cfg.layout, cfg.end_effector, cfg.protocol, cfg.plant, cfg.solver);

  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  write_text(dir / "validation.csv", validation_to_csv(report));
  write_text(dir / "summary.json", validation_summary_to_json(report, cfg));
  write_text(dir / "layout.json", layout_to_json(cfg.layout, cfg.end_effector));

  const auto& agg = report.aggregates;
  out << "samples: " << report.records.size() << " (feasible " << agg.feasible_count << ")\n"
      << "mean angle error: " << agg.mean_angle_error << " deg (rig: "
      << HardwareReference::mean_angle_error_deg << ")\n"
      << "mean measured magnitude: " << agg.mean_measured_magnitude << " N (rig: "
      << HardwareReference::mean_measured_magnitude << ")\n"
      << "mean magnitude error: " << agg.mean_magnitude_error << " N (rig: "
      << HardwareReference::mean_magnitude_error << ")\n"
      << "within 45 deg: " << agg.fraction_within_45deg << "\n";
  return kExitOk;
}

struct WorkspaceOptions {
  std::string layout;
  std::string grid;
  std::string resolution = "5";
  std::string point;
  double magnitude = 0.1;
  std::string out;
};

std::vector<double> axis_samples(double lo, double hi, int n) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

int cmd_workspace(const WorkspaceOptions& o, std::ostream& out) {
  const RunConfig cfg = load_config(o.layout);
  if (!(o.magnitude > 0.0) || !std::isfinite(o.magnitude)) {
    throw ConfigError("--magnitude must be positive");
  }
  std::vector<Vec3> points;
  if (!o.point.empty()) {
    if (!o.grid.empty()) throw ConfigError("give either --point or --grid");
    points.push_back(parse_vec3(o.point, "--point"));
  } else {
    if (o.grid.empty()) throw ConfigError("workspace needs --grid or --point");
    const auto g = parse_list(o.grid, "--grid");
    if (g.size() != 6) throw ConfigError("--grid expects \"xmin,xmax,ymin,ymax,zmin,zmax\"");
    auto r = parse_list(o.resolution, "--resolution");
    if (r.size() == 1) r = {r[0], r[0], r[0]};
    if (r.size() != 3) throw ConfigError("--resolution expects N or \"nx,ny,nz\"");
    int counts[3];
    for (int k = 0; k < 3; ++k) {
      if (g[2 * k] > g[2 * k + 1]) throw ConfigError("--grid min exceeds max");
      if (r[k] < 1 || r[k] != std::floor(r[k]) || r[k] > 1e6) {
        throw ConfigError("--resolution entries must be integers >= 1");
      }
      counts[k] = static_cast<int>(r[k]);
    }
    for (double x : axis_samples(g[0], g[1], counts[0])) {
      for (double y : axis_samples(g[2], g[3], counts[1])) {
        for (double z : axis_samples(g[4], g[5], counts[2])) points.emplace_back(x, y, z);
      }
    }
  }
  std::string csv = "x,y,z,feasible_fraction\r\n";
  for (const Vec3& p : points) {
    csv += format_double(p.x()) + ',' + format_double(p.y()) + ',' + format_double(p.z()) + ',' +
           format_double(feasible_direction_fraction(cfg.layout, p, o.magnitude)) + "\r\n";
  }
  emit(o.out, csv, out);
  return kExitOk;
}

struct MaterialOptions {
  std::string layout;
  std::string material;
  std::string trajectory;
  std::string out;
};

int cmd_material(const MaterialOptions& o, std::ostream& out) {
  const RunConfig cfg = load_config(o.layout);
  const MaterialModel model = load_material(o.material);
  const auto states = load_trajectory(o.trajectory);
  const auto bounds = cfg.layout.cable_bounds();

  std::string csv = "t,x,y,z,fx,fy,fz,status,residual_N";
  for (const auto& a : cfg.layout.anchors()) csv += ',' + csv_field("tension_" + a.id);
  csv += "\r\n";
  for (const auto& s : states) {
    const Vec3 f = evaluate(model, s);
    const SolveResult r = solve(structure_matrix(cfg.layout, s.position), f, bounds, cfg.solver);
    csv += format_double(s.time);
    for (double v : {s.position.x(), s.position.y(), s.position.z(), f.x(), f.y(), f.z()}) {
      csv += ',' + format_double(v);
    }
    csv += ',' + std::string(to_string(r.status)) + ',' + format_double(r.force_residual);
    for (Eigen::Index i = 0; i < r.tensions.size(); ++i) csv += ',' + format_double(r.tensions(i));
    csv += "\r\n";
  }
  emit(o.out, csv, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded-tension force rendering for modular cable-driven haptics"};
  app.require_subcommand(1);

  SolveOptions solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "Compute cable tensions for one force");
  solve_cmd->add_option("--layout", solve_opts.layout, "Run config / layout JSON");
  solve_cmd->add_option("--force", solve_opts.force, "Desired force \"x,y,z\" (N)")->required();

  ValidateOptions val_opts;
  auto* val_cmd = app.add_subcommand("validate", "Run the force-sphere bench protocol");
  val_cmd->add_option("--layout", val_opts.layout, "Run config / layout JSON");
  val_cmd->add_option("--out", val_opts.out_dir, "Output directory");
  val_cmd->add_option("--seed", val_opts.seed, "Noise seed");
  val_cmd->add_option("--plant", val_opts.plant, "Plant model")
      ->check(CLI::IsMember({"ideal", "noisy"}));
  val_cmd->add_option("--samples", val_opts.samples, "Number of commanded forces");
  val_cmd->add_option("--radius", val_opts.radius, "Force sphere radius (N)");
  val_cmd->add_option("--noise-std", val_opts.noise_std, "Sensor noise std (N)");
  val_cmd->add_option("--rotation-deg", val_opts.rotation_deg, "Sensor frame Z rotation (deg)");
  val_cmd->add_option("--tension-bias", val_opts.tension_bias, "Tension offset per cable (N)");

  WorkspaceOptions ws_opts;
  auto* ws_cmd = app.add_subcommand("workspace", "Map the force-feasible workspace");
  ws_cmd->add_option("--layout", ws_opts.layout, "Run config / layout JSON");
  ws_cmd->add_option("--grid", ws_opts.grid, "\"xmin,xmax,ymin,ymax,zmin,zmax\" (m)");
  ws_cmd->add_option("--resolution", ws_opts.resolution, "Points per axis: N or \"nx,ny,nz\"");
  ws_cmd->add_option("--point", ws_opts.point, "Single point \"x,y,z\" (m)");
  ws_cmd->add_option("--magnitude", ws_opts.magnitude, "Test force magnitude (N)");
  ws_cmd->add_option("--out", ws_opts.out, "CSV output file (default stdout)");

  MaterialOptions mat_opts;
  auto* mat_cmd = app.add_subcommand("material", "Render a material along a trajectory");
  mat_cmd->add_option("--layout", mat_opts.layout, "Run config / layout JSON");
  mat_cmd->add_option("--material", mat_opts.material, "Material JSON")->required();
  mat_cmd->add_option("--trajectory", mat_opts.trajectory, "Trajectory CSV")->required();
  mat_cmd->add_option("--out", mat_opts.out, "CSV output file (default stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_opts, out);
    if (*val_cmd) return cmd_validate(val_opts, out);
    if (*ws_cmd) return cmd_workspace(ws_opts, out);
    if (*mat_cmd) return cmd_material(mat_opts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace cablerender::cli
