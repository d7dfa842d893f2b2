#include "cablerender/config_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "cablerender/errors.hpp"
#include "json.hpp"

namespace cablerender {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, _] : obj.items()) {
    if (!keys.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

Vec3 to_vec3(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw ConfigError(std::string(what) + " must be an array of three numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json from_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

TensionBounds to_bounds(const json& j) {
  reject_unknown(j, {"t_min", "t_max"}, "bounds");
  TensionBounds b;
  b.t_min = get_number(j, "t_min", b.t_min);
  b.t_max = get_number(j, "t_max", b.t_max);
  return b;
}

json from_bounds(const TensionBounds& b) { return {{"t_min", b.t_min}, {"t_max", b.t_max}}; }

ModuleLayout to_layout(const json& doc) {
  const json& list = doc.at("anchors");
  if (!list.is_array()) throw ConfigError("'anchors' must be an array");
  std::vector<ModuleAnchor> anchors;
  for (const auto& item : list) {
    reject_unknown(item, {"id", "position", "bounds"}, "anchor");
    ModuleAnchor a;
    if (!item.contains("id") || !item["id"].is_string()) {
      throw ConfigError("every anchor needs a string 'id'");
    }
    a.id = item["id"].get<std::string>();
    a.position = to_vec3(item.at("position"), "anchor position");
    if (item.contains("bounds")) a.bounds = to_bounds(item["bounds"]);
    anchors.push_back(std::move(a));
  }
  const TensionBounds shared = doc.contains("bounds") ? to_bounds(doc["bounds"]) : TensionBounds{};
  return ModuleLayout(std::move(anchors), shared);
}

json from_layout(const ModuleLayout& layout) {
  json anchors = json::array();
  for (const auto& a : layout.anchors()) {
    json item = {{"id", a.id}, {"position", from_vec3(a.position)}};
    if (a.bounds) item["bounds"] = from_bounds(*a.bounds);
    anchors.push_back(std::move(item));
  }
  return {{"anchors", std::move(anchors)}, {"bounds", from_bounds(layout.bounds())}};
}

SolverConfig to_solver(const json& j) {
  reject_unknown(j, {"max_iterations", "tolerance", "start"}, "solver");
  SolverConfig c;
  if (j.contains("max_iterations")) {
    if (!j["max_iterations"].is_number_integer()) {
      throw ConfigError("'max_iterations' must be an integer");
    }
    c.max_iterations = j["max_iterations"].get<int>();
  }
  c.tolerance = get_number(j, "tolerance", c.tolerance);
  if (j.contains("start")) {
    const json& s = j["start"];
    if (s.is_string() && s.get<std::string>() == "min_tension") {
      c.start_mode = MinTensionStart{};
    } else if (s.is_array()) {
      TensionVector t(static_cast<Eigen::Index>(s.size()));
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number()) throw ConfigError("'start' entries must be numbers");
        t(static_cast<Eigen::Index>(i)) = s[i].get<double>();
      }
      c.start_mode = CustomStart{std::move(t)};
    } else {
      throw ConfigError("'start' must be \"min_tension\" or an array of tensions");
    }
  }
  return c;
}

json from_solver(const SolverConfig& c) {
  json j = {{"max_iterations", c.max_iterations}, {"tolerance", c.tolerance}};
  if (const auto* custom = std::get_if<CustomStart>(&c.start_mode)) {
    j["start"] = std::vector<double>(custom->tensions.begin(), custom->tensions.end());
  } else {
    j["start"] = "min_tension";
  }
  return j;
}

ValidationProtocol to_protocol(const json& j) {
  reject_unknown(j, {"sphere_radius", "sample_count", "hold_duration", "samples_per_hold"},
                 "protocol");
  ValidationProtocol p;
  p.sphere_radius = get_number(j, "sphere_radius", p.sphere_radius);
  p.hold_duration = get_number(j, "hold_duration", p.hold_duration);
  for (auto [key, dst] : {std::pair{"sample_count", &p.sample_count},
                          std::pair{"samples_per_hold", &p.samples_per_hold}}) {
    if (j.contains(key)) {
      if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
      *dst = j[key].get<int>();
    }
  }
  return p;
}

json from_protocol(const ValidationProtocol& p) {
  return {{"sphere_radius", p.sphere_radius},
          {"sample_count", p.sample_count},
          {"hold_duration", p.hold_duration},
          {"samples_per_hold", p.samples_per_hold}};
}

PlantModel to_plant(const json& j) {
  reject_unknown(j, {"type", "force_noise_std", "frame_rotation_z", "tension_bias", "seed"},
                 "plant");
  const std::string type = j.value("type", std::string("ideal"));
  if (type == "ideal") return IdealPlant{};
  if (type != "noisy") throw ConfigError("plant type must be 'ideal' or 'noisy'");
  NoisyPlant n;
  n.force_noise_std = get_number(j, "force_noise_std", n.force_noise_std);
  n.frame_rotation_z = get_number(j, "frame_rotation_z", n.frame_rotation_z);
  n.tension_bias = get_number(j, "tension_bias", n.tension_bias);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a nonnegative integer");
    n.seed = j["seed"].get<std::uint64_t>();
  }
  return n;
}

json from_plant(const PlantModel& plant) {
  if (const auto* n = std::get_if<NoisyPlant>(&plant)) {
    return {{"type", "noisy"},
            {"force_noise_std", n->force_noise_std},
            {"frame_rotation_z", n->frame_rotation_z},
            {"tension_bias", n->tension_bias},
            {"seed", n->seed}};
  }
  return {{"type", "ideal"}};
}

// Wraps library validation errors so callers see a single ConfigError type.
template <typename F>
auto checked(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const DegenerateGeometry& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig default_run_config() {
  auto bench = default_bench_layout();
  return RunConfig{std::move(bench.layout), bench.end_effector, {}, {}, IdealPlant{}};
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_json(json_text, "run config");
  return checked([&] {
    reject_unknown(doc,
                   {"anchors", "bounds", "end_effector", "layout_file", "solver", "protocol",
                    "plant"},
                   "run config");
    RunConfig cfg = default_run_config();
    if (doc.contains("layout_file")) {
      if (doc.contains("anchors")) {
        throw ConfigError("give either 'anchors' or 'layout_file', not both");
      }
      std::filesystem::path p = doc["layout_file"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      const RunConfig referenced = load_run_config(p);
      cfg.layout = referenced.layout;
      cfg.end_effector = referenced.end_effector;
    }
    if (doc.contains("anchors")) {
      cfg.layout = to_layout(doc);
      if (!doc.contains("end_effector")) {
        throw ConfigError("a layout with 'anchors' must also give 'end_effector'");
      }
    } else if (doc.contains("bounds")) {
      throw ConfigError("'bounds' is only valid alongside 'anchors'");
    }
    if (doc.contains("end_effector")) cfg.end_effector = to_vec3(doc["end_effector"], "end_effector");
    if (doc.contains("solver")) cfg.solver = to_solver(doc["solver"]);
    if (doc.contains("protocol")) cfg.protocol = to_protocol(doc["protocol"]);
    if (doc.contains("plant")) cfg.plant = to_plant(doc["plant"]);
    cfg.solver.validate();
    cfg.protocol.validate();
    validate(cfg.plant);
    return cfg;
  });
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.parent_path());
}

std::string layout_to_json(const ModuleLayout& layout, const Vec3& ee) {
  json doc = from_layout(layout);
  doc["end_effector"] = from_vec3(ee);
  return doc.dump(2) + "\n";
}

std::string run_config_to_json(const RunConfig& config) {
  json doc = from_layout(config.layout);
  doc["end_effector"] = from_vec3(config.end_effector);
  doc["solver"] = from_solver(config.solver);
  doc["protocol"] = from_protocol(config.protocol);
  doc["plant"] = from_plant(config.plant);
  return doc.dump(2) + "\n";
}

namespace {

MaterialModel to_material(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ConfigError("material needs a string 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "magnetic") {
    reject_unknown(j, {"type", "target", "gain", "max_force"}, "magnetic");
    return Magnetic{to_vec3(j.at("target"), "target"), get_number(j, "gain", 0.0),
                    get_number(j, "max_force", 0.0)};
  }
  if (type == "spring") {
    reject_unknown(j, {"type", "surface_point", "normal", "stiffness"}, "spring");
    return Spring{to_vec3(j.at("surface_point"), "surface_point"),
                  to_vec3(j.at("normal"), "normal"), get_number(j, "stiffness", 0.0)};
  }
  if (type == "damper") {
    reject_unknown(j, {"type", "coefficient"}, "damper");
    return Damper{get_number(j, "coefficient", 0.0)};
  }
  if (type == "friction") {
    reject_unknown(j, {"type", "coefficient", "max_force", "tangent_plane_normal"}, "friction");
    return Friction{get_number(j, "coefficient", 0.0), get_number(j, "max_force", 0.0),
                    to_vec3(j.at("tangent_plane_normal"), "tangent_plane_normal")};
  }
  if (type == "vibration") {
    reject_unknown(j, {"type", "amplitude", "frequency", "direction", "gate_speed"}, "vibration");
    return Vibration{get_number(j, "amplitude", 0.0), get_number(j, "frequency", 0.0),
                     to_vec3(j.at("direction"), "direction"), get_number(j, "gate_speed", 0.0)};
  }
  if (type == "composite") {
    reject_unknown(j, {"type", "children"}, "composite");
    Composite c;
    for (const auto& child : j.at("children")) c.children.push_back(to_material(child));
    return c;
  }
  throw ConfigError("unknown material type '" + type + "'");
}

struct MaterialWriter {
  json operator()(const Magnetic& m) const {
    return {{"type", "magnetic"}, {"target", from_vec3(m.target)}, {"gain", m.gain},
            {"max_force", m.max_force}};
  }
  json operator()(const Spring& s) const {
    return {{"type", "spring"}, {"surface_point", from_vec3(s.surface_point)},
            {"normal", from_vec3(s.normal)}, {"stiffness", s.stiffness}};
  }
  json operator()(const Damper& d) const {
    return {{"type", "damper"}, {"coefficient", d.coefficient}};
  }
  json operator()(const Friction& f) const {
    return {{"type", "friction"}, {"coefficient", f.coefficient}, {"max_force", f.max_force},
            {"tangent_plane_normal", from_vec3(f.tangent_plane_normal)}};
  }
  json operator()(const Vibration& v) const {
    return {{"type", "vibration"}, {"amplitude", v.amplitude}, {"frequency", v.frequency},
            {"direction", from_vec3(v.direction)}, {"gate_speed", v.gate_speed}};
  }
  json operator()(const Composite& c) const {
    json children = json::array();
    for (const auto& child : c.children) children.push_back(std::visit(*this, child.kind));
    return {{"type", "composite"}, {"children", std::move(children)}};
  }
};

bool parse_number(std::string_view field, double& out) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

MaterialModel parse_material(std::string_view json_text) {
  const json doc = parse_json(json_text, "material");
  return checked([&] {
    MaterialModel m = to_material(doc);
    validate(m);
    return m;
  });
}

MaterialModel load_material(const std::filesystem::path& path) {
  return parse_material(read_file(path));
}

std::string material_to_json(const MaterialModel& model) {
  return std::visit(MaterialWriter{}, model.kind).dump(2) + "\n";
}

std::vector<EndEffectorState> parse_trajectory(std::istream& in) {
  std::vector<EndEffectorState> states;
  std::vector<bool> has_velocity;
  std::string line;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto fields = split_commas(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) {
      numeric = parse_number(fields[i], values[i]);
    }
    if (!numeric) {
      if (first_content) {
        first_content = false;
        continue;  // header
      }
      throw ConfigError("trajectory line " + std::to_string(line_no) + ": non-numeric field");
    }
    first_content = false;
    if (values.size() != 4 && values.size() != 7) {
      throw ConfigError("trajectory line " + std::to_string(line_no) +
                        ": expected 4 or 7 columns (t,x,y,z[,vx,vy,vz])");
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw ConfigError("trajectory line " + std::to_string(line_no) + ": non-finite value");
      }
    }
    EndEffectorState s;
    s.time = values[0];
    s.position = Vec3(values[1], values[2], values[3]);
    if (values.size() == 7) s.velocity = Vec3(values[4], values[5], values[6]);
    if (!states.empty() && s.time < states.back().time) {
      throw ConfigError("trajectory line " + std::to_string(line_no) + ": time goes backwards");
    }
    states.push_back(s);
    has_velocity.push_back(values.size() == 7);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (has_velocity[i] || states.size() < 2) continue;
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i == 0 ? 1 : i;
    const double dt = states[b].time - states[a].time;
    if (!(dt > 0.0)) {
      throw ConfigError("trajectory needs strictly increasing time to estimate velocity");
    }
    states[i].velocity = (states[b].position - states[a].position) / dt;
  }
  return states;
}

std::vector<EndEffectorState> load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return parse_trajectory(in);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string solve_result_to_json(const SolveResult& result, const ModuleLayout& layout,
                                 const Vec3& desired_force) {
  json tensions = json::array();
  for (Eigen::Index i = 0; i < result.tensions.size(); ++i) {
    tensions.push_back({{"id", layout.anchors()[static_cast<std::size_t>(i)].id},
                        {"tension", result.tensions(i)}});
  }
  const json doc = {{"status", std::string(to_string(result.status))},
                    {"desired_force", from_vec3(desired_force)},
                    {"rendered_force", from_vec3(result.rendered_force)},
                    {"force_residual", result.force_residual},
                    {"iterations", result.iterations},
                    {"tensions", std::move(tensions)}};
  return doc.dump(2) + "\n";
}

std::string validation_to_csv(const ValidationReport& report) {
  std::string out(kValidationCsvHeader);
  out += "\r\n";
  for (const auto& r : report.records) {
    for (double v : {r.commanded.x(), r.commanded.y(), r.commanded.z(), r.measured.x(),
                     r.measured.y(), r.measured.z(), r.angle_error, r.magnitude_error}) {
      out += format_double(v);
      out += ',';
    }
    out += r.feasible ? "true" : "false";
    out += "\r\n";
  }
  return out;
}

std::string validation_summary_to_json(const ValidationReport& report, const RunConfig& config) {
  const auto& a = report.aggregates;
  json doc;
  doc["aggregates"] = {{"sample_count", report.records.size()},
                       {"mean_angle_error_deg", a.mean_angle_error},
                       {"max_angle_error_deg", a.max_angle_error},
                       {"mean_measured_magnitude_N", a.mean_measured_magnitude},
                       {"mean_magnitude_error_N", a.mean_magnitude_error},
                       {"fraction_within_45deg", a.fraction_within_45deg},
                       {"feasible_count", a.feasible_count},
                       {"mean_angle_error_feasible_deg", a.mean_angle_error_feasible},
                       {"mean_magnitude_error_feasible_N", a.mean_magnitude_error_feasible}};
  doc["frame_correction_rad"] = report.frame_correction;
  doc["hardware_reference"] = {
      {"mean_angle_error_deg", HardwareReference::mean_angle_error_deg},
      {"mean_measured_magnitude_N", HardwareReference::mean_measured_magnitude},
      {"mean_magnitude_error_N", HardwareReference::mean_magnitude_error},
      {"angle_threshold_deg", HardwareReference::perceptual_angle_threshold_deg}};
  doc["protocol"] = from_protocol(config.protocol);
  doc["plant"] = from_plant(config.plant);
  doc["solver"] = from_solver(config.solver);
  doc["layout"] = from_layout(config.layout);
  doc["layout"]["end_effector"] = from_vec3(config.end_effector);
  return doc.dump(2) + "\n";
}

}  // namespace cablerender
