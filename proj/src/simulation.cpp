#include "cablerender/simulation.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "cablerender/errors.hpp"

namespace cablerender {

void ValidationProtocol::validate() const {
  if (!(sphere_radius > 0.0) || !std::isfinite(sphere_radius)) {
    throw std::invalid_argument("sphere_radius must be positive");
  }
  if (sample_count < 1 || samples_per_hold < 1) {
    throw std::invalid_argument("sample counts must be >= 1");
  }
  if (!(hold_duration > 0.0) || !std::isfinite(hold_duration)) {
    throw std::invalid_argument("hold_duration must be positive");
  }
}

void validate(const PlantModel& plant) {
  if (const auto* noisy = std::get_if<NoisyPlant>(&plant)) {
    if (!std::isfinite(noisy->force_noise_std) || noisy->force_noise_std < 0.0 ||
        !std::isfinite(noisy->frame_rotation_z) || !std::isfinite(noisy->tension_bias)) {
      throw std::invalid_argument("noisy plant parameters must be finite with std >= 0");
    }
  }
}

std::vector<Vec3> sphere_samples(int n, double radius) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    const Vec3 unit(r * std::cos(phi), r * std::sin(phi), z);
    pts.push_back(radius * unit.normalized());
  }
  return pts;
}

std::array<Vec3, 26> canonical_directions() {
  std::array<Vec3, 26> dirs;
  std::size_t k = 0;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      for (int l = -1; l <= 1; ++l) {
        if (i == 0 && j == 0 && l == 0) continue;
        dirs[k++] = Vec3(i, j, l).normalized();
      }
    }
  }
  return dirs;
}

double angle_error(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 1e-12 || nb <= 1e-12) throw ZeroVector("angle undefined for a zero vector");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double magnitude_error(const Vec3& a, const Vec3& b) { return std::abs(a.norm() - b.norm()); }

Eigen::Matrix3d rotation_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

double align_z_rotation(const std::array<Vec3, 3>& desired, const std::array<Vec3, 3>& measured) {
  // Σ |Rz(θ)m - d|² is minimal where cos θ·Σ(m·d)xy + sin θ·Σ(m × d)z peaks.
  double sin_term = 0.0;
  double cos_term = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec3& d = desired[i];
    const Vec3& m = measured[i];
    if (!d.allFinite() || !m.allFinite()) throw DegenerateInput("basis vectors must be finite");
    sin_term += m.x() * d.y() - m.y() * d.x();
    cos_term += m.x() * d.x() + m.y() * d.y();
    scale += d.head<2>().norm() * m.head<2>().norm();
  }
  if (scale <= 1e-12 || std::hypot(sin_term, cos_term) <= 1e-12 * std::max(1.0, scale)) {
    throw DegenerateInput("basis vectors have no usable XY components");
  }
  return std::atan2(sin_term, cos_term);
}

BenchSetup default_bench_layout() {
  constexpr double kCircumradius = 1.0;
  constexpr double kEndEffectorHeight = 0.3;
  constexpr double kOverheadAboveEndEffector = 2.0;
  std::vector<ModuleAnchor> anchors;
  for (int k = 0; k < 3; ++k) {
    const double ang = std::numbers::pi / 2.0 + k * 2.0 * std::numbers::pi / 3.0;
    anchors.push_back({"m" + std::to_string(k + 1),
                       Vec3(kCircumradius * std::cos(ang), kCircumradius * std::sin(ang), 0.0),
                       std::nullopt});
  }
  const Vec3 ee(0.0, 0.0, kEndEffectorHeight);
  anchors.push_back({"m4", ee + Vec3(0.0, 0.0, kOverheadAboveEndEffector), std::nullopt});
  return {ModuleLayout(std::move(anchors), TensionBounds{}), ee};
}

ReportAggregates compute_aggregates(const std::vector<SampleRecord>& records) {
  ReportAggregates agg;
  if (records.empty()) return agg;
  double angle_sum = 0.0, mag_sum = 0.0, magerr_sum = 0.0;
  double angle_feas = 0.0, magerr_feas = 0.0;
  std::size_t within = 0;
  for (const auto& r : records) {
    angle_sum += r.angle_error;
    mag_sum += r.measured.norm();
    magerr_sum += r.magnitude_error;
    agg.max_angle_error = std::max(agg.max_angle_error, r.angle_error);
    if (r.angle_error <= HardwareReference::perceptual_angle_threshold_deg) ++within;
    if (r.feasible) {
      ++agg.feasible_count;
      angle_feas += r.angle_error;
      magerr_feas += r.magnitude_error;
    }
  }
  const double n = static_cast<double>(records.size());
  agg.mean_angle_error = angle_sum / n;
  agg.mean_measured_magnitude = mag_sum / n;
  agg.mean_magnitude_error = magerr_sum / n;
  agg.fraction_within_45deg = static_cast<double>(within) / n;
  if (agg.feasible_count > 0) {
    const double nf = static_cast<double>(agg.feasible_count);
    agg.mean_angle_error_feasible = angle_feas / nf;
    agg.mean_magnitude_error_feasible = magerr_feas / nf;
  }
  return agg;
}

namespace {

// Renders one commanded force and returns the hold-averaged sensor reading in
// the sensor frame, plus the solver outcome.
struct Measurement {
  Vec3 reading;
  SolveResult solve;
};

Measurement measure(const StructureMatrix& a, std::span<const TensionBounds> bounds,
                    const Vec3& command, const ValidationProtocol& protocol,
                    const PlantModel& plant, const SolverConfig& config, std::uint64_t stream) {
  Measurement out{Vec3::Zero(), solve(a, command, bounds, config)};
  const auto* noisy = std::get_if<NoisyPlant>(&plant);

  TensionVector applied = out.solve.tensions;
  if (noisy) applied.array() += noisy->tension_bias;
  Vec3 truth = a.apply(applied);
  if (noisy) truth = rotation_z(noisy->frame_rotation_z) * truth;

  // Ideal: averaging identical samples, kept so both plants share the path.
  std::mt19937_64 rng(noisy ? noisy->seed + stream : 0);
  std::normal_distribution<double> noise(0.0, noisy ? noisy->force_noise_std : 0.0);
  Vec3 sum = Vec3::Zero();
  for (int k = 0; k < protocol.samples_per_hold; ++k) {
    Vec3 sample = truth;
    if (noisy && noisy->force_noise_std > 0.0) {
      sample += Vec3(noise(rng), noise(rng), noise(rng));
    }
    sum += sample;
  }
  out.reading = sum / static_cast<double>(protocol.samples_per_hold);
  return out;
}

}  // namespace

ValidationReport run_validation(const ModuleLayout& layout, const Vec3& ee,
                                const ValidationProtocol& protocol, const PlantModel& plant,
                                const SolverConfig& config) {
  protocol.validate();
  validate(plant);
  config.validate();
  const StructureMatrix a = structure_matrix(layout, ee);
  const auto bounds = layout.cable_bounds();
  const auto commands = sphere_samples(protocol.sample_count, protocol.sphere_radius);
  const auto n = static_cast<std::uint64_t>(commands.size());

  ValidationReport report;

  // Frame alignment: render the three basis vectors, then find the Z rotation
  // that maps the readings back onto them. Only a noisy plant has an unknown
  // sensor frame.
  Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
  if (std::holds_alternative<NoisyPlant>(plant)) {
    std::array<Vec3, 3> desired, measured;
    for (std::size_t j = 0; j < 3; ++j) {
      desired[j] = protocol.sphere_radius * Vec3::Unit(static_cast<Eigen::Index>(j));
      measured[j] = measure(a, bounds, desired[j], protocol, plant, config, n + j).reading;
    }
    try {
      report.frame_correction = align_z_rotation(desired, measured);
      correction = rotation_z(report.frame_correction);
    } catch (const DegenerateInput&) {
      report.frame_correction = 0.0;
    }
  }

  report.records.reserve(commands.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    const Vec3& cmd = commands[i];
    const Measurement m = measure(a, bounds, cmd, protocol, plant, config, i);
    SampleRecord rec;
    rec.commanded = cmd;
    rec.measured = correction * m.reading;
    // Nothing rendered means no direction at all: score it as fully wrong.
    rec.angle_error = rec.measured.norm() <= 1e-12 ? 180.0 : angle_error(cmd, rec.measured);
    rec.magnitude_error = magnitude_error(rec.measured, cmd);
    rec.feasible = m.solve.force_residual <= kWrenchFeasibleResidual;
    report.records.push_back(rec);
  }
  report.aggregates = compute_aggregates(report.records);
  return report;
}

double feasible_direction_fraction(const ModuleLayout& layout, const Vec3& point,
                                   double magnitude) {
  for (const auto& anchor : layout.anchors()) {
    if ((anchor.position - point).norm() <= kEndEffectorDegenerateTol) return 0.0;
  }
  const StructureMatrix a = structure_matrix(layout, point);
  const auto bounds = layout.cable_bounds();
  int feasible = 0;
  for (const Vec3& d : canonical_directions()) {
    if (is_wrench_feasible(a, magnitude * d, bounds)) ++feasible;
  }
  return feasible / 26.0;
}

}  // namespace cablerender
