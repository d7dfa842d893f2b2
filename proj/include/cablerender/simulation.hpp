#pragma once

// Bench-test harness: commands a sphere of force vectors through the solver
// and a plant model, then scores rendered against commanded forces.

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "cablerender/geometry.hpp"
#include "cablerender/solver.hpp"

namespace cablerender {

struct ValidationProtocol {
  double sphere_radius = 1.5;  // N
  int sample_count = 182;
  double hold_duration = 1.0;  // s
  int samples_per_hold = 1000;  // sensor samples averaged per hold (1 kHz)

  void validate() const;
};

struct IdealPlant {};

/// Sensor noise, a fixed Z rotation between sensor and device frames, and a
/// constant tension offset on every cable.
struct NoisyPlant {
  double force_noise_std = 0.0;   // N
  double frame_rotation_z = 0.0;  // rad
  double tension_bias = 0.0;      // N
  std::uint64_t seed = 42;
};

using PlantModel = std::variant<IdealPlant, NoisyPlant>;

void validate(const PlantModel& plant);

struct SampleRecord {
  Vec3 commanded = Vec3::Zero();
  Vec3 measured = Vec3::Zero();
  double angle_error = 0.0;      // deg
  double magnitude_error = 0.0;  // N
  bool feasible = false;
};

struct ReportAggregates {
  double mean_angle_error = 0.0;
  double max_angle_error = 0.0;
  double mean_measured_magnitude = 0.0;
  double mean_magnitude_error = 0.0;
  double fraction_within_45deg = 0.0;
  std::size_t feasible_count = 0;
  // Same means restricted to wrench-feasible commands (0 when there are none).
  double mean_angle_error_feasible = 0.0;
  double mean_magnitude_error_feasible = 0.0;

  friend bool operator==(const ReportAggregates&, const ReportAggregates&) = default;
};

ReportAggregates compute_aggregates(const std::vector<SampleRecord>& records);

struct ValidationReport {
  std::vector<SampleRecord> records;
  ReportAggregates aggregates;
  /// Z rotation estimated from the basis-vector pass and applied to every
  /// measurement (rad). Zero for the ideal plant.
  double frame_correction = 0.0;
};

/// Bench figures measured on the physical rig. Reported for comparison only;
/// an ideal simulation is not expected to reproduce them.
struct HardwareReference {
  static constexpr double mean_angle_error_deg = 14.0;
  static constexpr double mean_measured_magnitude = 1.84;  // N
  static constexpr double mean_magnitude_error = 0.58;     // N
  static constexpr double perceptual_angle_threshold_deg = 45.0;
};

/// Fibonacci-lattice points on a sphere of the given radius. Deterministic.
std::vector<Vec3> sphere_samples(int n, double radius);

/// The 26 directions (i, j, k) ∈ {-1, 0, 1}³ \ {0}, normalized.
std::array<Vec3, 26> canonical_directions();

/// Angle between two vectors in degrees. Throws ZeroVector if either norm is
/// <= 1e-12.
double angle_error(const Vec3& a, const Vec3& b);

/// | |a| - |b| |
double magnitude_error(const Vec3& a, const Vec3& b);

/// Rotation about Z (rad) that best maps the measured basis onto the desired
/// one in the least-squares sense. Throws DegenerateInput when the XY parts
/// carry no usable signal.
double align_z_rotation(const std::array<Vec3, 3>& desired, const std::array<Vec3, 3>& measured);

Eigen::Matrix3d rotation_z(double angle);

struct BenchSetup {
  ModuleLayout layout;
  Vec3 end_effector;
};

/// Three modules on an equilateral triangle (circumradius 1 m, z = 0, centred
/// on the origin), a fourth 2 m above the end effector, end effector 0.3 m
/// above the triangle's plane.
BenchSetup default_bench_layout();

ValidationReport run_validation(const ModuleLayout& layout, const Vec3& ee,
                                const ValidationProtocol& protocol, const PlantModel& plant,
                                const SolverConfig& config = {});

/// Fraction of the 26 canonical directions, scaled to `magnitude`, that are
/// wrench-feasible at `point`. 0 when the point coincides with an anchor.
double feasible_direction_fraction(const ModuleLayout& layout, const Vec3& point,
                                   double magnitude = 0.1);

}  // namespace cablerender
