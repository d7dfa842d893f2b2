#pragma once

// Virtual-material force models. Each model maps the end-effector state to
// the force the cable system should render there.

#include <variant>
#include <vector>

#include "cablerender/geometry.hpp"

namespace cablerender {

struct EndEffectorState {
  Vec3 position = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();  // m/s
  double time = 0.0;             // s
};

/// Capped linear attraction toward a point: min(gain·d, max_force) along the
/// direction to the target.
struct Magnetic {
  Vec3 target = Vec3::Zero();
  double gain = 0.0;       // N/m
  double max_force = 0.0;  // N
};

/// One-sided penalty spring against the plane through surface_point with
/// outward normal. Zero force on the outside.
struct Spring {
  Vec3 surface_point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double stiffness = 0.0;  // N/m
};

struct Damper {
  double coefficient = 0.0;  // N·s/m
};

/// Resistance to the velocity component lying in the plane with the given
/// normal, proportional to that component and capped at max_force.
struct Friction {
  double coefficient = 0.0;  // N·s/m
  double max_force = 0.0;    // N
  Vec3 tangent_plane_normal = Vec3::UnitZ();
};

/// amplitude·sin(2π·frequency·t) along direction. When gate_speed > 0 the
/// vibration is only active while |velocity| exceeds it (texture).
struct Vibration {
  double amplitude = 0.0;  // N
  double frequency = 0.0;  // Hz
  Vec3 direction = Vec3::UnitZ();
  double gate_speed = 0.0;  // m/s
};

struct MaterialModel;

struct Composite {
  std::vector<MaterialModel> children;
};

struct MaterialModel {
  using Kind = std::variant<Magnetic, Spring, Damper, Friction, Vibration, Composite>;
  Kind kind;

  MaterialModel() = default;
  template <typename T>
  MaterialModel(T primitive) : kind(std::move(primitive)) {}  // NOLINT(google-explicit-constructor)
};

/// Throws std::invalid_argument on negative gains/stiffness/coefficients/
/// amplitudes/frequencies, non-unit normals or directions, or non-finite values.
void validate(const MaterialModel& model);

/// `model` must pass validate(); it is not re-checked here.
Vec3 evaluate(const MaterialModel& model, const EndEffectorState& state);

}  // namespace cablerender
