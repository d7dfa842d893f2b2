#include "cablerender/haptics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cablerender {
namespace {

constexpr double kUnitTol = 1e-9;

void require_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
  }
}

void require_unit(const Vec3& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument(std::string(what) + " must be a unit vector");
  }
}

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " must be finite");
}

struct Validator {
  void operator()(const Magnetic& m) const {
    require_finite(m.target, "magnetic target");
    require_nonneg(m.gain, "magnetic gain");
    require_nonneg(m.max_force, "magnetic max_force");
  }
  void operator()(const Spring& s) const {
    require_finite(s.surface_point, "spring surface_point");
    require_unit(s.normal, "spring normal");
    require_nonneg(s.stiffness, "spring stiffness");
  }
  void operator()(const Damper& d) const { require_nonneg(d.coefficient, "damper coefficient"); }
  void operator()(const Friction& f) const {
    require_nonneg(f.coefficient, "friction coefficient");
    require_nonneg(f.max_force, "friction max_force");
    require_unit(f.tangent_plane_normal, "friction tangent_plane_normal");
  }
  void operator()(const Vibration& v) const {
    require_nonneg(v.amplitude, "vibration amplitude");
    require_nonneg(v.frequency, "vibration frequency");
    require_nonneg(v.gate_speed, "vibration gate_speed");
    require_unit(v.direction, "vibration direction");
  }
  void operator()(const Composite& c) const {
    for (const auto& child : c.children) validate(child);
  }
};

struct Evaluator {
  const EndEffectorState& s;

  Vec3 operator()(const Magnetic& m) const {
    const Vec3 d = m.target - s.position;
    const double dist = d.norm();
    if (dist == 0.0) return Vec3::Zero();
    return std::min(m.gain * dist, m.max_force) * (d / dist);
  }
  Vec3 operator()(const Spring& sp) const {
    const double depth = -(s.position - sp.surface_point).dot(sp.normal);
    if (depth <= 0.0) return Vec3::Zero();
    return sp.stiffness * depth * sp.normal;
  }
  Vec3 operator()(const Damper& d) const { return -d.coefficient * s.velocity; }
  Vec3 operator()(const Friction& f) const {
    const Vec3& n = f.tangent_plane_normal;
    const Vec3 tangential = s.velocity - s.velocity.dot(n) * n;
    Vec3 force = -f.coefficient * tangential;
    const double mag = force.norm();
    if (mag > f.max_force) force *= f.max_force / mag;
    return force;
  }
  Vec3 operator()(const Vibration& v) const {
    if (v.gate_speed > 0.0 && s.velocity.norm() <= v.gate_speed) return Vec3::Zero();
    return v.amplitude * std::sin(2.0 * std::numbers::pi * v.frequency * s.time) * v.direction;
  }
  Vec3 operator()(const Composite& c) const {
    Vec3 sum = Vec3::Zero();
    for (const auto& child : c.children) sum += evaluate(child, s);
    return sum;
  }
};

}  // namespace

void validate(const MaterialModel& model) { std::visit(Validator{}, model.kind); }

Vec3 evaluate(const MaterialModel& model, const EndEffectorState& state) {
  return std::visit(Evaluator{state}, model.kind);
}

}  // namespace cablerender
