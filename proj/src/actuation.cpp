#include "cablerender/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cablerender/errors.hpp"

namespace cablerender {

void ActuatorParams::validate() const {
  if (!(0.0 < min_taut_force && min_taut_force < motor_max_force &&
        motor_max_force < brake_max_force && std::isfinite(brake_max_force))) {
    throw std::invalid_argument(
        "actuator params must satisfy 0 < min_taut_force < motor_max_force < brake_max_force");
  }
  if (!(force_per_amp > 0.0) || !std::isfinite(force_per_amp)) {
    throw std::invalid_argument("force_per_amp must be positive");
  }
}

std::string_view to_string(ActuatorMode mode) noexcept {
  return mode == ActuatorMode::Motor ? "Motor" : "Brake";
}

ActuatorCommand command_for_tension(double desired_tension, bool cable_paying_out,
                                    const ActuatorParams& params) {
  if (!std::isfinite(desired_tension) || desired_tension < 0.0) {
    throw InvalidTension("desired tension must be finite and nonnegative");
  }
  params.validate();
  if (desired_tension > params.motor_max_force && cable_paying_out) {
    return {ActuatorMode::Brake, 0.0, true};
  }
  // Above the motor limit while reeling in the brake cannot help: saturate.
  const double rendered =
      std::clamp(desired_tension, params.min_taut_force, params.motor_max_force);
  return {ActuatorMode::Motor, rendered / params.force_per_amp, false};
}

}  // namespace cablerender
