#pragma once

// Hybrid motor-brake module policy. The motor renders tensions up to its
// steady-state limit; the passive one-way brake can only resist cable
// pay-out and takes over for stronger (collision) forces.

#include <string_view>

namespace cablerender {

struct ActuatorParams {
  double motor_max_force = 6.0;    // N, steady-state motor limit
  double brake_max_force = 186.0;  // N, brake holding force before slip
  double min_taut_force = 0.5;     // N
  double force_per_amp = 3.0;      // N/A (1.5 N at 0.5 A)

  void validate() const;
  double max_current() const { return motor_max_force / force_per_amp; }
};

enum class ActuatorMode { Motor, Brake };

std::string_view to_string(ActuatorMode mode) noexcept;

struct ActuatorCommand {
  ActuatorMode mode = ActuatorMode::Motor;
  double motor_current = 0.0;  // A, zero in Brake mode
  bool brake_engaged = false;
};

/// Throws InvalidTension for negative or non-finite demand.
ActuatorCommand command_for_tension(double desired_tension, bool cable_paying_out,
                                    const ActuatorParams& params = {});

}  // namespace cablerender
