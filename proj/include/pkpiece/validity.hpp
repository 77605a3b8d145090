#pragma once

#include <span>
#include <vector>

#include "pkpiece/geometry.hpp"
#include "pkpiece/physics.hpp"

namespace pkp {

/// Symmetric control bounds: |fx| <= fx, |fy| <= fy, |torque| <= torque.
struct ControlLimits {
  double fx = 5.0;
  double fy = 5.0;
  double torque = 0.1;
  bool operator==(const ControlLimits&) const = default;
};

/// Kinodynamic and interaction constraints checked on every propagated state.
struct ValidityConstraints {
  Rect workspace{0.0, 0.0, 1.0, 1.0};
  Rect table{0.0, 0.0, 1.0, 1.0};
  double robot_max_speed = 0.6;          ///< m/s
  double robot_max_angular_speed = 6.0;  ///< rad/s
  double object_max_speed = 0.5;         ///< m/s, peak over the propagation
  ControlLimits control;
  double displacement_threshold = 0.1;   ///< m, per motion
  bool forbid_target_contact = true;

  void validate() const;
  bool operator==(const ValidityConstraints&) const = default;
};

/// State validity: robot inside the workspace and under its speed limits, no
/// robot/fixed contact, no contact with the target, movable objects slower
/// than the threshold and still on the table. Movable/movable and
/// robot/movable contacts are allowed.
bool validity_check(const WorldState& world, const ValidityConstraints& constraints,
                    const PropagationTrace& trace);

/// Whole-motion validity: the trace limits plus the positional checks on
/// every recorded state, since later motions may branch from any of them.
bool validity_check(const Propagation& motion, const ValidityConstraints& constraints);

/// Per-object translation of the body center between two states.
std::vector<double> displacement_of_objects(const WorldState& before, const WorldState& after);

/// True iff every displacement is at most the threshold (inclusive).
bool interaction_evaluator(std::span<const double> displacements, double threshold);

/// Whether the control wrench lies inside the limits.
bool within_limits(const Wrench& wrench, const ControlLimits& limits);

}  // namespace pkp
