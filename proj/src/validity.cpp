#include "pkpiece/validity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pkp {

namespace {

bool finite_rect(const Rect& r) {
  return std::isfinite(r.min_x) && std::isfinite(r.min_y) && std::isfinite(r.max_x) &&
         std::isfinite(r.max_y) && r.min_x <= r.max_x && r.min_y <= r.max_y;
}

}  // namespace

void ValidityConstraints::validate() const {
  if (!finite_rect(workspace)) throw std::invalid_argument("constraints: workspace bounds are not a finite rectangle");
  if (!finite_rect(table)) throw std::invalid_argument("constraints: table region is not a finite rectangle");
  if (!workspace.contains(table)) throw std::invalid_argument("constraints: table region must lie inside the workspace");
  for (double v : {robot_max_speed, robot_max_angular_speed, object_max_speed, displacement_threshold,
                   control.fx, control.fy, control.torque}) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("constraints: thresholds must be finite and >= 0");
  }
}

bool validity_check(const WorldState& world, const ValidityConstraints& constraints,
                    const PropagationTrace& trace) {
  const Body& robot = world.robot();
  if (!constraints.workspace.contains(robot.pose.position())) return false;
  if (trace.robot_peak_speed > constraints.robot_max_speed) return false;
  if (trace.robot_peak_angular_speed > constraints.robot_max_angular_speed) return false;
  if (trace.robot_hit_fixed) return false;
  if (constraints.forbid_target_contact && trace.target_contacted) return false;

  const auto objects = world.objects();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Body& obj = objects[i];
    if (obj.cls != BodyClass::movable) continue;
    if (i < trace.object_peak_speed.size() && trace.object_peak_speed[i] > constraints.object_max_speed)
      return false;
    if (!constraints.table.contains(obj.pose.position())) return false;
  }
  return true;
}

bool validity_check(const Propagation& motion, const ValidityConstraints& constraints) {
  if (!validity_check(motion.final, constraints, motion.trace)) return false;
  const PropagationTrace clean;
  for (const auto& state : motion.waypoints)
    if (!validity_check(state, constraints, clean)) return false;
  return true;
}

std::vector<double> displacement_of_objects(const WorldState& before, const WorldState& after) {
  if (before.object_count() != after.object_count())
    throw std::invalid_argument("displacement: worlds have different object counts");
  const auto a = before.objects();
  const auto b = after.objects();
  std::vector<double> disp(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) disp[i] = length(b[i].pose.position() - a[i].pose.position());
  return disp;
}

bool interaction_evaluator(std::span<const double> displacements, double threshold) {
  return std::all_of(displacements.begin(), displacements.end(),
                     [threshold](double d) { return d <= threshold; });
}

bool within_limits(const Wrench& wrench, const ControlLimits& limits) {
  return std::abs(wrench.fx) <= limits.fx && std::abs(wrench.fy) <= limits.fy &&
         std::abs(wrench.torque) <= limits.torque;
}

}  // namespace pkp
