#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pkpiece/geometry.hpp"

namespace pkp {

enum class BodyClass : std::uint8_t { robot, target, movable, fixed };

const char* to_string(BodyClass c);

struct Disk {
  double radius = 0.0;
  bool operator==(const Disk&) const = default;
};

struct Box {
  double half_x = 0.0;
  double half_y = 0.0;
  bool operator==(const Box&) const = default;
};

using Shape = std::variant<Disk, Box>;

/// Radius of the smallest circle around the body center enclosing the shape.
double bounding_radius(const Shape& shape);
/// Smallest "radius" of a shape: disk radius, or the smaller box half extent.
double inner_radius(const Shape& shape);
/// Polar moment of inertia of a uniform-density shape of the given mass.
double default_inertia(const Shape& shape, double mass);

struct Body {
  int id = 0;
  Shape shape = Disk{0.05};
  Pose pose;
  Twist velocity;
  double mass = 1.0;
  double inertia = 1.0;
  BodyClass cls = BodyClass::movable;
  double support_friction = 0.0;

  bool is_fixed() const { return cls == BodyClass::fixed; }
  double inverse_mass() const { return is_fixed() ? 0.0 : 1.0 / mass; }
  double inverse_inertia() const { return is_fixed() ? 0.0 : 1.0 / inertia; }
  bool operator==(const Body&) const = default;
};

/// World state: the robot body followed by every object. Object index `i`
/// (bodies[i + 1]) names the same physical object across propagation.
struct WorldState {
  std::vector<Body> bodies;
  double time = 0.0;

  Body& robot() { return bodies.front(); }
  const Body& robot() const { return bodies.front(); }
  std::span<Body> objects() { return std::span<Body>(bodies).subspan(1); }
  std::span<const Body> objects() const { return std::span<const Body>(bodies).subspan(1); }
  std::size_t object_count() const { return bodies.empty() ? 0 : bodies.size() - 1; }
  /// Object index of the target, or object_count() when absent.
  std::size_t target_index() const;

  bool operator==(const WorldState&) const = default;
};

/// Throws std::invalid_argument when the Body/WorldState invariants fail.
void validate_world(const WorldState& world);

/// Contact parameters fed to the solver: friction coefficients per material
/// pair, constraint softness (cfm) and positional error reduction (erp).
struct ContactParams {
  double mu_robot = 0.5;   ///< robot against movable/target objects
  double mu_object = 0.4;  ///< object against object
  double mu_fixed = 0.3;   ///< anything against a fixed obstacle
  double cfm = 0.0;
  double erp = 0.2;

  void validate() const;
  bool operator==(const ContactParams&) const = default;
};

/// Planar wrench (fx, fy, torque) in N and N*m.
struct Wrench {
  double fx = 0.0;
  double fy = 0.0;
  double torque = 0.0;

  Wrench operator+(const Wrench& o) const { return {fx + o.fx, fy + o.fy, torque + o.torque}; }
  bool operator==(const Wrench&) const = default;
};

struct Control {
  Wrench wrench;
  double duration = 0.0;
  bool operator==(const Control&) const = default;
};

struct Disturbance {
  Wrench wrench;
};

struct PhysicsConfig {
  double dt = 0.005;
  int solver_iterations = 10;
  double gravity = 9.81;
  /// Penetration tolerated before positional correction kicks in.
  double slop = 5e-4;
  /// Contacts are generated for pairs closer than this separation.
  double margin = 2e-3;
  /// A waypoint is recorded every this many steps (and at the final step).
  int record_every = 10;

  void validate() const;
  bool operator==(const PhysicsConfig&) const = default;
};

/// Number of fixed steps covered by a duration; throws if not a positive
/// integer multiple of dt (within 1e-9 relative).
std::int64_t steps_for_duration(double duration, double dt);

/// Contact/velocity summary of one propagation, consumed by the validity checker.
struct PropagationTrace {
  std::vector<double> object_peak_speed;  ///< per object, m/s
  double robot_peak_speed = 0.0;
  double robot_peak_angular_speed = 0.0;
  bool target_contacted = false;
  bool robot_hit_fixed = false;
  std::int64_t steps = 0;
};

struct Propagation {
  WorldState final;
  PropagationTrace trace;
  /// States recorded every `record_every` steps plus the final one. The
  /// start state is not included.
  std::vector<WorldState> waypoints;
  std::vector<std::int64_t> waypoint_steps;
};

class PropagationError : public std::runtime_error {
 public:
  PropagationError(std::int64_t step, const std::string& what);
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

/// Deterministic transition: integrates `control` for its whole duration.
Propagation propagate(const WorldState& world, const Control& control, const ContactParams& params,
                      const PhysicsConfig& config = {});

/// Stochastic transition: the disturbance wrench is added to the nominal
/// control for the whole duration.
Propagation propagate_noisy(const WorldState& world, const Control& control,
                            const Disturbance& disturbance, const ContactParams& params,
                            const PhysicsConfig& config = {});

struct Contact {
  std::size_t a = 0;  ///< body index
  std::size_t b = 0;  ///< body index
  Vec2 point;
  Vec2 normal;        ///< from a towards b
  double separation = 0.0;
};

struct ContactImpulse {
  Contact contact;
  double normal_impulse = 0.0;
  double tangent_impulse = 0.0;
};

/// Contact manifold for the current poses (disk/disk, disk/box, box/box).
std::vector<Contact> find_contacts(std::span<const Body> bodies, double margin);

/// Sequential-impulse velocity solve over the current contact manifold.
/// Updates body velocities in place and returns the accumulated impulses.
std::vector<ContactImpulse> solve_contacts(std::span<Body> bodies, const ContactParams& params,
                                           double dt, const PhysicsConfig& config = {});

/// Same, over a precomputed manifold.
std::vector<ContactImpulse> solve_contacts(std::span<Body> bodies,
                                           std::span<const Contact> contacts,
                                           const ContactParams& params, double dt,
                                           const PhysicsConfig& config = {});

double kinetic_energy(std::span<const Body> bodies);
Vec2 linear_momentum(std::span<const Body> bodies);

}  // namespace pkp
