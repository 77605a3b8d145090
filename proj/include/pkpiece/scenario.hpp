#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkpiece/planner.hpp"

namespace pkp {

inline constexpr int kScenarioSchemaVersion = 1;

struct ObjectSpec {
  std::string id;
  BodyClass cls = BodyClass::movable;
  Shape shape = Disk{0.03};
  Pose pose;
  double mass = 0.3;
  double inertia = 0.0;  ///< 0 on input means "derive from shape"
  double support_friction = 0.4;
  std::array<double, 3> pose_variance{0.0, 0.0, 0.0};

  bool operator==(const ObjectSpec&) const = default;
};

/// Movable disks placed on a seeded, jittered grid inside `region`.
struct ClutterSpec {
  int count = 0;
  Rect region;
  double radius = 0.03;
  double mass = 0.3;
  double support_friction = 0.4;
  /// Jitter amplitude as a fraction of half the grid spacing, in [0, 1).
  double jitter = 0.5;
  std::uint64_t seed = 1;
  std::array<double, 3> pose_variance{0.0, 0.0, 0.0};

  bool operator==(const ClutterSpec&) const = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "scenario";
  Rect workspace{0.0, 0.0, 1.0, 1.0};
  Rect table{0.0, 0.0, 1.0, 1.0};
  ObjectSpec robot;
  std::vector<ObjectSpec> objects;
  std::optional<ClutterSpec> clutter;
  ControlLimits control_limits;
  std::array<double, 3> control_variance{0.0, 0.0, 0.0};
  ContactParams contact;
  ContactVariance contact_variance;
  double robot_max_speed = 0.6;
  double robot_max_angular_speed = 6.0;
  double object_max_speed = 0.5;
  double displacement_threshold = 0.1;
  bool forbid_target_contact = true;
  GoalRegion goal;
  PlannerParams planner;
  PhysicsConfig physics;
  int replay_trials = 100;

  bool operator==(const Scenario&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses scenario JSON text, fills every omitted optional field with its
/// default and validates the result.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON with every field materialized.
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Throws ValidationError naming the offending field or object.
void validate_scenario(const Scenario& scenario);

/// Objects produced by the clutter generator (empty when there is none).
std::vector<ObjectSpec> generate_clutter(const ClutterSpec& spec);

/// All objects: explicit ones first, then generated clutter.
std::vector<ObjectSpec> all_objects(const Scenario& scenario);

WorldState make_world(const Scenario& scenario);
BeliefSet make_beliefs(const Scenario& scenario);
NoiseConfig make_noise(const Scenario& scenario);
ValidityConstraints make_constraints(const Scenario& scenario);
Query make_query(const Scenario& scenario, PlannerMode mode);

/// Returns a copy with one parameter overridden. Recognized names: clutter,
/// particles, k, cell_size, bias, displacement_threshold, time_limit,
/// max_iterations.
Scenario apply_parameter(const Scenario& scenario, const std::string& name, double value);

}  // namespace pkp
