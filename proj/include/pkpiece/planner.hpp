#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkpiece/kpiece.hpp"
#include "pkpiece/motion_sampler.hpp"
#include "pkpiece/physics.hpp"
#include "pkpiece/uncertainty.hpp"
#include "pkpiece/validity.hpp"

namespace pkp {

enum class PlannerMode : std::uint8_t { probabilistic, baseline };

const char* to_string(PlannerMode mode);
std::optional<PlannerMode> parse_mode(const std::string& name);

/// Disc of robot positions, with an optional heading tolerance.
struct GoalRegion {
  Pose center;
  double radius = 0.05;
  std::optional<double> angle_tolerance;

  bool contains(const Pose& robot) const;
  bool operator==(const GoalRegion&) const = default;
};

struct PlannerParams {
  int k = 15;
  int particles = 10;
  double bias = 0.1;
  /// Probability of falling back to half-normal motion selection in a cell.
  double motion_random_probability = 0.1;
  double exterior_probability = 0.75;
  /// Projection cell side as a percentage of the longest workspace side.
  double cell_size_percent = 4.0;
  int mixture_components = 3;
  DurationBounds durations;
  double time_limit = 60.0;  ///< wall-clock seconds
  /// Iteration cap; 0 means unbounded. Lets runs terminate independently of
  /// machine speed.
  std::uint64_t max_iterations = 0;
  ScoreConfig score;

  bool operator==(const PlannerParams&) const = default;
};

struct Query {
  WorldState initial;
  BeliefSet initial_beliefs;
  GoalRegion goal;
  ValidityConstraints constraints;
  NoiseConfig noise;
  PhysicsConfig physics;
  PlannerParams params;
  PlannerMode mode = PlannerMode::probabilistic;
};

struct PlannerStats {
  std::uint64_t iterations = 0;
  std::uint64_t states = 0;  ///< motions in the tree, root included
  std::uint64_t cells = 0;
  std::uint64_t nominal_propagations = 0;
  std::uint64_t particle_propagations = 0;
  std::uint64_t uncertainty_updates = 0;
  std::uint64_t em_warnings = 0;
  double wall_time = 0.0;

  /// Everything except wall time, which is the only non-deterministic field.
  bool same_counts(const PlannerStats& o) const;
};

struct PlanStep {
  Control control;
  double belief = 1.0;
  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  double total_duration = 0.0;
};

struct PlanResult {
  bool solved = false;
  Plan plan;
  PlannerStats stats;
};

class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Root-first (control, duration) chain ending at `goal`, without the root.
/// A parent's duration is cut where its child branches off.
Plan extract_path(const MotionTree& tree, MotionId goal);

/// Probabilistic KPIECE (or the plain-KPIECE baseline) from the query's
/// initial world to its goal region. Throws std::invalid_argument when the
/// initial world is invalid; returns solved = false on timeout.
PlanResult plan(const Query& query, std::uint64_t seed);

/// Nominal replay of a plan from the query's initial world.
WorldState replay_nominal(const Query& query, const Plan& plan);

}  // namespace pkp
