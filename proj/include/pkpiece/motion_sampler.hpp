#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pkpiece/kpiece.hpp"
#include "pkpiece/physics.hpp"
#include "pkpiece/rng.hpp"
#include "pkpiece/uncertainty.hpp"
#include "pkpiece/validity.hpp"

namespace pkp {

struct DurationBounds {
  double min = 0.1;
  double max = 0.5;
  bool operator==(const DurationBounds&) const = default;
};

/// k controls sharing one start state picked from a tree motion.
struct CandidateSet {
  WorldState start;
  /// Physics step within the source motion at which `start` was recorded.
  std::int64_t start_step = 0;
  std::vector<Control> controls;
};

CandidateSet sample_candidates(const Motion& source, int k, const ControlLimits& limits,
                               const DurationBounds& durations, double dt, RngStream& rng);

/// Propagation counts, for instrumentation.
struct SamplerCounters {
  std::uint64_t nominal_propagations = 0;
  std::uint64_t particle_propagations = 0;
};

struct ParticleEvaluation {
  int particles = 0;
  int valid_state = 0;
  int valid_interaction = 0;
  double p_state = 0.0;
  double p_interaction = 0.0;
  double belief = 0.0;
  ParticleOutcomes outcomes;
};

/// Belief from counts: (valid_state / n) * (valid_interaction / n).
double compute_belief(int valid_state, int valid_interaction, int particles);

/// Runs `particles` noisy re-executions of a nominally valid candidate. Each
/// particle draws object poses from the beliefs, contact parameters and a
/// control disturbance from stream `rng.split(j)`.
ParticleEvaluation evaluate_particles(const WorldState& start, const Control& control, int particles,
                                      const BeliefSet& beliefs, const NoiseConfig& noise,
                                      const ValidityConstraints& constraints,
                                      const PhysicsConfig& physics, const RngStream& rng,
                                      SamplerCounters* counters = nullptr);

struct CandidateEvaluation {
  Control control;
  Propagation nominal;
  ParticleEvaluation particles;
  double belief = 1.0;
};

struct SamplerSettings {
  int k = 15;
  /// 0 evaluates nothing beyond the nominal propagation (belief 1).
  int particles = 10;
  double bias = 0.1;
  DurationBounds durations;
};

struct SampledMotion {
  WorldState start;
  std::int64_t start_step = 0;
  CandidateEvaluation evaluation;
  std::size_t candidate_index = 0;
  std::size_t valid_candidates = 0;
};

/// With probability 1 - bias the highest belief (uniform among exact ties),
/// otherwise a uniformly random index.
std::size_t choose_candidate(std::span<const double> beliefs, double bias, RngStream& rng);

/// Samples k candidates from `source`, discards the nominally invalid ones,
/// scores the rest by particle belief and returns the best one (or, with
/// probability `bias`, a uniformly random survivor). nullopt when no
/// candidate is nominally valid.
std::optional<SampledMotion> motion_sampler(const Motion& source, const SamplerSettings& settings,
                                            const ValidityConstraints& constraints,
                                            const BeliefSet& beliefs, const NoiseConfig& noise,
                                            const PhysicsConfig& physics, RngStream& rng,
                                            SamplerCounters* counters = nullptr);

}  // namespace pkp
