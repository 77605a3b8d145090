#include "pkpiece/motion_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pkp {

CandidateSet sample_candidates(const Motion& source, int k, const ControlLimits& limits,
                               const DurationBounds& durations, double dt, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("sample_candidates: k must be >= 1");
  if (source.states.empty()) throw std::invalid_argument("sample_candidates: source motion has no states");
  const auto min_steps = static_cast<std::int64_t>(std::max(1.0, std::ceil(durations.min / dt - 1e-9)));
  const auto max_steps = static_cast<std::int64_t>(std::floor(durations.max / dt + 1e-9));
  if (max_steps < min_steps) throw std::invalid_argument("sample_candidates: duration bounds admit no multiple of dt");

  CandidateSet set;
  const std::size_t pick = source.states.size() == 1 ? 0 : rng.index(source.states.size());
  set.start = source.states[pick];
  set.start_step = source.state_steps[pick];
  set.controls.reserve(static_cast<std::size_t>(k));
  const auto span = static_cast<std::uint64_t>(max_steps - min_steps + 1);
  for (int i = 0; i < k; ++i) {
    Control c;
    c.wrench.fx = rng.uniform(-limits.fx, limits.fx);
    c.wrench.fy = rng.uniform(-limits.fy, limits.fy);
    c.wrench.torque = rng.uniform(-limits.torque, limits.torque);
    c.duration = static_cast<double>(min_steps + static_cast<std::int64_t>(rng.index(span))) * dt;
    set.controls.push_back(c);
  }
  return set;
}

double compute_belief(int valid_state, int valid_interaction, int particles) {
  if (particles <= 0) throw std::invalid_argument("compute_belief: particle count must be positive");
  const double n = static_cast<double>(particles);
  return (static_cast<double>(valid_state) / n) * (static_cast<double>(valid_interaction) / n);
}

ParticleEvaluation evaluate_particles(const WorldState& start, const Control& control, int particles,
                                      const BeliefSet& beliefs, const NoiseConfig& noise,
                                      const ValidityConstraints& constraints,
                                      const PhysicsConfig& physics, const RngStream& rng,
                                      SamplerCounters* counters) {
  if (particles <= 0) throw std::invalid_argument("evaluate_particles: n_p must be positive");
  ParticleEvaluation eval;
  eval.particles = particles;
  const std::size_t objects = start.object_count();
  eval.outcomes.final_poses.assign(objects, {});
  eval.outcomes.max_displacement.assign(objects, 0.0);
  std::vector<double> movable_disp;
  movable_disp.reserve(objects);

  for (int j = 0; j < particles; ++j) {
    RngStream stream = rng.split(static_cast<std::uint64_t>(j));
    Propagation result;
    WorldState perturbed;
    try {
      perturbed = perturb_object_poses(start, beliefs, stream);
      const ContactParams params = sample_contact_params(noise, stream);
      const Disturbance eps = sample_control_disturbance(noise, stream);
      if (counters) ++counters->particle_propagations;
      result = propagate_noisy(perturbed, control, eps, params, physics);
    } catch (const SamplingError&) {
      continue;
    } catch (const PropagationError&) {
      continue;
    }
    if (validity_check(result, constraints)) ++eval.valid_state;

    const auto disp = displacement_of_objects(perturbed, result.final);
    movable_disp.clear();
    const auto final_objects = result.final.objects();
    for (std::size_t i = 0; i < objects; ++i) {
      if (final_objects[i].cls != BodyClass::movable) continue;
      movable_disp.push_back(disp[i]);
      eval.outcomes.final_poses[i].push_back(final_objects[i].pose);
      eval.outcomes.max_displacement[i] = std::max(eval.outcomes.max_displacement[i], disp[i]);
    }
    if (interaction_evaluator(movable_disp, constraints.displacement_threshold)) ++eval.valid_interaction;
  }
  eval.p_state = static_cast<double>(eval.valid_state) / particles;
  eval.p_interaction = static_cast<double>(eval.valid_interaction) / particles;
  eval.belief = compute_belief(eval.valid_state, eval.valid_interaction, particles);
  return eval;
}

std::size_t choose_candidate(std::span<const double> beliefs, double bias, RngStream& rng) {
  if (beliefs.empty()) throw std::invalid_argument("choose_candidate: no candidates");
  if (rng.uniform() > bias) {
    const double best = *std::max_element(beliefs.begin(), beliefs.end());
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < beliefs.size(); ++i)
      if (beliefs[i] == best) ties.push_back(i);
    return ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
  }
  return beliefs.size() == 1 ? 0 : rng.index(beliefs.size());
}

std::optional<SampledMotion> motion_sampler(const Motion& source, const SamplerSettings& settings,
                                            const ValidityConstraints& constraints,
                                            const BeliefSet& beliefs, const NoiseConfig& noise,
                                            const PhysicsConfig& physics, RngStream& rng,
                                            SamplerCounters* counters) {
  if (settings.particles < 0) throw std::invalid_argument("motion_sampler: particle count must be >= 0");
  CandidateSet set = sample_candidates(source, settings.k, constraints.control, settings.durations, physics.dt, rng);

  std::vector<CandidateEvaluation> evaluated;
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < set.controls.size(); ++i) {
    const Control& control = set.controls[i];
    if (counters) ++counters->nominal_propagations;
    Propagation nominal;
    try {
      nominal = propagate(set.start, control, noise.nominal, physics);
    } catch (const PropagationError&) {
      continue;
    }
    if (!validity_check(nominal, constraints)) continue;

    CandidateEvaluation ce;
    ce.control = control;
    ce.nominal = std::move(nominal);
    if (settings.particles > 0) {
      ce.particles = evaluate_particles(set.start, control, settings.particles, beliefs, noise, constraints,
                                        physics, rng.split(0x100000 + i), counters);
      ce.belief = ce.particles.belief;
    }
    evaluated.push_back(std::move(ce));
    indices.push_back(i);
  }
  if (evaluated.empty()) return std::nullopt;

  std::vector<double> beliefs_of;
  beliefs_of.reserve(evaluated.size());
  for (const auto& ce : evaluated) beliefs_of.push_back(ce.belief);
  const std::size_t chosen = choose_candidate(beliefs_of, settings.bias, rng);

  SampledMotion out;
  out.start = std::move(set.start);
  out.start_step = set.start_step;
  out.candidate_index = indices[chosen];
  out.valid_candidates = evaluated.size();
  out.evaluation = std::move(evaluated[chosen]);
  return out;
}

}  // namespace pkp
