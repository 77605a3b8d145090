#include "pkpiece/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pkp {

const char* to_string(PlannerMode mode) {
  return mode == PlannerMode::probabilistic ? "probabilistic" : "baseline";
}

std::optional<PlannerMode> parse_mode(const std::string& name) {
  if (name == "probabilistic" || name == "pkpiece") return PlannerMode::probabilistic;
  if (name == "baseline" || name == "kpiece") return PlannerMode::baseline;
  return std::nullopt;
}

bool GoalRegion::contains(const Pose& robot) const {
  const double dx = robot.x - center.x;
  const double dy = robot.y - center.y;
  if (dx * dx + dy * dy > radius * radius) return false;
  if (angle_tolerance && std::abs(wrap_angle(robot.theta - center.theta)) > *angle_tolerance) return false;
  return true;
}

bool PlannerStats::same_counts(const PlannerStats& o) const {
  return iterations == o.iterations && states == o.states && cells == o.cells &&
         nominal_propagations == o.nominal_propagations &&
         particle_propagations == o.particle_propagations &&
         uncertainty_updates == o.uncertainty_updates && em_warnings == o.em_warnings;
}

Plan extract_path(const MotionTree& tree, MotionId goal) {
  if (goal >= tree.size()) throw StructuralError("extract_path: goal motion is not in the tree");
  std::vector<MotionId> chain;
  std::optional<MotionId> cur = goal;
  while (cur) {
    if (*cur >= tree.size()) throw StructuralError("extract_path: dangling parent link");
    if (chain.size() > tree.size()) throw StructuralError("extract_path: parent links form a cycle");
    chain.push_back(*cur);
    cur = tree[*cur].parent;
  }
  std::reverse(chain.begin(), chain.end());

  Plan plan;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Motion& m = tree[chain[i]];
    if (m.is_root()) continue;
    Control c = m.control;
    if (i + 1 < chain.size()) {
      const std::int64_t total = m.state_steps.back();
      const std::int64_t cut = tree[chain[i + 1]].branch_step;
      if (cut < total) c.duration = m.control.duration * static_cast<double>(cut) / static_cast<double>(total);
    }
    if (c.duration <= 0.0) continue;
    plan.steps.push_back({c, m.belief});
    plan.total_duration += c.duration;
  }
  return plan;
}

namespace {

PropagationTrace static_trace(const WorldState& world) {
  PropagationTrace t;
  t.robot_peak_speed = length(world.robot().velocity.linear());
  t.robot_peak_angular_speed = std::abs(world.robot().velocity.omega);
  for (const auto& o : world.objects()) t.object_peak_speed.push_back(length(o.velocity.linear()));
  for (const auto& c : find_contacts(world.bodies, 0.0)) {
    if (c.separation >= 0.0) continue;
    const Body& a = world.bodies[c.a];
    const Body& b = world.bodies[c.b];
    if (a.cls == BodyClass::target || b.cls == BodyClass::target) t.target_contacted = true;
    if ((a.cls == BodyClass::robot && b.is_fixed()) || (b.cls == BodyClass::robot && a.is_fixed()))
      t.robot_hit_fixed = true;
  }
  return t;
}

void validate_query(const Query& q) {
  validate_world(q.initial);
  q.constraints.validate();
  q.noise.validate();
  q.physics.validate();
  if (q.initial_beliefs.size() != q.initial.object_count())
    throw std::invalid_argument("plan: need one initial belief per object");
  const auto& p = q.params;
  if (!(p.time_limit > 0.0)) throw std::invalid_argument("plan: time limit must be positive");
  if (p.k < 1) throw std::invalid_argument("plan: k must be >= 1");
  if (p.particles < 0) throw std::invalid_argument("plan: particle count must be >= 0");
  if (p.mixture_components < 1) throw std::invalid_argument("plan: mixture component count must be >= 1");
  if (!(p.cell_size_percent > 0.0)) throw std::invalid_argument("plan: cell size must be positive");
  if (!(q.goal.radius > 0.0)) throw std::invalid_argument("plan: goal radius must be positive");
  if (!validity_check(q.initial, q.constraints, static_trace(q.initial)))
    throw std::invalid_argument("plan: initial world violates the validity constraints");
}

}  // namespace

PlanResult plan(const Query& query, std::uint64_t seed) {
  validate_query(query);
  const auto clock_start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  };
  const bool probabilistic = query.mode == PlannerMode::probabilistic;
  const PlannerParams& params = query.params;

  PlanResult result;
  PlannerStats& stats = result.stats;

  MotionTree tree;
  Motion root;
  root.start = query.initial;
  root.states = {query.initial};
  root.state_steps = {0};
  const MotionId root_id = tree.add(std::move(root));
  stats.states = 1;

  if (query.goal.contains(query.initial.robot().pose)) {
    result.solved = true;
    result.plan = extract_path(tree, root_id);
    stats.cells = 0;
    stats.wall_time = elapsed();
    return result;
  }

  const Rect& ws = query.constraints.workspace;
  Grid grid(params.cell_size_percent / 100.0 * std::max(ws.width(), ws.height()));
  grid.add_motion(tree, root_id, 1);

  SamplerSettings settings;
  settings.durations = params.durations;
  if (probabilistic) {
    settings.k = params.k;
    settings.particles = params.particles;
    settings.bias = params.bias;
  } else {
    settings.k = 1;
    settings.particles = 0;
    settings.bias = 0.0;
  }
  const double motion_random = probabilistic ? params.motion_random_probability : 1.0;

  BeliefSet beliefs = query.initial_beliefs;
  SamplerCounters counters;
  const RngStream master(seed);

  for (std::uint64_t iteration = 1;; ++iteration) {
    if (elapsed() >= params.time_limit) break;
    if (params.max_iterations != 0 && iteration > params.max_iterations) break;
    stats.iterations = iteration;
    RngStream rng = master.split(iteration);

    const double bias_factor = probabilistic ? static_cast<double>(grid.size()) : 0.0;
    const std::size_t cell = select_cell(grid, rng, bias_factor, params.exterior_probability);
    const MotionId source = select_motion_in_cell(grid.cell(cell), tree, motion_random, rng);
    auto sampled = motion_sampler(tree[source], settings, query.constraints, beliefs, query.noise,
                                  query.physics, rng, &counters);

    double coverage_gain = 0.0;
    double spent = 0.0;
    if (sampled) {
      CandidateEvaluation& ev = sampled->evaluation;
      Motion m;
      m.start = std::move(sampled->start);
      m.control = ev.control;
      m.belief = ev.belief;
      m.parent = source;
      m.branch_step = sampled->start_step;
      m.states = std::move(ev.nominal.waypoints);
      m.state_steps = std::move(ev.nominal.waypoint_steps);

      std::optional<std::size_t> reached;
      for (std::size_t i = 0; i < m.states.size(); ++i) {
        if (query.goal.contains(m.states[i].robot().pose)) {
          reached = i;
          break;
        }
      }
      if (reached) {
        m.states.resize(*reached + 1);
        m.state_steps.resize(*reached + 1);
        m.control.duration = static_cast<double>(m.state_steps.back()) * query.physics.dt;
      }
      const double duration = m.control.duration;
      const MotionId id = tree.add(std::move(m));
      stats.states = tree.size();
      if (reached) {
        result.solved = true;
        result.plan = extract_path(tree, id);
        break;
      }
      const auto added = grid.add_motion(tree, id, iteration);
      coverage_gain = added.created ? 1.0 : 0.0;
      spent = duration;

      if (probabilistic && settings.particles > 0) {
        RngStream em_rng = rng.split(0xE11);
        auto update = update_pose_uncertainty(beliefs, ev.particles.outcomes, params.mixture_components, em_rng);
        if (!update.refitted.empty()) ++stats.uncertainty_updates;
        stats.em_warnings += static_cast<std::uint64_t>(update.warnings);
        beliefs = std::move(update.beliefs);
      }
    }
    update_score(grid.cell(cell), coverage_gain, spent, params.score);
  }

  stats.cells = grid.size();
  stats.nominal_propagations = counters.nominal_propagations;
  stats.particle_propagations = counters.particle_propagations;
  stats.wall_time = elapsed();
  return result;
}

WorldState replay_nominal(const Query& query, const Plan& plan) {
  WorldState w = query.initial;
  for (const auto& step : plan.steps) w = propagate(w, step.control, query.noise.nominal, query.physics).final;
  return w;
}

}  // namespace pkp
