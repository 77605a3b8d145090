#include "pkpiece/physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace pkp {

const char* to_string(BodyClass c) {
  switch (c) {
    case BodyClass::robot: return "robot";
    case BodyClass::target: return "target";
    case BodyClass::movable: return "movable";
    case BodyClass::fixed: return "fixed";
  }
  return "unknown";
}

double bounding_radius(const Shape& shape) {
  if (const auto* d = std::get_if<Disk>(&shape)) return d->radius;
  const auto& b = std::get<Box>(shape);
  return std::hypot(b.half_x, b.half_y);
}

double inner_radius(const Shape& shape) {
  if (const auto* d = std::get_if<Disk>(&shape)) return d->radius;
  const auto& b = std::get<Box>(shape);
  return std::min(b.half_x, b.half_y);
}

double default_inertia(const Shape& shape, double mass) {
  if (const auto* d = std::get_if<Disk>(&shape)) return 0.5 * mass * d->radius * d->radius;
  const auto& b = std::get<Box>(shape);
  return mass * (b.half_x * b.half_x + b.half_y * b.half_y) / 3.0;
}

std::size_t WorldState::target_index() const {
  for (std::size_t i = 1; i < bodies.size(); ++i)
    if (bodies[i].cls == BodyClass::target) return i - 1;
  return object_count();
}

namespace {

bool finite(const Body& b) {
  return std::isfinite(b.pose.x) && std::isfinite(b.pose.y) && std::isfinite(b.pose.theta) &&
         std::isfinite(b.velocity.vx) && std::isfinite(b.velocity.vy) &&
         std::isfinite(b.velocity.omega);
}

void validate_bodies(std::span<const Body> bodies) {
  if (bodies.empty() || bodies.front().cls != BodyClass::robot)
    throw std::invalid_argument("world: first body must be the robot");
  for (const auto& b : bodies) {
    if (!finite(b)) throw std::invalid_argument("world: body " + std::to_string(b.id) + " has a non-finite state");
    if (inner_radius(b.shape) <= 0.0)
      throw std::invalid_argument("world: body " + std::to_string(b.id) + " has a degenerate shape");
    if (!b.is_fixed() && (!(b.mass > 0.0) || !(b.inertia > 0.0)))
      throw std::invalid_argument("world: body " + std::to_string(b.id) + " needs positive mass and inertia");
    if (b.support_friction < 0.0)
      throw std::invalid_argument("world: body " + std::to_string(b.id) + " has negative support friction");
  }
}

}  // namespace

void validate_world(const WorldState& world) {
  validate_bodies(world.bodies);
  int robots = 0;
  int targets = 0;
  for (const auto& b : world.bodies) {
    robots += b.cls == BodyClass::robot;
    targets += b.cls == BodyClass::target;
  }
  if (robots != 1) throw std::invalid_argument("world: expected exactly one robot");
  // An empty table has no target; otherwise exactly one object is the target.
  if (targets > 1 || (targets == 0 && world.object_count() > 0))
    throw std::invalid_argument("world: expected exactly one target object");
}

void ContactParams::validate() const {
  if (!(mu_robot >= 0.0 && mu_object >= 0.0 && mu_fixed >= 0.0))
    throw std::invalid_argument("contact params: friction coefficients must be >= 0");
  if (!(cfm >= 0.0)) throw std::invalid_argument("contact params: cfm must be >= 0");
  if (!(erp >= 0.0 && erp <= 1.0)) throw std::invalid_argument("contact params: erp must lie in [0, 1]");
}

void PhysicsConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("physics: dt must be positive");
  if (solver_iterations < 1) throw std::invalid_argument("physics: solver_iterations must be >= 1");
  if (!(gravity >= 0.0)) throw std::invalid_argument("physics: gravity must be >= 0");
  if (!(slop >= 0.0) || !(margin >= 0.0)) throw std::invalid_argument("physics: slop and margin must be >= 0");
  if (record_every < 1) throw std::invalid_argument("physics: record_every must be >= 1");
}

std::int64_t steps_for_duration(double duration, double dt) {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw std::invalid_argument("control duration must be positive");
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("control duration must be a positive multiple of the physics timestep");
  return static_cast<std::int64_t>(rounded);
}

PropagationError::PropagationError(std::int64_t step, const std::string& what)
    : std::runtime_error(what), step_(step) {}

// ---------------------------------------------------------------------------
// Narrow phase

namespace {

struct Polygon {
  std::array<Vec2, 4> v;
  std::array<Vec2, 4> n;  // outward normal of edge v[i] -> v[i+1]
};

Polygon world_box(const Body& body, const Box& box) {
  const Rotation rot(body.pose.theta);
  const Vec2 c = body.pose.position();
  Polygon p;
  const std::array<Vec2, 4> local{{{-box.half_x, -box.half_y},
                                   {box.half_x, -box.half_y},
                                   {box.half_x, box.half_y},
                                   {-box.half_x, box.half_y}}};
  const std::array<Vec2, 4> normals{{{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}}};
  for (int i = 0; i < 4; ++i) {
    p.v[i] = c + rot.apply(local[i]);
    p.n[i] = rot.apply(normals[i]);
  }
  return p;
}

void collide_disks(std::size_t ia, const Body& a, double ra, std::size_t ib, const Body& b, double rb,
                   double margin, std::vector<Contact>& out) {
  const Vec2 d = b.pose.position() - a.pose.position();
  const double dist2 = length_squared(d);
  const double reach = ra + rb + margin;
  if (dist2 > reach * reach) return;
  const double dist = std::sqrt(dist2);
  const Vec2 n = dist > 1e-12 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
  const double sep = dist - ra - rb;
  out.push_back({ia, ib, a.pose.position() + n * (ra + 0.5 * sep), n, sep});
}

// Normal points from the box towards the disk.
bool box_disk(const Body& boxb, const Box& box, const Body& disk, double r, double margin,
              Vec2& point, Vec2& normal, double& sep) {
  const Rotation rot(boxb.pose.theta);
  const Vec2 local = rot.apply_inverse(disk.pose.position() - boxb.pose.position());
  const Vec2 clamped{std::clamp(local.x, -box.half_x, box.half_x),
                     std::clamp(local.y, -box.half_y, box.half_y)};
  Vec2 n_local;
  Vec2 p_local;
  if (std::abs(local.x) <= box.half_x && std::abs(local.y) <= box.half_y) {
    const double dx = box.half_x - std::abs(local.x);
    const double dy = box.half_y - std::abs(local.y);
    if (dx <= dy) {
      n_local = {local.x >= 0.0 ? 1.0 : -1.0, 0.0};
      p_local = {n_local.x * box.half_x, local.y};
      sep = -dx - r;
    } else {
      n_local = {0.0, local.y >= 0.0 ? 1.0 : -1.0};
      p_local = {local.x, n_local.y * box.half_y};
      sep = -dy - r;
    }
  } else {
    const Vec2 diff = local - clamped;
    const double dist = length(diff);
    sep = dist - r;
    if (sep > margin) return false;
    n_local = diff * (1.0 / dist);
    p_local = clamped;
  }
  normal = rot.apply(n_local);
  point = boxb.pose.position() + rot.apply(p_local) + normal * (0.5 * sep);
  return true;
}

// Largest separation of `b` along the edge normals of `a`.
double max_separation(const Polygon& a, const Polygon& b, int& edge) {
  double best = -std::numeric_limits<double>::infinity();
  edge = 0;
  for (int i = 0; i < 4; ++i) {
    double smallest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) smallest = std::min(smallest, dot(a.n[i], b.v[j] - a.v[i]));
    if (smallest > best) {
      best = smallest;
      edge = i;
    }
  }
  return best;
}

struct ClipVertex {
  Vec2 v;
};

int clip_segment(std::array<ClipVertex, 2>& out, const std::array<ClipVertex, 2>& in, Vec2 normal,
                 double offset) {
  int count = 0;
  const double d0 = dot(normal, in[0].v) - offset;
  const double d1 = dot(normal, in[1].v) - offset;
  if (d0 <= 0.0) out[count++] = in[0];
  if (d1 <= 0.0) out[count++] = in[1];
  if (d0 * d1 < 0.0) {
    const double t = d0 / (d0 - d1);
    out[count++] = {in[0].v + (in[1].v - in[0].v) * t};
  }
  return count;
}

void collide_boxes(std::size_t ia, const Body& a, const Box& ba, std::size_t ib, const Body& b,
                   const Box& bb, double margin, std::vector<Contact>& out) {
  const Polygon pa = world_box(a, ba);
  const Polygon pb = world_box(b, bb);
  int edge_a = 0;
  int edge_b = 0;
  const double sep_a = max_separation(pa, pb, edge_a);
  if (sep_a > margin) return;
  const double sep_b = max_separation(pb, pa, edge_b);
  if (sep_b > margin) return;

  const Polygon* ref = &pa;
  const Polygon* inc = &pb;
  int ref_edge = edge_a;
  bool flip = false;
  if (sep_b > sep_a + 1e-6) {
    ref = &pb;
    inc = &pa;
    ref_edge = edge_b;
    flip = true;
  }
  const Vec2 ref_normal = ref->n[ref_edge];
  int inc_edge = 0;
  double min_dot = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const double d = dot(ref_normal, inc->n[i]);
    if (d < min_dot) {
      min_dot = d;
      inc_edge = i;
    }
  }
  const std::array<ClipVertex, 2> incident{{{inc->v[inc_edge]}, {inc->v[(inc_edge + 1) % 4]}}};
  const Vec2 v1 = ref->v[ref_edge];
  const Vec2 v2 = ref->v[(ref_edge + 1) % 4];
  Vec2 tangent = v2 - v1;
  tangent = tangent * (1.0 / length(tangent));
  const double front = dot(ref_normal, v1);
  const double side1 = -dot(tangent, v1);
  const double side2 = dot(tangent, v2);

  std::array<ClipVertex, 2> clip1{};
  std::array<ClipVertex, 2> clip2{};
  if (clip_segment(clip1, incident, -tangent, side1) < 2) return;
  if (clip_segment(clip2, clip1, tangent, side2) < 2) return;

  const Vec2 normal = flip ? -ref_normal : ref_normal;
  for (const auto& cv : clip2) {
    const double sep = dot(ref_normal, cv.v) - front;
    if (sep > margin) continue;
    const Vec2 point = cv.v - ref_normal * (0.5 * sep);
    out.push_back({ia, ib, point, normal, sep});
  }
}

void collide_pair(std::size_t ia, const Body& a, std::size_t ib, const Body& b, double margin,
                  std::vector<Contact>& out) {
  const Disk* da = std::get_if<Disk>(&a.shape);
  const Disk* db = std::get_if<Disk>(&b.shape);
  if (da && db) {
    collide_disks(ia, a, da->radius, ib, b, db->radius, margin, out);
    return;
  }
  Vec2 point;
  Vec2 normal;
  double sep = 0.0;
  if (da) {
    if (box_disk(b, std::get<Box>(b.shape), a, da->radius, margin, point, normal, sep))
      out.push_back({ia, ib, point, -normal, sep});
    return;
  }
  if (db) {
    if (box_disk(a, std::get<Box>(a.shape), b, db->radius, margin, point, normal, sep))
      out.push_back({ia, ib, point, normal, sep});
    return;
  }
  collide_boxes(ia, a, std::get<Box>(a.shape), ib, b, std::get<Box>(b.shape), margin, out);
}

}  // namespace

std::vector<Contact> find_contacts(std::span<const Body> bodies, double margin) {
  std::vector<Contact> contacts;
  thread_local std::vector<double> reach;
  reach.resize(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) reach[i] = bounding_radius(bodies[i].shape);
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      if (bodies[i].is_fixed() && bodies[j].is_fixed()) continue;
      const double r = reach[i] + reach[j] + margin;
      const Vec2 d = bodies[j].pose.position() - bodies[i].pose.position();
      if (length_squared(d) > r * r) continue;
      collide_pair(i, bodies[i], j, bodies[j], margin, contacts);
    }
  }
  return contacts;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

double pair_friction(const Body& a, const Body& b, const ContactParams& params) {
  if (a.is_fixed() || b.is_fixed()) return params.mu_fixed;
  if (a.cls == BodyClass::robot || b.cls == BodyClass::robot) return params.mu_robot;
  return params.mu_object;
}

void apply_impulse(Body& a, Body& b, Vec2 ra, Vec2 rb, Vec2 impulse) {
  const double ima = a.inverse_mass();
  const double imb = b.inverse_mass();
  const double iia = a.inverse_inertia();
  const double iib = b.inverse_inertia();
  a.velocity.vx -= ima * impulse.x;
  a.velocity.vy -= ima * impulse.y;
  a.velocity.omega -= iia * cross(ra, impulse);
  b.velocity.vx += imb * impulse.x;
  b.velocity.vy += imb * impulse.y;
  b.velocity.omega += iib * cross(rb, impulse);
}

Vec2 relative_velocity(const Body& a, const Body& b, Vec2 ra, Vec2 rb) {
  const Vec2 va = a.velocity.linear() + cross(a.velocity.omega, ra);
  const Vec2 vb = b.velocity.linear() + cross(b.velocity.omega, rb);
  return vb - va;
}

struct Row {
  Vec2 ra;
  Vec2 rb;
  Vec2 t;
  double k_normal = 0.0;
  double mass_tangent = 0.0;
  double mu = 0.0;
  double speculative = 0.0;
};

}  // namespace

std::vector<ContactImpulse> solve_contacts(std::span<Body> bodies, std::span<const Contact> contacts,
                                           const ContactParams& params, double dt,
                                           const PhysicsConfig& config) {
  std::vector<ContactImpulse> result(contacts.size());
  std::vector<Row> rows(contacts.size());
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    const Contact& ct = contacts[c];
    const Body& a = bodies[ct.a];
    const Body& b = bodies[ct.b];
    Row& r = rows[c];
    r.ra = ct.point - a.pose.position();
    r.rb = ct.point - b.pose.position();
    r.t = perp(ct.normal);
    const double rna = cross(r.ra, ct.normal);
    const double rnb = cross(r.rb, ct.normal);
    r.k_normal = a.inverse_mass() + b.inverse_mass() + a.inverse_inertia() * rna * rna +
                 b.inverse_inertia() * rnb * rnb;
    const double rta = cross(r.ra, r.t);
    const double rtb = cross(r.rb, r.t);
    const double kt = a.inverse_mass() + b.inverse_mass() + a.inverse_inertia() * rta * rta +
                      b.inverse_inertia() * rtb * rtb;
    r.mass_tangent = kt > 0.0 ? 1.0 / kt : 0.0;
    r.mu = pair_friction(a, b, params);
    r.speculative = std::max(ct.separation, 0.0) / dt;
    result[c].contact = ct;
  }

  for (int it = 0; it < config.solver_iterations; ++it) {
    for (std::size_t c = 0; c < contacts.size(); ++c) {
      const Row& r = rows[c];
      if (r.k_normal <= 0.0) continue;
      Body& a = bodies[contacts[c].a];
      Body& b = bodies[contacts[c].b];
      ContactImpulse& acc = result[c];
      const Vec2 n = contacts[c].normal;

      // Friction, bounded by the current normal impulse.
      {
        const double vt = dot(relative_velocity(a, b, r.ra, r.rb), r.t);
        const double limit = r.mu * acc.normal_impulse;
        const double next = std::clamp(acc.tangent_impulse - r.mass_tangent * vt, -limit, limit);
        const double delta = next - acc.tangent_impulse;
        acc.tangent_impulse = next;
        apply_impulse(a, b, r.ra, r.rb, r.t * delta);
      }
      // Normal, softened by cfm on the diagonal: (K + cfm*K) dl = -(vn + cfm*K*l).
      {
        const double vn = dot(relative_velocity(a, b, r.ra, r.rb), n);
        const double gamma = params.cfm * r.k_normal;
        const double step =
            -(vn + r.speculative + gamma * acc.normal_impulse) / (r.k_normal + gamma);
        const double next = std::max(acc.normal_impulse + step, 0.0);
        const double delta = next - acc.normal_impulse;
        acc.normal_impulse = next;
        apply_impulse(a, b, r.ra, r.rb, n * delta);
      }
    }
  }
  return result;
}

std::vector<ContactImpulse> solve_contacts(std::span<Body> bodies, const ContactParams& params,
                                           double dt, const PhysicsConfig& config) {
  const auto contacts = find_contacts(bodies, config.margin);
  return solve_contacts(bodies, contacts, params, dt, config);
}

double kinetic_energy(std::span<const Body> bodies) {
  double e = 0.0;
  for (const auto& b : bodies) {
    if (b.is_fixed()) continue;
    e += 0.5 * b.mass * length_squared(b.velocity.linear()) +
         0.5 * b.inertia * b.velocity.omega * b.velocity.omega;
  }
  return e;
}

Vec2 linear_momentum(std::span<const Body> bodies) {
  Vec2 p;
  for (const auto& b : bodies)
    if (!b.is_fixed()) p += b.velocity.linear() * b.mass;
  return p;
}

// ---------------------------------------------------------------------------
// Integrator

namespace {

void apply_table_friction(Body& b, double gravity, double dt) {
  if (b.is_fixed() || b.support_friction <= 0.0) return;
  const double dv = b.support_friction * gravity * dt;
  const double speed = length(b.velocity.linear());
  if (speed <= dv) {
    b.velocity.vx = 0.0;
    b.velocity.vy = 0.0;
  } else {
    const double scale = 1.0 - dv / speed;
    b.velocity.vx *= scale;
    b.velocity.vy *= scale;
  }
  // Uniform pressure under the footprint: torque arm 2/3 of the gyration-equivalent radius.
  const double arm = (2.0 / 3.0) * std::sqrt(2.0 * b.inertia / b.mass);
  const double dw = b.support_friction * gravity * b.mass * arm / b.inertia * dt;
  if (std::abs(b.velocity.omega) <= dw)
    b.velocity.omega = 0.0;
  else
    b.velocity.omega -= std::copysign(dw, b.velocity.omega);
}

void correct_positions(std::span<Body> bodies, std::span<const Contact> contacts, double erp,
                       double slop) {
  if (erp <= 0.0) return;
  for (const auto& c : contacts) {
    const double depth = -c.separation - slop;
    if (depth <= 0.0) continue;
    Body& a = bodies[c.a];
    Body& b = bodies[c.b];
    const double ima = a.inverse_mass();
    const double imb = b.inverse_mass();
    const double sum = ima + imb;
    if (sum <= 0.0) continue;
    const Vec2 shift = c.normal * (erp * depth / sum);
    a.pose.x -= shift.x * ima;
    a.pose.y -= shift.y * ima;
    b.pose.x += shift.x * imb;
    b.pose.y += shift.y * imb;
  }
}

bool touching(const ContactImpulse& ci) {
  return ci.normal_impulse > 0.0 || ci.contact.separation < 0.0;
}

Propagation run(const WorldState& world, const Wrench& wrench, double duration,
                const ContactParams& params, const PhysicsConfig& config) {
  validate_bodies(world.bodies);
  params.validate();
  config.validate();
  if (!std::isfinite(wrench.fx) || !std::isfinite(wrench.fy) || !std::isfinite(wrench.torque))
    throw std::invalid_argument("control wrench must be finite");
  const std::int64_t steps = steps_for_duration(duration, config.dt);

  Propagation out;
  out.final = world;
  auto& trace = out.trace;
  trace.object_peak_speed.assign(world.object_count(), 0.0);
  trace.steps = steps;
  out.waypoints.reserve(static_cast<std::size_t>(steps / config.record_every + 1));

  WorldState& w = out.final;
  std::span<Body> bodies(w.bodies);
  const double dt = config.dt;
  const double t0 = world.time;

  for (std::int64_t step = 1; step <= steps; ++step) {
    Body& robot = bodies.front();
    robot.velocity.vx += dt * wrench.fx / robot.mass;
    robot.velocity.vy += dt * wrench.fy / robot.mass;
    robot.velocity.omega += dt * wrench.torque / robot.inertia;
    for (auto& b : bodies) apply_table_friction(b, config.gravity, dt);

    const auto contacts = find_contacts(bodies, config.margin);
    if (!contacts.empty()) {
      correct_positions(bodies, contacts, params.erp, config.slop);
      const auto impulses = solve_contacts(bodies, contacts, params, dt, config);
      for (const auto& ci : impulses) {
        if (!touching(ci)) continue;
        const Body& a = bodies[ci.contact.a];
        const Body& b = bodies[ci.contact.b];
        if (a.cls == BodyClass::target || b.cls == BodyClass::target) trace.target_contacted = true;
        if ((a.cls == BodyClass::robot && b.is_fixed()) || (b.cls == BodyClass::robot && a.is_fixed()))
          trace.robot_hit_fixed = true;
      }
    }

    for (std::size_t i = 0; i < bodies.size(); ++i) {
      Body& b = bodies[i];
      if (b.is_fixed()) continue;
      b.pose.x += dt * b.velocity.vx;
      b.pose.y += dt * b.velocity.vy;
      b.pose.theta = wrap_angle(b.pose.theta + dt * b.velocity.omega);
      if (!finite(b)) {
        std::ostringstream msg;
        msg << "propagation diverged at step " << step << " (body " << b.id << ")";
        throw PropagationError(step, msg.str());
      }
      const double speed = length(b.velocity.linear());
      if (i == 0) {
        trace.robot_peak_speed = std::max(trace.robot_peak_speed, speed);
        trace.robot_peak_angular_speed =
            std::max(trace.robot_peak_angular_speed, std::abs(b.velocity.omega));
      } else {
        trace.object_peak_speed[i - 1] = std::max(trace.object_peak_speed[i - 1], speed);
      }
    }
    w.time = t0 + static_cast<double>(step) * dt;
    if (step % config.record_every == 0 || step == steps) {
      out.waypoints.push_back(w);
      out.waypoint_steps.push_back(step);
    }
  }
  return out;
}

}  // namespace

Propagation propagate(const WorldState& world, const Control& control, const ContactParams& params,
                      const PhysicsConfig& config) {
  return run(world, control.wrench, control.duration, params, config);
}

Propagation propagate_noisy(const WorldState& world, const Control& control,
                            const Disturbance& disturbance, const ContactParams& params,
                            const PhysicsConfig& config) {
  return run(world, control.wrench + disturbance.wrench, control.duration, params, config);
}

}  // namespace pkp
