#include "pkpiece/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pkp {

using Json = nlohmann::ordered_json;

namespace {

// Reads one JSON object, tracking the dotted path for error messages and
// rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const char* key, double def) { return has_mark(key) ? as_number(j_.at(key), key) : def; }
  double number(const char* key) {
    require(key);
    return as_number(j_.at(key), key);
  }

  std::int64_t integer(const char* key, std::int64_t def) {
    if (!has_mark(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t def) {
    if (!has_mark(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool def) {
    if (!has_mark(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& def) {
    if (!has_mark(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> numbers(const char* key, std::array<double, N> def) {
    if (!has_mark(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_array() || v.size() != N) fail(key, "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = as_number(v[i], key);
    return out;
  }

  template <std::size_t N>
  std::array<double, N> numbers(const char* key) {
    require(key);
    return numbers<N>(key, {});
  }

  Reader child(const char* key) {
    require(key);
    return Reader(j_.at(key), sub(key));
  }
  std::optional<Reader> optional_child(const char* key) {
    if (!has_mark(key)) return std::nullopt;
    return Reader(j_.at(key), sub(key));
  }
  const Json& raw(const char* key) {
    require(key);
    return j_.at(key);
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail(key.c_str(), "unknown field");
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    const std::string where = key[0] ? sub(key) : (path_.empty() ? std::string("<root>") : path_);
    throw ParseError("field '" + where + "': " + what);
  }

 private:
  bool has_mark(const char* key) {
    seen_.insert(key);
    return has(key);
  }
  void require(const char* key) {
    if (!has_mark(key)) fail(key, "missing required field");
  }
  double as_number(const Json& v, const char* key) const {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Rect read_rect(Reader r) {
  const auto lo = r.numbers<2>("min");
  const auto hi = r.numbers<2>("max");
  r.finish();
  return {lo[0], lo[1], hi[0], hi[1]};
}

Json write_rect(const Rect& rect) {
  Json j;
  j["min"] = {rect.min_x, rect.min_y};
  j["max"] = {rect.max_x, rect.max_y};
  return j;
}

Pose read_pose(Reader& r, const char* key) {
  const auto p = r.numbers<3>(key);
  return {p[0], p[1], p[2]};
}

Json write_pose(const Pose& p) { return Json::array({p.x, p.y, p.theta}); }

Shape read_shape(Reader r) {
  const std::string type = r.string("type", "");
  Shape shape;
  if (type == "disk") {
    shape = Disk{r.number("radius")};
  } else if (type == "box") {
    const auto h = r.numbers<2>("half_extents");
    shape = Box{h[0], h[1]};
  } else {
    r.fail("type", "expected \"disk\" or \"box\"");
  }
  r.finish();
  return shape;
}

Json write_shape(const Shape& shape) {
  Json j;
  if (const auto* d = std::get_if<Disk>(&shape)) {
    j["type"] = "disk";
    j["radius"] = d->radius;
  } else {
    const auto& b = std::get<Box>(shape);
    j["type"] = "box";
    j["half_extents"] = {b.half_x, b.half_y};
  }
  return j;
}

BodyClass read_class(Reader& r, const char* key) {
  const std::string name = r.string(key, "movable");
  if (name == "movable") return BodyClass::movable;
  if (name == "target") return BodyClass::target;
  if (name == "fixed") return BodyClass::fixed;
  r.fail(key, "expected \"movable\", \"target\" or \"fixed\"");
}

ObjectSpec read_object(Reader r, bool is_robot) {
  ObjectSpec o;
  o.id = r.string("id", is_robot ? "robot" : "");
  o.cls = is_robot ? BodyClass::robot : read_class(r, "class");
  o.shape = read_shape(r.child("shape"));
  o.pose = read_pose(r, "pose");
  o.mass = r.number("mass", is_robot ? 1.0 : 0.3);
  o.inertia = r.number("inertia", 0.0);
  if (o.inertia == 0.0 && o.mass > 0.0) o.inertia = default_inertia(o.shape, o.mass);
  o.support_friction = r.number("support_friction", 0.4);
  if (!is_robot) o.pose_variance = r.numbers<3>("pose_variance", {0.0, 0.0, 0.0});
  r.finish();
  return o;
}

Json write_object(const ObjectSpec& o, bool is_robot) {
  Json j;
  j["id"] = o.id;
  if (!is_robot) j["class"] = to_string(o.cls);
  j["shape"] = write_shape(o.shape);
  j["pose"] = write_pose(o.pose);
  j["mass"] = o.mass;
  j["inertia"] = o.inertia;
  j["support_friction"] = o.support_friction;
  if (!is_robot) j["pose_variance"] = o.pose_variance;
  return j;
}

Scenario from_json(const Json& root) {
  Reader r(root, "");
  Scenario s;
  s.schema_version = static_cast<int>(r.integer("schema_version", kScenarioSchemaVersion));
  s.name = r.string("name", s.name);
  if (r.has("workspace")) s.workspace = read_rect(r.child("workspace"));
  if (r.has("table")) s.table = read_rect(r.child("table"));
  s.robot = read_object(r.child("robot"), true);

  if (r.has("objects")) {
    const Json& arr = r.raw("objects");
    if (!arr.is_array()) r.fail("objects", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      s.objects.push_back(read_object(Reader(arr[i], "objects[" + std::to_string(i) + "]"), false));
  } else {
    r.has("objects");
  }
  if (auto c = r.optional_child("clutter")) {
    ClutterSpec cl;
    cl.count = static_cast<int>(c->integer("count", 0));
    cl.region = read_rect(c->child("region"));
    cl.radius = c->number("radius", cl.radius);
    cl.mass = c->number("mass", cl.mass);
    cl.support_friction = c->number("support_friction", cl.support_friction);
    cl.jitter = c->number("jitter", cl.jitter);
    cl.seed = c->unsigned_integer("seed", cl.seed);
    cl.pose_variance = c->numbers<3>("pose_variance", cl.pose_variance);
    c->finish();
    s.clutter = cl;
  }
  if (auto c = r.optional_child("controls")) {
    if (auto l = c->optional_child("limits")) {
      s.control_limits.fx = l->number("fx", s.control_limits.fx);
      s.control_limits.fy = l->number("fy", s.control_limits.fy);
      s.control_limits.torque = l->number("torque", s.control_limits.torque);
      l->finish();
    }
    if (auto d = c->optional_child("duration")) {
      s.planner.durations.min = d->number("min", s.planner.durations.min);
      s.planner.durations.max = d->number("max", s.planner.durations.max);
      d->finish();
    }
    c->finish();
  }
  if (auto n = r.optional_child("noise")) {
    s.control_variance = n->numbers<3>("control_variance", s.control_variance);
    if (auto c = n->optional_child("contact")) {
      s.contact.mu_robot = c->number("mu_robot", s.contact.mu_robot);
      s.contact.mu_object = c->number("mu_object", s.contact.mu_object);
      s.contact.mu_fixed = c->number("mu_fixed", s.contact.mu_fixed);
      s.contact.cfm = c->number("cfm", s.contact.cfm);
      s.contact.erp = c->number("erp", s.contact.erp);
      c->finish();
    }
    if (auto v = n->optional_child("contact_variance")) {
      s.contact_variance.mu = v->number("mu", 0.0);
      s.contact_variance.cfm = v->number("cfm", 0.0);
      s.contact_variance.erp = v->number("erp", 0.0);
      v->finish();
    }
    n->finish();
  }
  if (auto c = r.optional_child("constraints")) {
    s.robot_max_speed = c->number("robot_max_speed", s.robot_max_speed);
    s.robot_max_angular_speed = c->number("robot_max_angular_speed", s.robot_max_angular_speed);
    s.object_max_speed = c->number("object_max_speed", s.object_max_speed);
    s.displacement_threshold = c->number("displacement_threshold", s.displacement_threshold);
    s.forbid_target_contact = c->boolean("forbid_target_contact", s.forbid_target_contact);
    c->finish();
  }
  {
    Reader g = r.child("goal");
    s.goal.center = read_pose(g, "pose");
    s.goal.radius = g.number("radius", s.goal.radius);
    if (g.has("angle_tolerance")) s.goal.angle_tolerance = g.number("angle_tolerance");
    else g.number("angle_tolerance", 0.0);
    g.finish();
  }
  if (auto p = r.optional_child("planner")) {
    auto& pp = s.planner;
    pp.k = static_cast<int>(p->integer("k", pp.k));
    pp.particles = static_cast<int>(p->integer("particles", pp.particles));
    pp.bias = p->number("bias", pp.bias);
    pp.motion_random_probability = p->number("motion_random_probability", pp.motion_random_probability);
    pp.exterior_probability = p->number("exterior_probability", pp.exterior_probability);
    pp.cell_size_percent = p->number("cell_size_percent", pp.cell_size_percent);
    pp.mixture_components = static_cast<int>(p->integer("mixture_components", pp.mixture_components));
    pp.time_limit = p->number("time_limit", pp.time_limit);
    pp.max_iterations = p->unsigned_integer("max_iterations", pp.max_iterations);
    if (auto sc = p->optional_child("score")) {
      pp.score.penalty = sc->number("penalty", pp.score.penalty);
      pp.score.reward = sc->number("reward", pp.score.reward);
      pp.score.reference_time = sc->number("reference_time", pp.score.reference_time);
      pp.score.min_score = sc->number("min", pp.score.min_score);
      pp.score.max_score = sc->number("max", pp.score.max_score);
      sc->finish();
    }
    p->finish();
  }
  if (auto p = r.optional_child("physics")) {
    auto& ph = s.physics;
    ph.dt = p->number("dt", ph.dt);
    ph.solver_iterations = static_cast<int>(p->integer("solver_iterations", ph.solver_iterations));
    ph.gravity = p->number("gravity", ph.gravity);
    ph.slop = p->number("slop", ph.slop);
    ph.margin = p->number("margin", ph.margin);
    ph.record_every = static_cast<int>(p->integer("record_every", ph.record_every));
    p->finish();
  }
  if (auto p = r.optional_child("replay")) {
    s.replay_trials = static_cast<int>(p->integer("trials", s.replay_trials));
    p->finish();
  }
  r.finish();
  return s;
}

Json to_json(const Scenario& s) {
  Json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["workspace"] = write_rect(s.workspace);
  j["table"] = write_rect(s.table);
  j["robot"] = write_object(s.robot, true);
  j["objects"] = Json::array();
  for (const auto& o : s.objects) j["objects"].push_back(write_object(o, false));
  if (s.clutter) {
    const auto& c = *s.clutter;
    Json cj;
    cj["count"] = c.count;
    cj["region"] = write_rect(c.region);
    cj["radius"] = c.radius;
    cj["mass"] = c.mass;
    cj["support_friction"] = c.support_friction;
    cj["jitter"] = c.jitter;
    cj["seed"] = c.seed;
    cj["pose_variance"] = c.pose_variance;
    j["clutter"] = cj;
  } else {
    j["clutter"] = nullptr;
  }
  j["controls"]["limits"] = {{"fx", s.control_limits.fx}, {"fy", s.control_limits.fy}, {"torque", s.control_limits.torque}};
  j["controls"]["duration"] = {{"min", s.planner.durations.min}, {"max", s.planner.durations.max}};
  j["noise"]["control_variance"] = s.control_variance;
  j["noise"]["contact"] = {{"mu_robot", s.contact.mu_robot}, {"mu_object", s.contact.mu_object},
                           {"mu_fixed", s.contact.mu_fixed}, {"cfm", s.contact.cfm}, {"erp", s.contact.erp}};
  j["noise"]["contact_variance"] = {{"mu", s.contact_variance.mu}, {"cfm", s.contact_variance.cfm},
                                    {"erp", s.contact_variance.erp}};
  j["constraints"] = {{"robot_max_speed", s.robot_max_speed},
                      {"robot_max_angular_speed", s.robot_max_angular_speed},
                      {"object_max_speed", s.object_max_speed},
                      {"displacement_threshold", s.displacement_threshold},
                      {"forbid_target_contact", s.forbid_target_contact}};
  j["goal"]["pose"] = write_pose(s.goal.center);
  j["goal"]["radius"] = s.goal.radius;
  if (s.goal.angle_tolerance) j["goal"]["angle_tolerance"] = *s.goal.angle_tolerance;
  else j["goal"]["angle_tolerance"] = nullptr;
  const auto& p = s.planner;
  j["planner"] = {{"k", p.k},
                  {"particles", p.particles},
                  {"bias", p.bias},
                  {"motion_random_probability", p.motion_random_probability},
                  {"exterior_probability", p.exterior_probability},
                  {"cell_size_percent", p.cell_size_percent},
                  {"mixture_components", p.mixture_components},
                  {"time_limit", p.time_limit},
                  {"max_iterations", p.max_iterations}};
  j["planner"]["score"] = {{"penalty", p.score.penalty}, {"reward", p.score.reward},
                           {"reference_time", p.score.reference_time}, {"min", p.score.min_score},
                           {"max", p.score.max_score}};
  j["physics"] = {{"dt", s.physics.dt},
                  {"solver_iterations", s.physics.solver_iterations},
                  {"gravity", s.physics.gravity},
                  {"slop", s.physics.slop},
                  {"margin", s.physics.margin},
                  {"record_every", s.physics.record_every}};
  j["replay"] = {{"trials", s.replay_trials}};
  return j;
}

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

void check_shape(const ObjectSpec& o) {
  if (std::holds_alternative<Disk>(o.shape)) {
    if (!(std::get<Disk>(o.shape).radius > 0.0)) invalid("object '" + o.id + "': radius must be positive");
  } else {
    const auto& b = std::get<Box>(o.shape);
    if (!(b.half_x > 0.0 && b.half_y > 0.0)) invalid("object '" + o.id + "': half extents must be positive");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  Scenario s = from_json(root);
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string scenario_to_json(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file '" + path.string() + "'");
  out << scenario_to_json(scenario);
  if (!out) throw IoError("failed writing scenario file '" + path.string() + "'");
}

void validate_scenario(const Scenario& s) {
  if (s.schema_version != kScenarioSchemaVersion)
    invalid("schema_version " + std::to_string(s.schema_version) + " is not supported");
  if (s.name.empty() || s.name.find_first_of(",\"\r\n|") != std::string::npos)
    invalid("name must be non-empty and free of commas, quotes, '|' and line breaks");
  try {
    make_constraints(s).validate();
    make_noise(s).validate();
    s.physics.validate();
  } catch (const std::invalid_argument& e) {
    invalid(e.what());
  }
  check_shape(s.robot);
  if (!(s.robot.mass > 0.0 && s.robot.inertia > 0.0)) invalid("robot: mass and inertia must be positive");
  if (!s.workspace.contains(s.robot.pose.position())) invalid("robot: start pose lies outside the workspace");

  const auto& p = s.planner;
  if (p.k < 1) invalid("planner.k must be >= 1");
  if (p.particles < 0) invalid("planner.particles must be >= 0");
  if (!(p.bias >= 0.0 && p.bias <= 1.0)) invalid("planner.bias must lie in [0, 1]");
  if (!(p.motion_random_probability >= 0.0 && p.motion_random_probability <= 1.0))
    invalid("planner.motion_random_probability must lie in [0, 1]");
  if (!(p.exterior_probability >= 0.0 && p.exterior_probability <= 1.0))
    invalid("planner.exterior_probability must lie in [0, 1]");
  if (!(p.cell_size_percent > 0.0)) invalid("planner.cell_size_percent must be positive");
  if (p.mixture_components < 1) invalid("planner.mixture_components must be >= 1");
  if (!(p.time_limit > 0.0)) invalid("planner.time_limit must be positive");
  if (!(p.durations.min > 0.0 && p.durations.min <= p.durations.max))
    invalid("controls.duration must satisfy 0 < min <= max");
  if (std::floor(p.durations.max / s.physics.dt + 1e-9) < std::ceil(p.durations.min / s.physics.dt - 1e-9))
    invalid("controls.duration admits no multiple of physics.dt");
  if (!(s.goal.radius > 0.0)) invalid("goal.radius must be positive");
  if (s.replay_trials < 0) invalid("replay.trials must be >= 0");

  if (s.clutter) {
    const auto& c = *s.clutter;
    if (c.count < 0) invalid("clutter.count must be >= 0");
    if (!s.table.contains(c.region)) invalid("clutter.region must lie inside the table");
    if (!(c.radius > 0.0 && c.mass > 0.0)) invalid("clutter: radius and mass must be positive");
    if (!(c.jitter >= 0.0 && c.jitter < 1.0)) invalid("clutter.jitter must lie in [0, 1)");
    for (double v : c.pose_variance)
      if (!(v >= 0.0)) invalid("clutter.pose_variance entries must be >= 0");
  }

  const auto objects = all_objects(s);
  std::set<std::string> ids{s.robot.id};
  int targets = 0;
  for (const auto& o : objects) {
    if (o.id.empty()) invalid("every object needs a non-empty id");
    if (!ids.insert(o.id).second) invalid("duplicate object id '" + o.id + "'");
    check_shape(o);
    if (o.cls == BodyClass::target) ++targets;
    if (o.cls != BodyClass::fixed && !(o.mass > 0.0 && o.inertia > 0.0))
      invalid("object '" + o.id + "': mass and inertia must be positive");
    if (!(o.support_friction >= 0.0)) invalid("object '" + o.id + "': support_friction must be >= 0");
    for (double v : o.pose_variance)
      if (!(v >= 0.0)) invalid("object '" + o.id + "': pose_variance entries must be >= 0");
    if (o.cls == BodyClass::fixed) {
      if (!s.workspace.contains(o.pose.position())) invalid("object '" + o.id + "' lies outside the workspace");
    } else if (!s.table.contains(o.pose.position())) {
      invalid("object '" + o.id + "' lies outside the table");
    }
  }
  if (!objects.empty() && targets != 1) invalid("scenario needs exactly one target object");

  // The goal disc must stay clear of fixed obstacles.
  std::vector<Body> probe(2);
  probe[0].cls = BodyClass::robot;
  probe[0].shape = Disk{s.goal.radius};
  probe[0].pose = s.goal.center;
  for (const auto& o : objects) {
    if (o.cls != BodyClass::fixed) continue;
    probe[1].cls = BodyClass::fixed;
    probe[1].shape = o.shape;
    probe[1].pose = o.pose;
    for (const auto& c : find_contacts(probe, 0.0))
      if (c.separation < 0.0) invalid("goal region intersects fixed object '" + o.id + "'");
  }
}

std::vector<ObjectSpec> generate_clutter(const ClutterSpec& spec) {
  std::vector<ObjectSpec> out;
  if (spec.count <= 0) return out;
  const double w = spec.region.width();
  const double h = spec.region.height();
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(spec.count * w / std::max(h, 1e-9)))));
  const int rows = (spec.count + cols - 1) / cols;
  const double sx = w / cols;
  const double sy = h / rows;
  const double amplitude = spec.jitter * std::max(0.0, 0.5 * std::min(sx, sy) - spec.radius);
  RngStream rng(spec.seed);
  for (int i = 0; i < spec.count; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    ObjectSpec o;
    char name[32];
    std::snprintf(name, sizeof(name), "clutter_%02d", i);
    o.id = name;
    o.cls = BodyClass::movable;
    o.shape = Disk{spec.radius};
    o.pose.x = spec.region.min_x + (c + 0.5) * sx + amplitude * rng.uniform(-1.0, 1.0);
    o.pose.y = spec.region.min_y + (r + 0.5) * sy + amplitude * rng.uniform(-1.0, 1.0);
    o.mass = spec.mass;
    o.inertia = default_inertia(o.shape, o.mass);
    o.support_friction = spec.support_friction;
    o.pose_variance = spec.pose_variance;
    out.push_back(o);
  }
  return out;
}

std::vector<ObjectSpec> all_objects(const Scenario& scenario) {
  std::vector<ObjectSpec> out = scenario.objects;
  if (scenario.clutter) {
    auto extra = generate_clutter(*scenario.clutter);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

namespace {

Body to_body(const ObjectSpec& o, int id) {
  Body b;
  b.id = id;
  b.shape = o.shape;
  b.pose = o.pose;
  b.pose.theta = wrap_angle(b.pose.theta);
  b.mass = o.mass;
  b.inertia = o.inertia > 0.0 ? o.inertia : default_inertia(o.shape, o.mass);
  b.cls = o.cls;
  b.support_friction = o.support_friction;
  return b;
}

}  // namespace

WorldState make_world(const Scenario& scenario) {
  WorldState w;
  w.bodies.push_back(to_body(scenario.robot, 0));
  int id = 1;
  for (const auto& o : all_objects(scenario)) w.bodies.push_back(to_body(o, id++));
  return w;
}

BeliefSet make_beliefs(const Scenario& scenario) {
  BeliefSet beliefs;
  for (const auto& o : all_objects(scenario)) {
    GaussianBelief g;
    g.mean = to_vector(o.pose);
    if (o.cls == BodyClass::movable)
      g.covariance = Eigen::Vector3d(o.pose_variance[0], o.pose_variance[1], o.pose_variance[2]).asDiagonal();
    beliefs.emplace_back(g);
  }
  return beliefs;
}

NoiseConfig make_noise(const Scenario& scenario) {
  NoiseConfig n;
  const auto& v = scenario.control_variance;
  n.control_covariance = Eigen::Vector3d(v[0], v[1], v[2]).asDiagonal();
  n.contact_variance = scenario.contact_variance;
  n.nominal = scenario.contact;
  return n;
}

ValidityConstraints make_constraints(const Scenario& scenario) {
  ValidityConstraints c;
  c.workspace = scenario.workspace;
  c.table = scenario.table;
  c.robot_max_speed = scenario.robot_max_speed;
  c.robot_max_angular_speed = scenario.robot_max_angular_speed;
  c.object_max_speed = scenario.object_max_speed;
  c.control = scenario.control_limits;
  c.displacement_threshold = scenario.displacement_threshold;
  c.forbid_target_contact = scenario.forbid_target_contact;
  return c;
}

Query make_query(const Scenario& scenario, PlannerMode mode) {
  Query q;
  q.initial = make_world(scenario);
  q.initial_beliefs = make_beliefs(scenario);
  q.goal = scenario.goal;
  q.constraints = make_constraints(scenario);
  q.noise = make_noise(scenario);
  q.physics = scenario.physics;
  q.params = scenario.planner;
  q.mode = mode;
  return q;
}

Scenario apply_parameter(const Scenario& scenario, const std::string& name, double value) {
  Scenario s = scenario;
  const auto as_count = [&](double v) {
    if (v < 0.0 || v != std::floor(v)) throw ValidationError("parameter '" + name + "' needs a non-negative integer");
    return static_cast<int>(v);
  };
  if (name == "clutter") {
    if (!s.clutter) throw ValidationError("parameter 'clutter' needs a scenario with a clutter block");
    s.clutter->count = as_count(value);
  } else if (name == "particles") {
    s.planner.particles = as_count(value);
  } else if (name == "k") {
    s.planner.k = as_count(value);
  } else if (name == "cell_size") {
    s.planner.cell_size_percent = value;
  } else if (name == "bias") {
    s.planner.bias = value;
  } else if (name == "displacement_threshold") {
    s.displacement_threshold = value;
  } else if (name == "time_limit") {
    s.planner.time_limit = value;
  } else if (name == "max_iterations") {
    s.planner.max_iterations = static_cast<std::uint64_t>(as_count(value));
  } else {
    throw ValidationError("unknown sweep parameter '" + name + "'");
  }
  validate_scenario(s);
  return s;
}

}  // namespace pkp
