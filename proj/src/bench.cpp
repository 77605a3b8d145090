#include "pkpiece/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pkp {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw ParseError("invalid " + what + " '" + text + "'");
  return value;
}

}  // namespace

std::string RunRecord::key() const {
  return scenario + "|" + std::to_string(seed) + "|" + to_string(mode) + "|" + sweep;
}

std::string format_record(const RunRecord& r) {
  for (const std::string* field : {&r.scenario, &r.sweep})
    if (field->find_first_of(",\n\r\"") != std::string::npos)
      throw std::invalid_argument("record field '" + *field + "' contains a CSV delimiter");
  std::string line = r.scenario;
  line += "," + std::to_string(r.seed);
  line += std::string(",") + to_string(r.mode);
  line += "," + r.sweep;
  line += r.success ? ",1" : ",0";
  line += "," + fixed(r.wall_time, 6);
  line += "," + std::to_string(r.states);
  line += "," + std::to_string(r.cells);
  line += "," + fixed(r.plan_length, 6);
  line += "," + fixed(r.replay_fraction, 6);
  return line;
}

RunRecord parse_record(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 10) throw ParseError("record row needs 10 fields: '" + line + "'");
  RunRecord r;
  r.scenario = f[0];
  r.seed = parse_number<std::uint64_t>(f[1], "seed");
  const auto mode = parse_mode(f[2]);
  if (!mode) throw ParseError("invalid mode '" + f[2] + "'");
  r.mode = *mode;
  r.sweep = f[3];
  if (f[4] != "0" && f[4] != "1") throw ParseError("invalid success flag '" + f[4] + "'");
  r.success = f[4] == "1";
  r.wall_time = parse_number<double>(f[5], "wall time");
  r.states = parse_number<std::uint64_t>(f[6], "state count");
  r.cells = parse_number<std::uint64_t>(f[7], "cell count");
  r.plan_length = parse_number<double>(f[8], "plan length");
  r.replay_fraction = parse_number<double>(f[9], "replay fraction");
  return r;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      if (line != kCsvHeader) throw ParseError(path.string() + ": unexpected CSV header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    out.push_back(parse_record(line));
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string format_value(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw ParseError("sweep must look like name=v1,v2,...: '" + text + "'");
  Sweep s;
  s.parameter = text.substr(0, eq);
  for (const auto& v : split(text.substr(eq + 1), ',')) s.values.push_back(parse_number<double>(v, "sweep value"));
  return s;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_number<std::uint64_t>(text.substr(0, dots), "seed");
    const auto hi = parse_number<std::uint64_t>(text.substr(dots + 2), "seed");
    if (hi < lo) throw ParseError("empty seed range '" + text + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& v : split(text, ',')) out.push_back(parse_number<std::uint64_t>(v, "seed"));
  return out;
}

ReplayResult replay_open_loop(const Scenario& scenario, const Plan& plan, int trials, std::uint64_t seed) {
  ReplayResult result;
  if (trials <= 0) {
    result.warnings.push_back("replay with no trials; success fraction reported as 0");
    return result;
  }
  const WorldState nominal = make_world(scenario);
  const BeliefSet beliefs = make_beliefs(scenario);
  const NoiseConfig noise = make_noise(scenario);
  const ValidityConstraints constraints = make_constraints(scenario);
  const RngStream base(seed);

  for (int t = 0; t < trials; ++t) {
    RngStream rng = base.split(static_cast<std::uint64_t>(t));
    bool ok = true;
    try {
      WorldState w = sample_initial_world(nominal, beliefs, rng);
      const ContactParams params = sample_contact_params(noise, rng);
      // Execution halts at the first recorded state inside the goal, the
      // same test the planner uses to accept a motion.
      bool reached = scenario.goal.contains(w.robot().pose);
      for (std::size_t i = 0; i < plan.steps.size() && !reached; ++i) {
        const Disturbance d = sample_control_disturbance(noise, rng);
        Propagation p = propagate_noisy(w, plan.steps[i].control, d, params, scenario.physics);
        if (!validity_check(p, constraints)) {
          ok = false;
          break;
        }
        for (const auto& s : p.waypoints) {
          if (scenario.goal.contains(s.robot().pose)) {
            reached = true;
            break;
          }
        }
        w = std::move(p.final);
      }
      ok = ok && reached;
    } catch (const SamplingError&) {
      ok = false;
    } catch (const PropagationError&) {
      ok = false;
    }
    if (ok) ++result.successes;
  }
  result.trials = trials;
  result.fraction = static_cast<double>(result.successes) / trials;
  return result;
}

RunRecord run_single(const Scenario& scenario, std::uint64_t seed, PlannerMode mode, const std::string& sweep_label,
                     int replay_trials) {
  RunRecord r;
  r.scenario = scenario.name;
  r.seed = seed;
  r.mode = mode;
  r.sweep = sweep_label;
  try {
    const PlanResult res = plan(make_query(scenario, mode), seed);
    r.success = res.solved;
    r.wall_time = res.stats.wall_time;
    r.states = res.stats.states;
    r.cells = res.stats.cells;
    if (res.solved) {
      r.plan_length = res.plan.total_duration;
      const std::uint64_t replay_seed = RngStream(seed).split(0x7e91a7).seed();
      r.replay_fraction = replay_open_loop(scenario, res.plan, replay_trials, replay_seed).fraction;
    }
  } catch (const std::exception& e) {
    std::cerr << "warning: run " << r.key() << " failed: " << e.what() << '\n';
    r.success = false;
  }
  return r;
}

CampaignResult run_experiment(const Scenario& scenario, const CampaignOptions& options) {
  CampaignResult result;
  const int trials = options.replay_trials >= 0 ? options.replay_trials : scenario.replay_trials;

  std::vector<std::pair<std::string, Scenario>> points;
  if (options.sweep) {
    for (double v : options.sweep->values)
      points.emplace_back(options.sweep->parameter + "=" + format_value(v),
                          apply_parameter(scenario, options.sweep->parameter, v));
  } else {
    points.emplace_back("none", scenario);
  }

  std::filesystem::path csv;
  std::vector<RunRecord> existing;
  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create '" + options.out_dir.string() + "': " + ec.message());
    csv = options.out_dir / "runs.csv";
    existing = read_records(csv);
  }
  std::set<std::string> done;
  for (const auto& r : existing) done.insert(r.key());

  std::ofstream out;
  if (!csv.empty()) {
    const bool fresh = !std::filesystem::exists(csv);
    out.open(csv, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot write '" + csv.string() + "'");
    if (fresh) out << kCsvHeader << '\n' << std::flush;
  }

  for (const auto& [label, point] : points) {
    for (const auto seed : options.seeds) {
      for (const auto mode : options.modes) {
        RunRecord probe;
        probe.scenario = point.name;
        probe.seed = seed;
        probe.mode = mode;
        probe.sweep = label;
        const auto it = std::find_if(existing.begin(), existing.end(),
                                     [&](const RunRecord& r) { return r.key() == probe.key(); });
        if (done.count(probe.key()) && it != existing.end()) {
          result.records.push_back(*it);
          ++result.resumed;
          continue;
        }
        RunRecord r = run_single(point, seed, mode, label, trials);
        ++result.planner_invocations;
        if (out.is_open()) out << format_record(r) << '\n' << std::flush;
        done.insert(r.key());
        if (options.on_record) options.on_record(r);
        result.records.push_back(std::move(r));
      }
    }
  }
  return result;
}

std::string plan_to_json(const PlanFile& file) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["scenario"] = file.scenario;
  j["seed"] = file.seed;
  j["mode"] = to_string(file.mode);
  j["solved"] = file.solved;
  j["total_duration"] = file.plan.total_duration;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : file.plan.steps) {
    j["steps"].push_back({{"fx", s.control.wrench.fx},
                          {"fy", s.control.wrench.fy},
                          {"torque", s.control.wrench.torque},
                          {"duration", s.control.duration},
                          {"belief", s.belief}});
  }
  const auto& st = file.stats;
  j["stats"] = {{"iterations", st.iterations},
                {"states", st.states},
                {"cells", st.cells},
                {"nominal_propagations", st.nominal_propagations},
                {"particle_propagations", st.particle_propagations},
                {"uncertainty_updates", st.uncertainty_updates},
                {"em_warnings", st.em_warnings},
                {"wall_time", st.wall_time}};
  return j.dump(2) + "\n";
}

PlanFile parse_plan(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("schema_version", 0) != 1) throw ParseError("plan file: unsupported schema_version");
    PlanFile f;
    f.scenario = j.at("scenario").get<std::string>();
    f.seed = j.at("seed").get<std::uint64_t>();
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw ParseError("plan file: unknown mode");
    f.mode = *mode;
    f.solved = j.at("solved").get<bool>();
    for (const auto& s : j.at("steps")) {
      PlanStep step;
      step.control.wrench = {s.at("fx").get<double>(), s.at("fy").get<double>(), s.at("torque").get<double>()};
      step.control.duration = s.at("duration").get<double>();
      step.belief = s.at("belief").get<double>();
      f.plan.steps.push_back(step);
      f.plan.total_duration += step.control.duration;
    }
    if (j.contains("stats")) {
      const auto& st = j.at("stats");
      f.stats.iterations = st.value("iterations", std::uint64_t{0});
      f.stats.states = st.value("states", std::uint64_t{0});
      f.stats.cells = st.value("cells", std::uint64_t{0});
      f.stats.nominal_propagations = st.value("nominal_propagations", std::uint64_t{0});
      f.stats.particle_propagations = st.value("particle_propagations", std::uint64_t{0});
      f.stats.uncertainty_updates = st.value("uncertainty_updates", std::uint64_t{0});
      f.stats.em_warnings = st.value("em_warnings", std::uint64_t{0});
      f.stats.wall_time = st.value("wall_time", 0.0);
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan file: ") + e.what());
  }
}

void save_plan(const PlanFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write plan file '" + path.string() + "'");
  out << plan_to_json(file);
  if (!out) throw IoError("failed writing plan file '" + path.string() + "'");
}

PlanFile load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace pkp
