// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Optional arguments restrict the run to the listed
// criterion numbers.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pkpiece/bench.hpp"
#include "pkpiece/kpiece.hpp"
#include "pkpiece/motion_sampler.hpp"
#include "pkpiece/physics.hpp"
#include "pkpiece/uncertainty.hpp"

using namespace pkp;

namespace {

const std::filesystem::path kSource = PKP_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Scenario scene(const std::string& file) { return load_scenario(kSource / "scenarios" / file); }

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Body disk(int id, BodyClass cls, double x, double y, double r, double m, double mu = 0.0) {
  Body b;
  b.id = id;
  b.cls = cls;
  b.shape = Disk{r};
  b.pose = {x, y, 0.0};
  b.mass = m;
  b.inertia = default_inertia(b.shape, m);
  b.support_friction = mu;
  return b;
}

// Plans for the 10-object scene are shared by the trend criteria.
struct ClutterRuns {
  std::vector<RunRecord> baseline, probabilistic;
};

ClutterRuns& clutter_runs() {
  static ClutterRuns runs = [] {
    ClutterRuns r;
    CampaignOptions opts;
    for (std::uint64_t s = 1; s <= 30; ++s) opts.seeds.push_back(s);
    opts.replay_trials = 100;
    for (const auto& rec : run_experiment(scene("clutter10.json"), opts).records)
      (rec.mode == PlannerMode::baseline ? r.baseline : r.probabilistic).push_back(rec);
    return r;
  }();
  return runs;
}

Outcome determinism() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  int pairs = 0;
  for (const char* file : {"minimal.json", "empty_table.json", "two_corridors.json", "boxes.json", "clutter10.json"}) {
    auto s = scene(file);
    // An iteration cap keeps the stopping point independent of machine speed.
    s.planner.max_iterations = 300;
    s.planner.time_limit = 600.0;
    const auto q = make_query(s, PlannerMode::probabilistic);
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto a = plan(q, seed);
      const auto b = plan(q, seed);
      const bool same = a.solved == b.solved && a.stats.same_counts(b.stats) && a.plan.steps == b.plan.steps &&
                        a.plan.total_duration == b.plan.total_duration;
      out.require(same, s.name + " seed " + std::to_string(seed) + " differs");
      ++pairs;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < 300.0, "runtime over 5 min");
  out.note(std::to_string(pairs) + " pairs identical, " + fmt("%.1f s", secs));
  return out;
}

Outcome physics_oracles() {
  Outcome out;
  ContactParams frictionless;
  frictionless.mu_robot = frictionless.mu_object = frictionless.mu_fixed = 0.0;
  frictionless.erp = 0.0;

  {  // Head-on collision of equal disks on a frictionless table.
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0), disk(1, BodyClass::movable, 0.2, 0.0, 0.05, 1.0)};
    w.bodies[0].velocity = {1.0, 0.0, 0.0};
    const Vec2 p0 = linear_momentum(w.bodies);
    double worst = 0.0;
    PhysicsConfig cfg;
    cfg.record_every = 1;
    const auto prop = propagate(w, {{}, 0.5}, frictionless, cfg);
    for (const auto& s : prop.waypoints) worst = std::max(worst, length(linear_momentum(s.bodies) - p0));
    out.require(worst <= 1e-6, "momentum drift " + fmt("%.2e", worst));
    out.note("momentum drift " + fmt("%.1e", worst));
  }
  {  // Sliding disk decelerates at mu * g.
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0, 0.5)};
    w.bodies[0].velocity = {1.0, 0.0, 0.0};
    const auto prop = propagate(w, {{}, 0.1}, ContactParams{});
    const double decel = (1.0 - prop.final.robot().velocity.vx) / 0.1;
    const double rel = std::abs(decel - 0.5 * 9.81) / (0.5 * 9.81);
    out.require(rel <= 0.02, "friction deceleration error " + fmt("%.3f", rel));
    out.note("friction error " + fmt("%.2f%%", 100 * rel));
  }
  {  // Touching bodies at rest stay put.
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0, 0.4), disk(1, BodyClass::movable, 0.1, 0.0, 0.05, 0.5, 0.4),
                disk(2, BodyClass::movable, 0.05, 0.0866, 0.05, 0.5, 0.4)};
    const auto prop = propagate(w, {{}, 1000 * 0.005}, ContactParams{});
    double drift = 0.0;
    for (std::size_t i = 0; i < w.bodies.size(); ++i)
      drift = std::max(drift, length(prop.final.bodies[i].pose.position() - w.bodies[i].pose.position()));
    out.require(drift < 1e-6, "rest drift " + fmt("%.2e", drift));
    out.note("rest drift " + fmt("%.1e", drift));
  }
  {  // Kinetic energy never grows without control.
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0, 0.1), disk(1, BodyClass::movable, 0.15, 0.02, 0.05, 0.4, 0.1),
                disk(2, BodyClass::movable, 0.3, -0.03, 0.05, 0.4, 0.1)};
    w.bodies[0].velocity = {1.2, 0.1, 3.0};
    PhysicsConfig cfg;
    cfg.record_every = 1;
    const auto prop = propagate(w, {{}, 1.0}, ContactParams{}, cfg);
    double prev = kinetic_energy(w.bodies);
    bool monotone = true;
    for (const auto& s : prop.waypoints) {
      const double e = kinetic_energy(s.bodies);
      monotone = monotone && e <= prev + 1e-12;
      prev = e;
    }
    out.require(monotone, "energy increased under zero control");
  }
  return out;
}

Outcome em_recovery() {
  Outcome out;
  int recovered = 0;
  bool monotone = true;
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    RngStream data(1000 + trial), seeding(5000 + trial);
    std::vector<Pose> pts;
    const Eigen::Matrix3d cov = Eigen::Vector3d(1.0, 0.8, 0.1).asDiagonal();
    for (int i = 0; i < 2000; ++i) {
      const Eigen::Vector3d m = data.uniform() < 0.5 ? Eigen::Vector3d(0, 0, 0) : Eigen::Vector3d(5, 5, 0);
      pts.push_back(to_pose(sample_gaussian(m, cov, data)));
    }
    const auto fit = fit_gmm_em(pts, 2, seeding);
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
      monotone = monotone && fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-9;
    auto a = fit.mixture.components[0];
    auto b = fit.mixture.components[1];
    if (a.mean.x() > b.mean.x()) std::swap(a, b);
    const bool ok = (a.mean - Eigen::Vector3d(0, 0, 0)).norm() <= 0.2 && (b.mean - Eigen::Vector3d(5, 5, 0)).norm() <= 0.2 &&
                    std::abs(a.weight - 0.5) <= 0.05 && std::abs(b.weight - 0.5) <= 0.05;
    recovered += ok;
  }
  out.require(recovered >= 28, "only " + std::to_string(recovered) + "/30 recovered");
  out.require(monotone, "log-likelihood decreased");
  out.note(std::to_string(recovered) + "/30 recovered, log-likelihood monotone");
  return out;
}

Outcome formulas() {
  Outcome out;
  {
    Cell c;
    c.created = 7;
    c.selections = 3;
    c.neighbors = 2;
    c.coverage = 55.0;
    c.score = 0.7;
    c.belief = 0.0;
    const double plain = std::log1p(7.0) * 0.7 / (3.0 * 3.0 * 55.0);
    out.require(importance(c, 4.0) == plain, "biased importance differs at zero cell belief");
    c.belief = 0.3;
    out.require(importance(c, 0.0) == plain, "biased importance differs at zero bias");
  }
  {
    MotionTree tree;
    Grid grid(0.1);
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
      WorldState w;
      w.bodies = {disk(0, BodyClass::robot, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.03, 1.0)};
      Motion m;
      m.start = w;
      m.belief = rng.uniform();
      m.states = {w};
      m.state_steps = {20};
      grid.add_motion(tree, tree.add(m), 1);
    }
    double sum = 0.0;
    for (const auto& c : grid.cells()) sum += c.belief;
    out.require(std::abs(sum - 1.0) <= 1e-9, "cell beliefs sum to " + fmt("%.12f", sum));
  }
  {
    bool exact = true;
    for (int n = 1; n <= 30; ++n)
      for (int s = 0; s <= n; ++s)
        for (int i = 0; i <= n; ++i)
          exact = exact && std::abs(compute_belief(s, i, n) - (double(s) / n) * (double(i) / n)) <= 1e-12;
    out.require(exact, "belief differs from the product of fractions");
  }
  {  // Half-normal over 10 motions, chi-square with 9 degrees of freedom.
    MotionTree tree;
    Cell cell;
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0)};
    for (int i = 0; i < 10; ++i) {
      Motion m;
      m.start = w;
      m.states = {w};
      m.state_steps = {1};
      cell.motions.push_back(tree.add(m));
    }
    RngStream rng(21);
    std::vector<int> hist(10, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++hist[9 - select_motion_in_cell(cell, tree, 1.0, rng)];
    const double sigma = 10.0 / 3.0;
    auto cdf = [&](double t) { return std::erf(t / (sigma * std::sqrt(2.0))); };
    double chi2 = 0.0;
    for (int j = 0; j < 10; ++j) {
      const double p = j < 9 ? cdf(j + 1) - cdf(j) : 1.0 - cdf(j);
      chi2 += std::pow(hist[j] - p * draws, 2) / (p * draws);
    }
    bool non_increasing = true;
    for (int j = 1; j < 10; ++j) non_increasing = non_increasing && hist[j] <= hist[j - 1];
    out.require(chi2 < 21.666, "half-normal chi-square " + fmt("%.2f", chi2));
    out.require(non_increasing, "selection frequency grows with age");
    out.note("half-normal chi2 " + fmt("%.2f", chi2) + " (9 dof, p>0.01 below 21.67)");
  }
  {  // Tie uniformity among beliefs {0.2, 0.9, 0.9}.
    MotionTree tree;
    Cell cell;
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0)};
    for (double b : {0.2, 0.9, 0.9}) {
      Motion m;
      m.start = w;
      m.belief = b;
      m.states = {w};
      m.state_steps = {1};
      cell.motions.push_back(tree.add(m));
    }
    RngStream rng(22);
    std::array<int, 3> hits{};
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++hits[select_motion_in_cell(cell, tree, 0.0, rng)];
    const double z = (hits[1] - 0.5 * draws) / std::sqrt(0.25 * draws);
    out.require(hits[0] == 0, "lowest belief selected");
    out.require(std::abs(z) < 2.576, "tie split z = " + fmt("%.2f", z));
    out.note("tie split " + std::to_string(hits[1]) + "/" + std::to_string(hits[2]));
  }
  return out;
}

Outcome clutter_trend() {
  Outcome out;
  std::vector<double> rates;
  std::string table;
  for (int count : {5, 10, 15, 20}) {
    std::vector<RunRecord> recs;
    if (count == 10) {
      recs = clutter_runs().probabilistic;
    } else {
      CampaignOptions opts;
      for (std::uint64_t s = 1; s <= 30; ++s) opts.seeds.push_back(s);
      opts.modes = {PlannerMode::probabilistic};
      opts.replay_trials = 0;
      recs = run_experiment(scene("clutter" + std::to_string(count) + ".json"), opts).records;
    }
    double ok = 0;
    for (const auto& r : recs) ok += r.success;
    rates.push_back(ok / static_cast<double>(recs.size()));
    table += (table.empty() ? "" : " ") + std::to_string(count) + ":" + fmt("%.2f", rates.back());
  }
  // Least-squares slope of success against object count.
  const std::vector<double> xs{5, 10, 15, 20};
  const double mx = mean(xs), my = mean(rates);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (rates[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = num / den;
  out.require(slope <= 0.0, "success rises with clutter");
  out.require(rates[1] >= 0.8, "success at 10 objects below 80%");
  out.note("success " + table + ", slope " + fmt("%.4f", slope) + " per object");
  return out;
}

Outcome robustness_delta() {
  Outcome out;
  auto fractions = [](const std::vector<RunRecord>& recs) {
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(r.replay_fraction);
    return v;
  };
  const double base = mean(fractions(clutter_runs().baseline));
  const double prob = mean(fractions(clutter_runs().probabilistic));
  const double delta = 100.0 * (prob - base);
  out.require(delta >= 10.0, "delta below 10 points");
  out.note("replay success baseline " + fmt("%.3f", base) + ", probabilistic " + fmt("%.3f", prob) + ", delta " +
           fmt("%+.1f pp", delta));
  return out;
}

Outcome memory_trend() {
  Outcome out;
  auto column = [](const std::vector<RunRecord>& recs, bool states) {
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(static_cast<double>(states ? r.states : r.cells));
    return v;
  };
  const auto& runs = clutter_runs();
  const double bs = median(column(runs.baseline, true)), ps = median(column(runs.probabilistic, true));
  const double bc = median(column(runs.baseline, false)), pc = median(column(runs.probabilistic, false));
  out.require(ps <= bs, "probabilistic median states above baseline");
  out.require(pc <= bc, "probabilistic median cells above baseline");
  out.note("median states " + fmt("%.1f", bs) + " vs " + fmt("%.1f", ps) + ", cells " + fmt("%.1f", bc) + " vs " +
           fmt("%.1f", pc) + " (baseline vs probabilistic)");
  return out;
}

Outcome cost_trend() {
  Outcome out;
  std::vector<double> means;
  std::string table;
  for (int particles : {1, 5, 15, 30}) {
    const auto s = apply_parameter(scene("clutter10.json"), "particles", particles);
    std::vector<double> times;
    for (std::uint64_t seed = 1; seed <= 15; ++seed) times.push_back(plan(make_query(s, PlannerMode::probabilistic), seed).stats.wall_time);
    means.push_back(mean(times));
    table += (table.empty() ? "" : " ") + std::to_string(particles) + ":" + fmt("%.2fs", means.back());
  }
  for (std::size_t i = 1; i < means.size(); ++i) out.require(means[i] > means[i - 1], "wall time not increasing");
  out.note("mean wall time " + table);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reporting() {
  Outcome out;
  const auto tmp = std::filesystem::temp_directory_path() / "pkpiece_acceptance";
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);

  int stable = 0, total = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kSource / "scenarios")) {
    const auto once = tmp / "once.json";
    const auto twice = tmp / "twice.json";
    save_scenario(load_scenario(entry.path()), once);
    save_scenario(load_scenario(once), twice);
    ++total;
    stable += slurp(once) == slurp(twice);
  }
  out.require(stable == total, "scenario round trip not byte-stable");

  const std::vector<RunRecord> golden{
      {"clutter10", 3, PlannerMode::baseline, "none", true, 1.5, 206, 40, 2.35, 0.8},
      {"clutter10", 3, PlannerMode::probabilistic, "particles=30", false, 0.000125, 657, 91, 0.0, 0.0},
      {"two_corridors", 18446744073709551615ull, PlannerMode::probabilistic, "cell_size=2.5", true, 61.25, 12, 3, 0.1, 1.0}};
  write_records(tmp / "golden.csv", golden);
  out.require(slurp(tmp / "golden.csv") == slurp(kSource / "tests" / "data" / "golden_runs.csv"), "CSV differs from golden file");

  auto s = scene("minimal.json");
  s.planner.max_iterations = 3000;
  s.planner.particles = 2;
  CampaignOptions opts;
  opts.seeds = {1, 2, 3};
  opts.out_dir = tmp / "campaign";
  opts.replay_trials = 5;
  const auto first = run_experiment(s, opts);
  const auto csv = slurp(opts.out_dir / "runs.csv");
  const auto second = run_experiment(s, opts);
  out.require(second.planner_invocations == 0, "restart re-ran " + std::to_string(second.planner_invocations) + " runs");
  out.require(slurp(opts.out_dir / "runs.csv") == csv, "restart changed runs.csv");
  out.note(std::to_string(stable) + "/" + std::to_string(total) + " scenarios byte-stable, golden CSV matches, " +
           std::to_string(first.planner_invocations) + " runs then 0 on restart");
  std::filesystem::remove_all(tmp);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"determinism", determinism},         {"physics oracles", physics_oracles},
      {"EM recovery", em_recovery},         {"formula checks", formulas},
      {"clutter trend", clutter_trend},     {"robustness delta", robustness_delta},
      {"memory trend", memory_trend},       {"cost trend", cost_trend},
      {"CLI and reporting", reporting}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", number, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
