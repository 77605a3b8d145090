// Command-line front end over the C interface.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "pkpiece/pkpiece.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlannerFailure = 1;
constexpr int kExitUsage = 2;

int report_error(pkp_status status) {
  std::fprintf(stderr, "error: %s: %s\n", pkp_status_name(status), pkp_last_error());
  switch (status) {
    case PKP_ERR_ARGUMENT:
    case PKP_ERR_PARSE:
    case PKP_ERR_VALIDATION:
    case PKP_ERR_IO:
      return kExitUsage;
    default:
      return kExitPlannerFailure;
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("PKPIECE_OUT_DIR");
  return env && *env ? env : "pkpiece_out";
}

bool parse_mode(const std::string& name, pkp_mode* mode) {
  if (name == "probabilistic" || name == "pkpiece") {
    *mode = PKP_MODE_PROBABILISTIC;
    return true;
  }
  if (name == "baseline" || name == "kpiece") {
    *mode = PKP_MODE_BASELINE;
    return true;
  }
  return false;
}

struct ScenarioHandle {
  pkp_scenario* ptr = nullptr;
  ~ScenarioHandle() { pkp_scenario_free(ptr); }
};

struct PlanHandle {
  pkp_plan* ptr = nullptr;
  ~PlanHandle() { pkp_plan_free(ptr); }
};

int run_plan(const std::string& scenario_path, std::uint64_t seed, const std::string& mode_name,
             const std::string& out) {
  pkp_mode mode;
  if (!parse_mode(mode_name, &mode)) {
    std::fprintf(stderr, "error: unknown mode '%s'\n", mode_name.c_str());
    return kExitUsage;
  }
  ScenarioHandle scenario;
  if (auto st = pkp_scenario_load(scenario_path.c_str(), &scenario.ptr); st != PKP_OK) return report_error(st);
  PlanHandle plan;
  if (auto st = pkp_plan_compute(scenario.ptr, mode, seed, &plan.ptr); st != PKP_OK) return report_error(st);

  pkp_stats stats;
  pkp_plan_get_stats(plan.ptr, &stats);
  const bool solved = pkp_plan_solved(plan.ptr) != 0;
  std::printf("solved: %s\n", solved ? "yes" : "no");
  std::printf("iterations: %llu  states: %llu  cells: %llu  wall time: %.3f s\n",
              static_cast<unsigned long long>(stats.iterations), static_cast<unsigned long long>(stats.states),
              static_cast<unsigned long long>(stats.cells), stats.wall_time);
  if (solved) {
    std::printf("plan: %zu controls, %.3f s\n", pkp_plan_length(plan.ptr), pkp_plan_duration(plan.ptr));
    for (size_t i = 0; i < pkp_plan_length(plan.ptr); ++i) {
      pkp_step s;
      pkp_plan_get_step(plan.ptr, i, &s);
      std::printf("  %2zu  f=(%+.3f, %+.3f) tau=%+.4f  dt=%.3f  belief=%.2f\n", i, s.fx, s.fy, s.torque, s.duration,
                  s.belief);
    }
  }
  if (!out.empty()) {
    if (auto st = pkp_plan_save(plan.ptr, out.c_str()); st != PKP_OK) return report_error(st);
    std::printf("wrote %s\n", out.c_str());
  }
  return solved ? kExitOk : kExitPlannerFailure;
}

void print_row(const char* row, void*) {
  std::printf("%s\n", row);
  std::fflush(stdout);
}

int run_bench(const std::string& scenario_path, const std::string& seeds, const std::string& modes,
              const std::string& sweep, const std::string& out_dir, int trials) {
  ScenarioHandle scenario;
  if (auto st = pkp_scenario_load(scenario_path.c_str(), &scenario.ptr); st != PKP_OK) return report_error(st);
  size_t invocations = 0;
  const auto st = pkp_bench_run(scenario.ptr, seeds.c_str(), modes.c_str(), sweep.empty() ? nullptr : sweep.c_str(),
                                out_dir.c_str(), trials, print_row, nullptr, &invocations);
  if (st != PKP_OK) return report_error(st);
  std::fprintf(stderr, "%zu planner runs; records in %s/runs.csv\n", invocations, out_dir.c_str());
  return kExitOk;
}

int run_replay(const std::string& scenario_path, const std::string& plan_path, int trials, std::uint64_t seed) {
  ScenarioHandle scenario;
  if (auto st = pkp_scenario_load(scenario_path.c_str(), &scenario.ptr); st != PKP_OK) return report_error(st);
  PlanHandle plan;
  if (auto st = pkp_plan_load(plan_path.c_str(), &plan.ptr); st != PKP_OK) return report_error(st);
  if (!pkp_plan_solved(plan.ptr)) {
    std::fprintf(stderr, "error: plan file holds no solution\n");
    return kExitPlannerFailure;
  }
  if (trials == 0) std::fprintf(stderr, "warning: no trials; success fraction reported as 0\n");
  double fraction = 0.0;
  if (auto st = pkp_replay(scenario.ptr, plan.ptr, trials, seed, &fraction); st != PKP_OK) return report_error(st);
  std::printf("replay success: %.4f (%d trials)\n", fraction, trials);
  return kExitOk;
}

int run_report(const std::string& dir) {
  size_t files = 0;
  if (auto st = pkp_report(dir.c_str(), &files); st != PKP_OK) return report_error(st);
  std::printf("wrote %zu files to %s\n", files, dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-based kinodynamic planning under object pose uncertainty"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pkp_version());

  std::string scenario_path, plan_path, mode = "probabilistic", out, seeds = "1..30",
                                        modes = "baseline,probabilistic", sweep, dir;
  std::uint64_t seed = 1;
  int trials = -1;

  auto* plan = app.add_subcommand("plan", "Plan once and print the control sequence");
  plan->add_option("scenario", scenario_path, "Scenario file")->required();
  plan->add_option("--seed", seed, "Master seed");
  plan->add_option("--mode", mode, "probabilistic or baseline");
  plan->add_option("--out", out, "Write the plan to this file");

  auto* bench = app.add_subcommand("bench", "Run a seeded campaign, resuming completed rows");
  bench->add_option("scenario", scenario_path, "Scenario file")->required();
  bench->add_option("--seeds", seeds, "Seed range A..B or list");
  bench->add_option("--modes", modes, "Comma-separated modes");
  bench->add_option("--sweep", sweep, "Parameter sweep name=v1,v2,...");
  bench->add_option("--out", dir, "Output directory (default $PKPIECE_OUT_DIR or ./pkpiece_out)");
  bench->add_option("--trials", trials, "Replay trials per solved plan (default from scenario)");

  auto* replay = app.add_subcommand("replay", "Open-loop replay of a saved plan under noise");
  replay->add_option("scenario", scenario_path, "Scenario file")->required();
  replay->add_option("plan", plan_path, "Plan file")->required();
  replay->add_option("--trials", trials, "Number of trials")->check(CLI::NonNegativeNumber);
  replay->add_option("--seed", seed, "Replay seed");

  auto* report = app.add_subcommand("report", "Write records.csv and SVG charts from runs.csv");
  report->add_option("dir", dir, "Campaign directory (default $PKPIECE_OUT_DIR or ./pkpiece_out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (dir.empty()) dir = default_out_dir();
  if (*plan) return run_plan(scenario_path, seed, mode, out);
  if (*bench) return run_bench(scenario_path, seeds, modes, sweep, dir, trials);
  if (*replay) return run_replay(scenario_path, plan_path, trials < 0 ? 100 : trials, seed);
  return run_report(dir);
}
