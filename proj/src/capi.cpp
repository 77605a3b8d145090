#include "pkpiece/pkpiece.h"

#include <new>
#include <string>

#include "pkpiece/bench.hpp"

struct pkp_scenario {
  pkp::Scenario value;
};

struct pkp_plan {
  pkp::PlanFile value;
};

namespace {

thread_local std::string g_last_error;

pkp_status fail(pkp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <typename F>
pkp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return PKP_OK;
  } catch (const pkp::ParseError& e) {
    return fail(PKP_ERR_PARSE, e.what());
  } catch (const pkp::ValidationError& e) {
    return fail(PKP_ERR_VALIDATION, e.what());
  } catch (const pkp::IoError& e) {
    return fail(PKP_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PKP_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PKP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PKP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PKP_ERR_INTERNAL, "unknown error");
  }
}

pkp::PlannerMode to_mode(pkp_mode mode) {
  if (mode == PKP_MODE_PROBABILISTIC) return pkp::PlannerMode::probabilistic;
  if (mode == PKP_MODE_BASELINE) return pkp::PlannerMode::baseline;
  throw std::invalid_argument("unknown planner mode");
}

void need(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* pkp_version(void) { return "0.1.0"; }

const char* pkp_last_error(void) { return g_last_error.c_str(); }

const char* pkp_status_name(pkp_status status) {
  switch (status) {
    case PKP_OK: return "ok";
    case PKP_ERR_ARGUMENT: return "invalid argument";
    case PKP_ERR_PARSE: return "parse error";
    case PKP_ERR_VALIDATION: return "validation error";
    case PKP_ERR_IO: return "i/o error";
    case PKP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pkp_status pkp_scenario_load(const char* path, pkp_scenario** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new pkp_scenario{pkp::load_scenario(path)};
  });
}

pkp_status pkp_scenario_parse(const char* json_text, pkp_scenario** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = nullptr;
    *out = new pkp_scenario{pkp::parse_scenario(json_text)};
  });
}

pkp_status pkp_scenario_save(const pkp_scenario* scenario, const char* path) {
  return guarded([&] {
    need(scenario, "scenario");
    need(path, "path");
    pkp::save_scenario(scenario->value, path);
  });
}

pkp_status pkp_scenario_set_param(pkp_scenario* scenario, const char* name, double value) {
  return guarded([&] {
    need(scenario, "scenario");
    need(name, "name");
    scenario->value = pkp::apply_parameter(scenario->value, name, value);
  });
}

size_t pkp_scenario_object_count(const pkp_scenario* scenario) {
  return scenario ? pkp::all_objects(scenario->value).size() : 0;
}

void pkp_scenario_free(pkp_scenario* scenario) { delete scenario; }

pkp_status pkp_plan_compute(const pkp_scenario* scenario, pkp_mode mode, uint64_t seed, pkp_plan** out) {
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    *out = nullptr;
    const auto m = to_mode(mode);
    const auto result = pkp::plan(pkp::make_query(scenario->value, m), seed);
    *out = new pkp_plan{{scenario->value.name, seed, m, result.solved, result.plan, result.stats}};
  });
}

int pkp_plan_solved(const pkp_plan* plan) { return plan && plan->value.solved ? 1 : 0; }

size_t pkp_plan_length(const pkp_plan* plan) { return plan ? plan->value.plan.steps.size() : 0; }

double pkp_plan_duration(const pkp_plan* plan) { return plan ? plan->value.plan.total_duration : 0.0; }

pkp_status pkp_plan_get_step(const pkp_plan* plan, size_t index, pkp_step* out) {
  return guarded([&] {
    need(plan, "plan");
    need(out, "out");
    const auto& steps = plan->value.plan.steps;
    if (index >= steps.size()) throw std::invalid_argument("step index out of range");
    const auto& s = steps[index];
    *out = {s.control.wrench.fx, s.control.wrench.fy, s.control.wrench.torque, s.control.duration, s.belief};
  });
}

pkp_status pkp_plan_get_stats(const pkp_plan* plan, pkp_stats* out) {
  return guarded([&] {
    need(plan, "plan");
    need(out, "out");
    const auto& s = plan->value.stats;
    *out = {s.iterations,           s.states,   s.cells, s.nominal_propagations, s.particle_propagations,
            s.uncertainty_updates, s.em_warnings, s.wall_time};
  });
}

pkp_status pkp_plan_save(const pkp_plan* plan, const char* path) {
  return guarded([&] {
    need(plan, "plan");
    need(path, "path");
    pkp::save_plan(plan->value, path);
  });
}

pkp_status pkp_plan_load(const char* path, pkp_plan** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new pkp_plan{pkp::load_plan(path)};
  });
}

void pkp_plan_free(pkp_plan* plan) { delete plan; }

pkp_status pkp_replay(const pkp_scenario* scenario, const pkp_plan* plan, int trials, uint64_t seed,
                      double* fraction) {
  return guarded([&] {
    need(scenario, "scenario");
    need(plan, "plan");
    need(fraction, "fraction");
    if (trials < 0) throw std::invalid_argument("trials must be >= 0");
    *fraction = pkp::replay_open_loop(scenario->value, plan->value.plan, trials, seed).fraction;
  });
}

pkp_status pkp_bench_run(const pkp_scenario* scenario, const char* seeds, const char* modes, const char* sweep,
                         const char* out_dir, int replay_trials, pkp_record_fn on_record, void* user,
                         size_t* planner_invocations) {
  return guarded([&] {
    need(scenario, "scenario");
    need(seeds, "seeds");
    need(modes, "modes");
    need(out_dir, "out_dir");
    pkp::CampaignOptions opts;
    opts.seeds = pkp::parse_seeds(seeds);
    opts.modes.clear();
    std::string list = modes;
    std::size_t start = 0;
    while (start <= list.size()) {
      const auto comma = std::min(list.find(',', start), list.size());
      const auto name = list.substr(start, comma - start);
      const auto mode = pkp::parse_mode(name);
      if (!mode) throw pkp::ParseError("unknown mode '" + name + "'");
      opts.modes.push_back(*mode);
      start = comma + 1;
    }
    if (sweep && *sweep) opts.sweep = pkp::parse_sweep(sweep);
    opts.out_dir = out_dir;
    opts.replay_trials = replay_trials;
    if (on_record)
      opts.on_record = [&](const pkp::RunRecord& r) { on_record(pkp::format_record(r).c_str(), user); };
    const auto result = pkp::run_experiment(scenario->value, opts);
    if (planner_invocations) *planner_invocations = result.planner_invocations;
  });
}

pkp_status pkp_report(const char* dir, size_t* files_written) {
  return guarded([&] {
    need(dir, "dir");
    const std::filesystem::path root(dir);
    if (!std::filesystem::is_directory(root)) throw pkp::IoError("'" + root.string() + "' is not a directory");
    const auto files = pkp::emit_report(pkp::read_records(root / "runs.csv"), root);
    if (files_written) *files_written = files.size();
  });
}

}  // extern "C"
