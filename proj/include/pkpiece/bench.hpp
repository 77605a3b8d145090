#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pkpiece/planner.hpp"
#include "pkpiece/scenario.hpp"

namespace pkp {

/// One planner run of a campaign.
struct RunRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  PlannerMode mode = PlannerMode::probabilistic;
  std::string sweep = "none";  ///< "param=value" or "none"
  bool success = false;
  double wall_time = 0.0;
  std::uint64_t states = 0;
  std::uint64_t cells = 0;
  double plan_length = 0.0;     ///< seconds of control
  double replay_fraction = 0.0;

  /// Identity of the run inside a campaign.
  std::string key() const;
  bool operator==(const RunRecord&) const = default;
};

inline constexpr const char* kCsvHeader =
    "scenario,seed,mode,sweep,success,wall_time_s,states,cells,plan_len_s,replay_frac";

std::string format_record(const RunRecord& record);
/// Throws ParseError on a malformed row.
RunRecord parse_record(const std::string& line);
/// Missing file reads as no records.
std::vector<RunRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);

struct Sweep {
  std::string parameter;
  std::vector<double> values;
};

/// "name=v1,v2,..." into a sweep. Throws ParseError.
Sweep parse_sweep(const std::string& text);
/// "A..B" (inclusive) or a comma list. Throws ParseError.
std::vector<std::uint64_t> parse_seeds(const std::string& text);
/// Shortest text that reads back to the same double.
std::string format_value(double value);

struct CampaignOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<PlannerMode> modes{PlannerMode::baseline, PlannerMode::probabilistic};
  std::optional<Sweep> sweep;
  /// Where runs.csv lives; empty keeps records in memory only.
  std::filesystem::path out_dir;
  /// Replay trials per solved plan; negative uses the scenario's setting.
  int replay_trials = -1;
  std::function<void(const RunRecord&)> on_record;
};

struct CampaignResult {
  std::vector<RunRecord> records;  ///< every row of the campaign, resumed ones included
  std::size_t planner_invocations = 0;
  std::size_t resumed = 0;
};

/// Runs seed x mode x sweep point, appending each finished row to
/// out_dir/runs.csv. Rows already present there are not run again.
CampaignResult run_experiment(const Scenario& scenario, const CampaignOptions& options);

/// Plans one (seed, mode) pair and replays the result. Exceptions become a
/// failed record.
RunRecord run_single(const Scenario& scenario, std::uint64_t seed, PlannerMode mode,
                     const std::string& sweep_label, int replay_trials);

struct ReplayResult {
  double fraction = 0.0;
  int successes = 0;
  int trials = 0;
  std::vector<std::string> warnings;
};

/// Executes the plan open loop `trials` times with sampled initial poses,
/// contact parameters and per-step control noise. A trial succeeds when the
/// robot reaches the goal before any recorded state turns invalid; execution
/// stops at the first goal hit.
ReplayResult replay_open_loop(const Scenario& scenario, const Plan& plan, int trials, std::uint64_t seed);

struct PlanFile {
  std::string scenario;
  std::uint64_t seed = 0;
  PlannerMode mode = PlannerMode::probabilistic;
  bool solved = false;
  Plan plan;
  PlannerStats stats;
};

std::string plan_to_json(const PlanFile& file);
PlanFile parse_plan(const std::string& text);
void save_plan(const PlanFile& file, const std::filesystem::path& path);
PlanFile load_plan(const std::filesystem::path& path);

/// Writes records.csv and the SVG charts that the records support. Returns
/// the files written. Throws IoError when the directory is unusable.
std::vector<std::filesystem::path> emit_report(const std::vector<RunRecord>& records,
                                               const std::filesystem::path& out_dir);

}  // namespace pkp
