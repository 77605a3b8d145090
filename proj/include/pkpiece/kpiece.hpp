#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pkpiece/physics.hpp"
#include "pkpiece/rng.hpp"

namespace pkp {

using MotionId = std::size_t;

/// Tree edge: a control applied for a duration from a start state, with the
/// belief in its robustness. The root motion has zero duration.
struct Motion {
  WorldState start;
  Control control;
  double belief = 1.0;
  std::optional<MotionId> parent;
  /// Step of the parent motion at which this one branches off.
  std::int64_t branch_step = 0;
  /// Recorded states along the motion; the last one is the end state. For
  /// the root this holds just the start state.
  std::vector<WorldState> states;
  /// Physics step index of each recorded state.
  std::vector<std::int64_t> state_steps;

  const WorldState& end() const { return states.back(); }
  bool is_root() const { return !parent.has_value(); }
};

/// Motion storage; ids index into `motions`.
struct MotionTree {
  std::vector<Motion> motions;

  MotionId add(Motion m);
  const Motion& operator[](MotionId id) const { return motions[id]; }
  Motion& operator[](MotionId id) { return motions[id]; }
  std::size_t size() const { return motions.size(); }
};

using CellCoord = std::array<std::int64_t, 2>;

struct Cell {
  CellCoord coord{};
  std::vector<MotionId> motions;  ///< newest last
  double coverage = 0.0;          ///< number of propagation steps registered here
  int neighbors = 0;
  std::uint64_t created = 1;      ///< planning iteration of creation (1-based)
  std::uint64_t selections = 1;
  double score = 1.0;
  double belief_sum = 0.0;
  double belief = 0.0;            ///< normalized cell belief
  bool exterior = true;
};

struct ScoreConfig {
  double penalty = 0.9;
  double reward = 1.0 / 0.9;
  /// One new cell per this much propagated time counts as progress.
  double reference_time = 0.1;
  double min_score = 1e-3;
  double max_score = 1e3;
  bool operator==(const ScoreConfig&) const = default;
};

/// Projection grid over the robot position.
class Grid {
 public:
  explicit Grid(double cell_side);

  double cell_side() const { return cell_side_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const std::vector<Cell>& cells() const { return cells_; }
  Cell& cell(std::size_t index) { return cells_[index]; }
  const Cell& cell(std::size_t index) const { return cells_[index]; }
  std::optional<std::size_t> find(const CellCoord& coord) const;
  CellCoord coord_of(Vec2 point) const;
  double total_coverage() const { return total_coverage_; }

  struct AddResult {
    std::size_t cell;
    bool created;
  };
  /// Registers a motion in the cell of its end state.
  AddResult add_motion(const MotionTree& tree, MotionId id, std::uint64_t iteration);

 private:
  void recompute_beliefs();
  void update_neighbors(std::size_t index);

  double cell_side_;
  double total_coverage_ = 0.0;
  std::vector<Cell> cells_;
  std::map<CellCoord, std::size_t> index_;
};

/// Robot position of a world state.
Vec2 project(const WorldState& world);

/// Cell importance, biased by cell belief with factor f. With f * belief = 0
/// this is the plain KPIECE importance log(1 + I) * score / (C (1 + N) Cov).
double importance(const Cell& cell, double bias_factor);

/// Picks the exterior set with probability `exterior_probability` (or the
/// only non-empty set), then the highest-importance cell in it. Ties prefer
/// the earliest creation iteration, then the smaller coordinate. Increments
/// the chosen cell's selection count.
std::size_t select_cell(Grid& grid, RngStream& rng, double bias_factor,
                        double exterior_probability = 0.75);

/// Greedy on motion belief (uniform among exact ties) with probability
/// 1 - random_probability, otherwise half-normal over newest-first indices.
MotionId select_motion_in_cell(const Cell& cell, const MotionTree& tree, double random_probability,
                               RngStream& rng);

/// Multiplicative score update after an expansion from the cell.
void update_score(Cell& cell, double coverage_gain, double elapsed, const ScoreConfig& config = {});

}  // namespace pkp
