#include "pkpiece/kpiece.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pkp {

MotionId MotionTree::add(Motion m) {
  if (m.parent && *m.parent >= motions.size()) throw std::invalid_argument("motion tree: parent does not exist");
  if (m.states.empty()) throw std::invalid_argument("motion tree: motion has no states");
  motions.push_back(std::move(m));
  return motions.size() - 1;
}

Vec2 project(const WorldState& world) { return world.robot().pose.position(); }

Grid::Grid(double cell_side) : cell_side_(cell_side) {
  if (!(cell_side > 0.0)) throw std::invalid_argument("grid: cell side must be positive");
}

std::optional<std::size_t> Grid::find(const CellCoord& coord) const {
  const auto it = index_.find(coord);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CellCoord Grid::coord_of(Vec2 p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_side_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_side_))};
}

void Grid::update_neighbors(std::size_t index) {
  static constexpr std::array<std::array<std::int64_t, 2>, 4> offsets{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  Cell& cell = cells_[index];
  for (const auto& o : offsets) {
    const CellCoord n{cell.coord[0] + o[0], cell.coord[1] + o[1]};
    if (const auto other = find(n)) {
      ++cell.neighbors;
      Cell& oc = cells_[*other];
      ++oc.neighbors;
      oc.exterior = oc.neighbors < 4;
    }
  }
  cell.exterior = cell.neighbors < 4;
}

Grid::AddResult Grid::add_motion(const MotionTree& tree, MotionId id, std::uint64_t iteration) {
  const Motion& m = tree[id];
  const CellCoord coord = coord_of(project(m.end()));
  bool created = false;
  std::size_t index = 0;
  if (const auto found = find(coord)) {
    index = *found;
  } else {
    Cell cell;
    cell.coord = coord;
    cell.created = iteration;
    cells_.push_back(cell);
    index = cells_.size() - 1;
    index_.emplace(coord, index);
    update_neighbors(index);
    created = true;
  }
  Cell& cell = cells_[index];
  cell.motions.push_back(id);
  const double steps = m.state_steps.empty() ? 0.0 : static_cast<double>(m.state_steps.back());
  const double cov = std::max(steps, 1.0);
  cell.coverage += cov;
  total_coverage_ += cov;
  cell.belief_sum += m.belief;
  recompute_beliefs();
  return {index, created};
}

void Grid::recompute_beliefs() {
  double total = 0.0;
  for (const auto& c : cells_) total += c.belief_sum / static_cast<double>(c.motions.size());
  const double uniform = 1.0 / static_cast<double>(cells_.size());
  for (auto& c : cells_)
    c.belief = total > 0.0 ? (c.belief_sum / static_cast<double>(c.motions.size())) / total : uniform;
}

double importance(const Cell& cell, double bias_factor) {
  return ((1.0 + bias_factor * cell.belief) * std::log1p(static_cast<double>(cell.created)) * cell.score) /
         (static_cast<double>(cell.selections) * (1.0 + cell.neighbors) * cell.coverage);
}

std::size_t select_cell(Grid& grid, RngStream& rng, double bias_factor, double exterior_probability) {
  if (grid.empty()) throw std::invalid_argument("select_cell: grid is empty");
  bool want_exterior = rng.uniform() < exterior_probability;
  const auto& cells = grid.cells();
  const bool has_exterior = std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.exterior; });
  const bool has_interior = std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return !c.exterior; });
  if (want_exterior && !has_exterior) want_exterior = false;
  if (!want_exterior && !has_interior) want_exterior = true;

  std::size_t best = cells.size();
  double best_imp = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    if (c.exterior != want_exterior) continue;
    const double imp = importance(c, bias_factor);
    if (best == cells.size() || imp > best_imp) {
      best = i;
      best_imp = imp;
      continue;
    }
    if (imp == best_imp) {
      const Cell& b = cells[best];
      if (c.created < b.created || (c.created == b.created && c.coord < b.coord)) best = i;
    }
  }
  ++grid.cell(best).selections;
  return best;
}

MotionId select_motion_in_cell(const Cell& cell, const MotionTree& tree, double random_probability,
                               RngStream& rng) {
  const auto& ids = cell.motions;
  if (ids.empty()) throw std::invalid_argument("select_motion_in_cell: cell has no motions");
  if (rng.uniform() >= random_probability) {
    double best = -1.0;
    for (const MotionId id : ids) best = std::max(best, tree[id].belief);
    std::vector<MotionId> ties;
    for (const MotionId id : ids)
      if (tree[id].belief == best) ties.push_back(id);
    return ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
  }
  const double sigma = static_cast<double>(ids.size()) / 3.0;
  const double z = rng.normal();
  const auto offset = std::min(static_cast<std::size_t>(std::floor(std::abs(z) * sigma)), ids.size() - 1);
  return ids[ids.size() - 1 - offset];
}

void update_score(Cell& cell, double coverage_gain, double elapsed, const ScoreConfig& config) {
  const bool progress = coverage_gain > 0.0 && coverage_gain * config.reference_time >= elapsed;
  cell.score *= progress ? config.reward : config.penalty;
  cell.score = std::clamp(cell.score, config.min_score, config.max_score);
}

}  // namespace pkp
