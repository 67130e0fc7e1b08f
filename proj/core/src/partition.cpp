#include "evopagator/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evopagator/errors.hpp"

namespace evo {

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConstructionError("partition needs at least two points");
  if (points_.front() != 0.0) throw ConstructionError("partition must start at 0");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw ConstructionError("partition point is not finite");
    if (i > 0) {
      const double gap = points_[i] - points_[i - 1];
      if (!(gap > 0.0)) {
        throw ConstructionError("partition points must be strictly increasing (index " + std::to_string(i) + ")");
      }
      mesh_ = std::max(mesh_, gap);
    }
  }
}

Partition Partition::uniform(double horizon, std::size_t cells) {
  if (!(horizon > 0.0)) throw ConstructionError("horizon must be positive");
  if (cells == 0) throw ConstructionError("partition needs at least one cell");
  std::vector<double> pts(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) pts[i] = horizon * static_cast<double>(i) / static_cast<double>(cells);
  pts.back() = horizon;
  return Partition(std::move(pts));
}

Partition Partition::dyadic(double horizon, int level) {
  if (level < 0 || level > 30) throw ConstructionError("dyadic level must lie in [0, 30]");
  return uniform(horizon, std::size_t{1} << level);
}

bool Partition::contains_point(double t) const { return std::binary_search(points_.begin(), points_.end(), t); }

Location Partition::locate(double t) const {
  if (!(t >= 0.0 && t <= horizon())) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
  }
  // Largest point <= t.
  const auto it = std::upper_bound(points_.begin(), points_.end(), t);
  const auto index = static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
  Location loc;
  loc.index = index;
  loc.t_n = points_[index];
  if (index > 0) loc.t_minus = points_[index - 1];
  if (index + 1 < points_.size()) loc.t_plus = points_[index + 1];
  return loc;
}

}  // namespace evo
