#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace evo {

/// Result of locating t in a partition: t_n <= t < t_plus with t_minus the
/// point immediately below t_n. Missing neighbours are empty.
struct Location {
  std::size_t index = 0;  // position of t_n in the point list
  double t_n = 0.0;
  std::optional<double> t_minus;
  std::optional<double> t_plus;
};

/// Strictly increasing grid 0 = p_0 < p_1 < ... < p_m = T.
class Partition {
 public:
  explicit Partition(std::vector<double> points);

  static Partition uniform(double horizon, std::size_t cells);
  /// Uniform partition with mesh horizon * 2^-level.
  static Partition dyadic(double horizon, int level);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t cells() const noexcept { return points_.size() - 1; }
  double horizon() const noexcept { return points_.back(); }
  double mesh() const noexcept { return mesh_; }
  bool contains_point(double t) const;

  Location locate(double t) const;

 private:
  std::vector<double> points_;
  double mesh_ = 0.0;
};

inline Location locate(const Partition& partition, double t) { return partition.locate(t); }

}  // namespace evo
