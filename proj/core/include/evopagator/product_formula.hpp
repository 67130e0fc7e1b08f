#pragma once

#include <memory>
#include <span>
#include <vector>

#include "evopagator/generator_family.hpp"
#include "evopagator/partition.hpp"
#include "evopagator/variation.hpp"

namespace evo {

enum class Direction { kForward, kInverse };

/// Frozen-coefficient product U_n(t, s) on a partition pi_n.
///
/// For t > s,
///   U_n(t, s) = e^{A(t_n)(t - t_n)} e^{A(t_n^-)(t_n - t_n^-)} ... e^{A(s_n)(s_n^+ - s)},
/// i.e. on each cell [p_i, p_{i+1}) the generator is frozen at the left
/// endpoint p_i. For t < s the factors of U_n(s, t) are applied in reverse
/// order with negated durations, which is the exact inverse because every
/// e^{A(p) tau} is a group. A propagator with Direction::kInverse swaps the
/// roles of t and s.
class Propagator {
 public:
  struct Factor {
    double frozen_at;
    double duration;
  };

  Propagator(std::shared_ptr<const GeneratorFamily> family, Partition partition,
             Direction direction = Direction::kForward);

  const GeneratorFamily& family() const noexcept { return *family_; }
  const std::shared_ptr<const GeneratorFamily>& family_ptr() const noexcept { return family_; }
  const Partition& partition() const noexcept { return partition_; }
  Direction direction() const noexcept { return direction_; }

  Propagator inverse() const;

  /// Factors of U_n(t, s) in application order (first factor acts first).
  std::vector<Factor> factors(double t, double s) const;

  StateVector apply(double t, double s, const StateVector& y) const;

 private:
  std::shared_ptr<const GeneratorFamily> family_;
  Partition partition_;
  Direction direction_;
};

/// Throws ConstructionError when the partition does not end at the family horizon.
Propagator build_propagator(std::shared_ptr<const GeneratorFamily> family, Partition partition);

inline StateVector apply(const Propagator& prop, double t, double s, const StateVector& y) {
  return prop.apply(t, s, y);
}

/// ||U_n(t, r) U_n(r, s) y - U_n(t, s) y||.
double cocycle_check(const Propagator& prop, double t, double r, double s, const StateVector& y);

struct RefinementResult {
  StateVector result;
  int levels = 0;
  std::vector<double> cauchy_errors;  // entry k - 1 is ||U_k y - U_{k-1} y||
};

/// Applies U_k(t, s) on dyadic partitions k = 0, 1, ... and stops at the first
/// level k >= 1 whose Cauchy difference is below `tol`. Throws
/// ConvergenceError (carrying the differences) when `max_levels` is reached.
RefinementResult refine_until(std::shared_ptr<const GeneratorFamily> family, double t, double s,
                              const StateVector& y, double tol, int max_levels);

/// Least-squares slope of log(error) against log(mesh).
double observed_order(std::span<const double> meshes, std::span<const double> errors);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;

  double ratio() const noexcept { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0); }
};

inline constexpr double kBoundSlack = 1e-9;

/// ||U_n(t,s) y||_t <= e^{V(t,s) + 2 V(s,s_n) + omega (t - s)} ||y||_s, t > s.
BoundCheck graph_norm_bound_check(const Propagator& prop, const VariationFunctional& vf, double t, double s,
                                  const StateVector& y);

/// Companion bound for the inverse: ||U_n(s,t) y||_s <= e^{V(t,s) + 2 V(s,s_n) + omega (t - s)} ||y||_t, t > s.
BoundCheck inverse_graph_norm_bound_check(const Propagator& prop, const VariationFunctional& vf, double t, double s,
                                          const StateVector& y);

/// ||y||_t <= e^{V(t,s)} ||y||_s.
BoundCheck norm_equivalence_check(const GeneratorFamily& family, const VariationFunctional& vf, double t, double s,
                                  const StateVector& y);

/// Limit bound ||U(t,s) y||_t <= e^{V(t,s) + omega |t - s|} ||y||_s given the
/// propagated state `evolved` = U(t,s) y from an independent reference.
BoundCheck limit_graph_norm_bound_check(const GeneratorFamily& family, const VariationFunctional& vf, double t,
                                        double s, const StateVector& y, const StateVector& evolved);

}  // namespace evo
