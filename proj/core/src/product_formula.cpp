#include "evopagator/product_formula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evopagator/errors.hpp"
#include "evopagator/norms.hpp"

namespace evo {

Propagator::Propagator(std::shared_ptr<const GeneratorFamily> family, Partition partition, Direction direction)
    : family_(std::move(family)), partition_(std::move(partition)), direction_(direction) {
  if (!family_) throw ConstructionError("propagator needs a generator family");
}

Propagator Propagator::inverse() const {
  return Propagator(family_, partition_, direction_ == Direction::kForward ? Direction::kInverse : Direction::kForward);
}

std::vector<Propagator::Factor> Propagator::factors(double t, double s) const {
  if (direction_ == Direction::kInverse) std::swap(t, s);
  family_->require_time(t);
  family_->require_time(s);
  std::vector<Factor> out;
  if (t == s) return out;

  const bool backward = t < s;
  const double lo = backward ? t : s;
  const double hi = backward ? s : t;

  const auto points = partition_.points();
  std::size_t i = partition_.locate(lo).index;
  double cur = lo;
  while (cur < hi) {
    const double next = i + 1 < points.size() ? std::min(points[i + 1], hi) : hi;
    if (next > cur) out.push_back({points[i], next - cur});
    cur = next;
    ++i;
  }
  if (backward) {
    std::reverse(out.begin(), out.end());
    for (auto& f : out) f.duration = -f.duration;
  }
  return out;
}

StateVector Propagator::apply(double t, double s, const StateVector& y) const {
  family_->require_state(y);
  CVector v = y.entries();
  for (const auto& f : factors(t, s)) v = family_->do_frozen_exponential(f.frozen_at, f.duration, v);
  return y.with_entries(std::move(v));
}

Propagator build_propagator(std::shared_ptr<const GeneratorFamily> family, Partition partition) {
  if (!family) throw ConstructionError("propagator needs a generator family");
  const double horizon = family->horizon();
  if (std::abs(partition.horizon() - horizon) > 1e-12 * std::max(1.0, horizon)) {
    std::ostringstream os;
    os << "partition ends at " << partition.horizon() << " but the family horizon is " << horizon;
    throw ConstructionError(os.str());
  }
  return Propagator(std::move(family), std::move(partition));
}

double cocycle_check(const Propagator& prop, double t, double r, double s, const StateVector& y) {
  const StateVector chained = prop.apply(t, r, prop.apply(r, s, y));
  return chained.distance(prop.apply(t, s, y));
}

RefinementResult refine_until(std::shared_ptr<const GeneratorFamily> family, double t, double s,
                              const StateVector& y, double tol, int max_levels) {
  if (!family) throw ConstructionError("refine_until needs a generator family");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (max_levels < 2) throw DomainError("max_levels must be at least 2");
  const double horizon = family->horizon();
  StateVector previous = Propagator(family, Partition::dyadic(horizon, 0)).apply(t, s, y);
  std::vector<double> cauchy;
  for (int k = 1; k <= max_levels; ++k) {
    StateVector current = Propagator(family, Partition::dyadic(horizon, k)).apply(t, s, y);
    cauchy.push_back(current.distance(previous));
    if (cauchy.back() < tol) return {std::move(current), k, std::move(cauchy)};
    previous = std::move(current);
  }
  std::ostringstream os;
  os << "product formula did not reach tolerance " << tol << " within " << max_levels << " levels (last difference "
     << cauchy.back() << ")";
  throw ConvergenceError(os.str(), std::move(cauchy));
}

double observed_order(std::span<const double> meshes, std::span<const double> errors) {
  if (meshes.size() != errors.size()) throw DomainError("meshes and errors differ in length");
  if (meshes.size() < 2) throw DomainError("observed order needs at least two points");
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    if (!(meshes[i] > 0.0) || !(errors[i] > 0.0)) throw DomainError("meshes and errors must be positive");
    if (i > 0 && !(meshes[i] < meshes[i - 1])) throw DomainError("meshes must be strictly decreasing");
  }
  const auto n = static_cast<double>(meshes.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const double x = std::log(meshes[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

BoundCheck make_check(double lhs, double rhs) {
  BoundCheck c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.holds = lhs <= rhs * (1.0 + kBoundSlack);
  return c;
}

double step_exponent(const Propagator& prop, const VariationFunctional& vf, double t, double s) {
  if (!(t > s)) throw DomainError("bound check needs t > s");
  const GeneratorFamily& family = prop.family();
  const double s_n = prop.partition().locate(s).t_n;
  return vf(family, s, t) + 2.0 * vf(family, s_n, s) + family.omega() * (t - s);
}

}  // namespace

BoundCheck graph_norm_bound_check(const Propagator& prop, const VariationFunctional& vf, double t, double s,
                                  const StateVector& y) {
  const double exponent = step_exponent(prop, vf, t, s);
  const GeneratorFamily& family = prop.family();
  const StateVector evolved = prop.apply(t, s, y);
  return make_check(graph_norm(family, t, evolved), std::exp(exponent) * graph_norm(family, s, y));
}

BoundCheck inverse_graph_norm_bound_check(const Propagator& prop, const VariationFunctional& vf, double t, double s,
                                          const StateVector& y) {
  const double exponent = step_exponent(prop, vf, t, s);
  const GeneratorFamily& family = prop.family();
  const StateVector evolved = prop.apply(s, t, y);
  return make_check(graph_norm(family, s, evolved), std::exp(exponent) * graph_norm(family, t, y));
}

BoundCheck norm_equivalence_check(const GeneratorFamily& family, const VariationFunctional& vf, double t, double s,
                                  const StateVector& y) {
  return make_check(graph_norm(family, t, y), std::exp(vf(family, s, t)) * graph_norm(family, s, y));
}

BoundCheck limit_graph_norm_bound_check(const GeneratorFamily& family, const VariationFunctional& vf, double t,
                                        double s, const StateVector& y, const StateVector& evolved) {
  const double exponent = vf(family, s, t) + family.omega() * std::abs(t - s);
  return make_check(graph_norm(family, t, evolved), std::exp(exponent) * graph_norm(family, s, y));
}

}  // namespace evo
