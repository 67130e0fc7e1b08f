#include "evopagator/variation.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "evopagator/errors.hpp"
#include "evopagator/norms.hpp"

namespace evo {

VariationFunctional::VariationFunctional(double stability_constant, VariationMode mode, RefinementSettings settings)
    : constant_(stability_constant), mode_(mode), settings_(settings), cache_(std::make_shared<Cache>()) {
  if (!(constant_ > 0.0) || !std::isfinite(constant_)) throw ConstructionError("stability constant must be positive");
  if (!(settings_.rtol > 0.0)) throw ConstructionError("rtol must be positive");
  if (settings_.max_doublings < 1 || settings_.min_doublings < 1 ||
      settings_.min_doublings > settings_.max_doublings) {
    throw ConstructionError("invalid doubling limits");
  }
}

VariationFunctional VariationFunctional::for_family(const GeneratorFamily& family, VariationMode mode, int samples,
                                                    RefinementSettings settings) {
  return VariationFunctional(stability_constant(family, samples), mode, settings);
}

double telescoped_variation(const GeneratorFamily& family, double a, double b, int level) {
  if (a > b) std::swap(a, b);
  if (a == b) return 0.0;
  family.require_time(a);
  family.require_time(b);
  const long cells = 1L << level;
  const YXNormEvaluator norm(family);
  const auto point = [&](long i) {
    return i == cells ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(cells);
  };
  double sum = 0.0;
  if (norm.diagonal()) {
    for (long i = 1; i <= cells; ++i) sum += norm(point(i), point(i - 1));
    return sum;
  }
  CMatrix prev = family.generator_matrix(a);
  for (long i = 1; i <= cells; ++i) {
    CMatrix next = family.generator_matrix(point(i));
    sum += norm.from_matrices(next, prev);
    prev = std::move(next);
  }
  return sum;
}

double VariationFunctional::operator()(const GeneratorFamily& family, double s, double t) const {
  family.require_time(s);
  family.require_time(t);
  if (s > t) std::swap(s, t);
  if (s == t) return 0.0;

  if (mode_ == VariationMode::kExactLipschitz) {
    const auto lip = family.lipschitz_constant();
    if (!lip) throw ConstructionError("exact-lipschitz variation needs a family with a Lipschitz constant");
    return constant_ * *lip * (t - s);
  }

  const Key key{&family, s, t};
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  }

  // A doubling can leave the sum unchanged when no new point lands nearer an
  // extremum than the old ones, so two agreements in a row are required.
  double previous = 0.0;
  double value = telescoped_variation(family, s, t, 0);
  bool settled = false;
  int agreements = 0;
  for (int level = 1; level <= settings_.max_doublings; ++level) {
    previous = value;
    value = telescoped_variation(family, s, t, level);
    const double scale = std::max(std::abs(value), std::abs(previous));
    agreements = scale == 0.0 || std::abs(value - previous) < settings_.rtol * scale ? agreements + 1 : 0;
    if (level >= settings_.min_doublings && agreements >= 2) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw RefinementError("variation on [" + std::to_string(s) + ", " + std::to_string(t) +
                              "] did not settle within " + std::to_string(settings_.max_doublings) + " doublings",
                          constant_ * previous, constant_ * value);
  }
  const double result = constant_ * value;
  std::lock_guard lock(cache_->mutex);
  cache_->values.emplace(key, result);
  return result;
}

}  // namespace evo
