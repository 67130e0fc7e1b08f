#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "evopagator/generator_family.hpp"

namespace evo {

enum class VariationMode { kExactLipschitz, kSampledSup };

struct RefinementSettings {
  double rtol = 1e-6;
  int max_doublings = 20;
  int min_doublings = 10;
};

/// V(s, t) = C * sup over partitions of sum ||A(t_i) - A(t_{i-1})||_{Y,X}.
///
/// In exact-Lipschitz mode this is C L |t - s|. In sampled-sup mode the sum is
/// evaluated on uniform partitions of [min(s,t), max(s,t)] with 1, 2, 4, ...
/// cells until three successive values agree to `rtol`.
///
/// Copies share one append-only cache, so a functional can be handed to
/// several threads.
class VariationFunctional {
 public:
  VariationFunctional(double stability_constant, VariationMode mode, RefinementSettings settings = {});

  /// C from stability_constant(family, samples).
  static VariationFunctional for_family(const GeneratorFamily& family, VariationMode mode, int samples = 256,
                                        RefinementSettings settings = {});

  double constant() const noexcept { return constant_; }
  VariationMode mode() const noexcept { return mode_; }
  const RefinementSettings& settings() const noexcept { return settings_; }

  double operator()(const GeneratorFamily& family, double s, double t) const;

 private:
  using Key = std::tuple<const GeneratorFamily*, double, double>;
  struct Cache {
    std::mutex mutex;
    std::map<Key, double> values;
  };

  double constant_;
  VariationMode mode_;
  RefinementSettings settings_;
  std::shared_ptr<Cache> cache_;
};

inline double variation(const VariationFunctional& vf, const GeneratorFamily& family, double s, double t) {
  return vf(family, s, t);
}

/// Sum of ||A(t_i) - A(t_{i-1})||_{Y,X} over the uniform partition of [a, b]
/// into 2^level cells (no factor C).
double telescoped_variation(const GeneratorFamily& family, double a, double b, int level);

}  // namespace evo
