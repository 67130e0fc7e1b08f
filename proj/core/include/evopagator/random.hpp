#pragma once

#include <cstdint>
#include <random>

#include "evopagator/state.hpp"

namespace evo {

/// Seeded generator whose variates are reproducible across standard
/// libraries (std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  CVector complex_vector(Eigen::Index n);
  /// Entries uniform in the unit square, symmetrized.
  CMatrix hermitian(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace evo
