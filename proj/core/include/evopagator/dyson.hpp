#pragma once

#include <span>
#include <vector>

#include "evopagator/composite.hpp"
#include "evopagator/record.hpp"

namespace evo {

enum class QuadratureRule { kTrapezoid, kMidpoint, kCubic };

const char* to_string(QuadratureRule rule) noexcept;
QuadratureRule parse_quadrature_rule(const std::string& name);

struct DysonConfig {
  int order = 8;                    // truncation order K
  int nodes_per_unit_time = 256;    // quadrature intervals per unit time
  QuadratureRule rule = QuadratureRule::kTrapezoid;
};

void validate(const DysonConfig& cfg);

/// B~(tau) y = e^{-A_0 tau} B(tau) e^{A_0 tau} y, with A_0 = free(0).
StateVector interaction_generator(const GeneratorFamily& free, const BoundedPerturbation& perturbation, double tau,
                                  const StateVector& y);

/// Order-K Dyson approximation of U(t, s) y for A = A_0 + B(t), t >= s.
///
/// The interaction-picture series is summed by K Picard sweeps of
/// w <- y_I + int_s^tau B~ w on a shared quadrature grid, y_I = e^{-A_0 s} y,
/// and the result e^{A_0 t} w_K(t) is returned in the physical picture.
StateVector dyson_propagate(const GeneratorFamily& free, const BoundedPerturbation& perturbation, double t, double s,
                            const StateVector& y, const DysonConfig& cfg);

inline StateVector dyson_propagate(const CompositeFamily& family, double t, double s, const StateVector& y,
                                   const DysonConfig& cfg) {
  return dyson_propagate(family.free_part(), family.perturbation(), t, s, y, cfg);
}

/// e^{omega I} (b I)^{K+1} / (K+1)! e^{b I}: majorant of the physical-picture
/// truncation error of the order-K series over an interval of length I.
double truncation_bound(double b_sup, double interval, int order, double omega);

/// Distance between the product formula on dyadic levels and the Dyson
/// evaluation, one record per level (metric "product_dyson_distance").
std::vector<ExperimentRecord> dyson_vs_product(std::shared_ptr<const CompositeFamily> family, double t, double s,
                                               const StateVector& y, const DysonConfig& cfg,
                                               std::span<const int> levels);

namespace detail {

/// Interaction-picture values w_k(t) for k = 0..K (the end-point of every
/// Picard sweep), for tests of the series structure.
std::vector<CVector> interaction_iterates(const GeneratorFamily& free, const BoundedPerturbation& perturbation,
                                          double t, double s, const CVector& y, const DysonConfig& cfg);

}  // namespace detail

}  // namespace evo
