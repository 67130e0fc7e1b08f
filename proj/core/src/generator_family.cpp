#include "evopagator/generator_family.hpp"

#include <string>

#include "evopagator/errors.hpp"

namespace evo {

const char* to_string(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::kMatrix:
      return "matrix";
    case FamilyKind::kSpectralShift:
      return "spectral-shift";
    case FamilyKind::kShiftedMultiplication:
      return "shifted-multiplication";
    case FamilyKind::kComposite:
      return "composite";
  }
  return "unknown";
}

void GeneratorFamily::require_time(double t) const {
  if (!(t >= 0.0 && t <= horizon())) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
  }
}

void GeneratorFamily::require_state(const StateVector& y) const {
  if (y.size() != dimension()) {
    throw ContractViolation("state of length " + std::to_string(y.size()) + " for family of dimension " +
                            std::to_string(dimension()));
  }
  if (y.kind() != norm_kind()) {
    throw ContractViolation(std::string("state tagged ") + to_string(y.kind()) + " but family lives in " +
                            to_string(norm_kind()));
  }
}

StateVector GeneratorFamily::generator_action(double t, const StateVector& y) const {
  require_time(t);
  require_state(y);
  return y.with_entries(do_generator_action(t, y.entries()));
}

StateVector GeneratorFamily::frozen_exponential(double t, double tau, const StateVector& y) const {
  require_time(t);
  require_state(y);
  return y.with_entries(do_frozen_exponential(t, tau, y.entries()));
}

StateVector GeneratorFamily::shifted_inverse(double t, const StateVector& x) const {
  require_time(t);
  require_state(x);
  return x.with_entries(do_shifted_inverse(t, x.entries()));
}

}  // namespace evo
