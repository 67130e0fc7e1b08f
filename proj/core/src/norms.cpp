#include "evopagator/norms.hpp"

#include <algorithm>

#include <Eigen/LU>

#include "evopagator/errors.hpp"


namespace evo {

namespace {

bool use_symbol(const GeneratorFamily& family) { return family.norm_kind() == NormKind::kEuclidean; }

CMatrix inverse_of(const CMatrix& m) { return Eigen::PartialPivLU<CMatrix>(m).inverse(); }

}  // namespace

CMatrix shifted_generator_matrix(const GeneratorFamily& family, double t) {
  CMatrix m = family.generator_matrix(t);
  m.diagonal().array() -= family.shift();
  return m;
}

double graph_norm(const GeneratorFamily& family, double t, const StateVector& y) {
  family.require_time(t);
  family.require_state(y);
  const CVector shifted = family.do_generator_action(t, y.entries()) - family.shift() * y.entries();
  return vector_norm(shifted, y.kind());
}

YXNormEvaluator::YXNormEvaluator(const GeneratorFamily& family) : family_(family) {
  if (use_symbol(family)) {
    if (const auto l0 = family.diagonal_symbol(0.0)) {
      symbol0_ = (l0->array() - family.shift()).abs();
      return;
    }
  }
  inverse0_ = inverse_of(shifted_generator_matrix(family, 0.0));
}

double YXNormEvaluator::operator()(double t, double s) const {
  family_.require_time(t);
  family_.require_time(s);
  if (t == s) return 0.0;
  if (symbol0_) {
    const CVector lt = *family_.diagonal_symbol(t);
    const CVector ls = *family_.diagonal_symbol(s);
    return ((lt.array() - ls.array()).abs() / *symbol0_).maxCoeff();
  }
  return from_matrices(family_.generator_matrix(t), family_.generator_matrix(s));
}

double YXNormEvaluator::from_matrices(const CMatrix& at, const CMatrix& as) const {
  if (symbol0_) throw ContractViolation("diagonal family: use operator()");
  return operator_norm((at - as) * inverse0_, family_.norm_kind());
}

double op_norm_Y_to_X(const GeneratorFamily& family, double t, double s) {
  family.require_time(t);
  family.require_time(s);
  if (t == s) return 0.0;
  return YXNormEvaluator(family)(t, s);
}

double op_norm_X_to_Y_inverse(const GeneratorFamily& family, double s) {
  family.require_time(s);
  if (use_symbol(family)) {
    const auto ls = family.diagonal_symbol(s);
    const auto l0 = family.diagonal_symbol(0.0);
    if (ls && l0) {
      return ((l0->array() - family.shift()).abs() / (ls->array() - family.shift()).abs()).maxCoeff();
    }
  }
  const CMatrix product = shifted_generator_matrix(family, 0.0) * inverse_of(shifted_generator_matrix(family, s));
  return operator_norm(product, family.norm_kind());
}

double stability_constant(const GeneratorFamily& family, int samples) {
  if (samples < 2) throw DomainError("stability_constant needs at least 2 samples");
  const double horizon = family.horizon();
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double s = i == samples ? horizon : horizon * static_cast<double>(i) / samples;
    best = std::max(best, op_norm_X_to_Y_inverse(family, s));
  }
  return best;
}

}  // namespace evo
