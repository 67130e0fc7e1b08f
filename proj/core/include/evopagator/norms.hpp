#pragma once

#include <optional>

#include "evopagator/generator_family.hpp"

namespace evo {

/// ||y||_t = ||(A(t) - (omega + 1)) y||.
double graph_norm(const GeneratorFamily& family, double t, const StateVector& y);

/// ||(A(t) - A(s)) A_(0)^{-1}||, the (Y, X) norm of A(t) - A(s) with Y
/// renormed by A_(0) = A(0) - (omega + 1).
double op_norm_Y_to_X(const GeneratorFamily& family, double t, double s);

/// Evaluates ||A(t) - A(s)||_{Y,X} repeatedly with A_(0)^{-1} factored once.
class YXNormEvaluator {
 public:
  explicit YXNormEvaluator(const GeneratorFamily& family);

  double operator()(double t, double s) const;

  /// ||A(t) - A(s)||_{Y,X} given the dense matrices of A(t) and A(s).
  double from_matrices(const CMatrix& at, const CMatrix& as) const;
  bool diagonal() const noexcept { return symbol0_.has_value(); }

 private:
  const GeneratorFamily& family_;
  std::optional<Eigen::ArrayXd> symbol0_;  // |lambda_k(0) - shift|
  CMatrix inverse0_;
};

/// ||A_(0) A_(s)^{-1}||, the (X, Y) norm of A_(s)^{-1}.
double op_norm_X_to_Y_inverse(const GeneratorFamily& family, double s);

/// sup over s_i = i T / samples, i = 0..samples, of ||A_(s_i)^{-1}||_{X,Y}.
/// Doubling `samples` refines the sample set, so the result never decreases.
double stability_constant(const GeneratorFamily& family, int samples);

/// Dense A_(t) = A(t) - (omega + 1).
CMatrix shifted_generator_matrix(const GeneratorFamily& family, double t);

}  // namespace evo
