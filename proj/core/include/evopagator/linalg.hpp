#pragma once

#include <functional>

#include "evopagator/state.hpp"

namespace evo {

bool is_hermitian(const CMatrix& m, double tol = 1e-12);
bool is_skew_hermitian(const CMatrix& m, double tol = 1e-12);

/// e^{M tau}. Skew-Hermitian M goes through a unitary eigendecomposition,
/// everything else through Pade scaling and squaring.
CMatrix matrix_exponential(const CMatrix& m, double tau);

/// Cached unitary diagonalization of a skew-Hermitian matrix M = i V diag(w) V^*,
/// giving e^{M tau} y = V (e^{i w tau} * (V^* y)) for any tau at O(n^2).
class SkewHermitianExponential {
 public:
  explicit SkewHermitianExponential(const CMatrix& skew);

  CVector apply(double tau, const CVector& y) const;
  CMatrix matrix(double tau) const;

 private:
  CMatrix vectors_;
  Eigen::VectorXd frequencies_;
};

/// Discrete Fourier matrix F with (F x)_k = sum_j x_j e^{-2 pi i j k / n}.
CMatrix dft_matrix(Eigen::Index n);

/// Integrates y' = f(t, y) from t0 to t1 (either direction) with an adaptive
/// Dormand-Prince controlled stepper at absolute and relative tolerance `tol`.
CVector integrate_linear_ode(const std::function<CVector(double, const CVector&)>& rhs, double t0, double t1,
                             const CVector& y0, double tol);

}  // namespace evo
