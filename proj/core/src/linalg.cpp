#include "evopagator/linalg.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "evopagator/errors.hpp"

namespace evo {

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

}  // namespace

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale_of(m);
}

bool is_skew_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m + m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale_of(m);
}

CMatrix matrix_exponential(const CMatrix& m, double tau) {
  if (m.rows() != m.cols()) throw ContractViolation("matrix_exponential of a non-square matrix");
  if (tau == 0.0) return CMatrix::Identity(m.rows(), m.cols());
  if (is_skew_hermitian(m)) return SkewHermitianExponential(m).matrix(tau);
  const CMatrix scaled = m * tau;
  return scaled.exp();
}

SkewHermitianExponential::SkewHermitianExponential(const CMatrix& skew) {
  // skew = i H with H Hermitian; symmetrize H to remove roundoff asymmetry.
  const CMatrix h = cplx(0.0, -1.0) * skew;
  const CMatrix herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  vectors_ = eig.eigenvectors();
  frequencies_ = eig.eigenvalues();
  // Two Newton-Schulz steps push V^* V to the identity at working precision;
  // otherwise the tiny non-unitarity of V drifts the norm linearly in the
  // number of factors of a long product.
  const CMatrix id = CMatrix::Identity(vectors_.rows(), vectors_.cols());
  for (int step = 0; step < 2; ++step) vectors_ = vectors_ * (1.5 * id - 0.5 * (vectors_.adjoint() * vectors_));
}

CVector SkewHermitianExponential::apply(double tau, const CVector& y) const {
  CVector coeffs = vectors_.adjoint() * y;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::polar(1.0, frequencies_[k] * tau);
  return vectors_ * coeffs;
}

CMatrix SkewHermitianExponential::matrix(double tau) const {
  CVector phases(frequencies_.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, frequencies_[k] * tau);
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

CMatrix dft_matrix(Eigen::Index n) {
  CMatrix f(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto jk = static_cast<double>((j * k) % n);
      f(k, j) = std::polar(1.0, -2.0 * std::numbers::pi * jk / static_cast<double>(n));
    }
  }
  return f;
}

CVector integrate_linear_ode(const std::function<CVector(double, const CVector&)>& rhs, double t0, double t1,
                             const CVector& y0, double tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Eigen::Index n = y0.size();
  if (t0 == t1) return y0;
  // Integrate in sigma in [0, |t1 - t0|] with t = t0 + sign * sigma.
  const double sign = t1 > t0 ? 1.0 : -1.0;
  State x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[2 * i] = y0[i].real();
    x[2 * i + 1] = y0[i].imag();
  }
  CVector work(n);
  auto system = [&](const State& state, State& dxdt, double sigma) {
    for (Eigen::Index i = 0; i < n; ++i) work[i] = cplx(state[2 * i], state[2 * i + 1]);
    const CVector d = rhs(t0 + sign * sigma, work);
    for (Eigen::Index i = 0; i < n; ++i) {
      dxdt[2 * i] = sign * d[i].real();
      dxdt[2 * i + 1] = sign * d[i].imag();
    }
  };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  const double length = std::abs(t1 - t0);
  odeint::integrate_adaptive(stepper, system, x, 0.0, length, std::min(1e-3, length));
  CVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = cplx(x[2 * i], x[2 * i + 1]);
    if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag())) {
      throw std::runtime_error("reference ODE integration produced non-finite values");
    }
  }
  return out;
}

}  // namespace evo
