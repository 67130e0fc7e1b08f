#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <map>
#include <string>

#include <Eigen/LU>

#include "evopagator/composite.hpp"
#include "evopagator/generator_family.hpp"
#include "evopagator/linalg.hpp"

namespace evo {

// ---------------------------------------------------------------------------
// Scalar potentials and modulations

/// sum_{n=1}^{depth} 2^{-alpha n} cos(2^n xi). alpha = 1 is the classical
/// Weierstrass function g.
double weierstrass(double alpha, int depth, double xi);

/// Ramp potential on the circle of circumference 2L: 0 on [-L, 0], xi on
/// [0, 1], 1 on [1, L - 1], L - xi on [L - 1, L]. Requires L >= 2.
double lipschitz_hat(double half_period, double xi);

/// Scalar modulation m(t) with an optional known Lipschitz constant.
struct Modulation {
  std::function<double(double)> value;
  std::optional<double> lipschitz;
  std::string label;

  double operator()(double t) const { return value(t); }

  static Modulation zero();
  static Modulation linear(double slope = 1.0);
  /// amplitude * weierstrass(alpha, depth, t).
  static Modulation weierstrass(double alpha, int depth, double amplitude = 1.0);
};

// ---------------------------------------------------------------------------
// Matrix families

/// A(t) = A_0 + m(t) A_1 with exact frozen exponentials. When A_0 and A_1 are
/// skew-Hermitian (the i(H_0 + m H_1) form) the exponentials are unitary.
class MatrixFamily final : public GeneratorFamily {
 public:
  MatrixFamily(CMatrix a0, CMatrix a1, Modulation modulation, double horizon, double omega, NormKind norm);

  FamilyKind kind() const noexcept override { return FamilyKind::kMatrix; }
  Eigen::Index dimension() const noexcept override { return a0_.rows(); }
  double omega() const noexcept override { return omega_; }
  double horizon() const noexcept override { return horizon_; }
  NormKind norm_kind() const noexcept override { return norm_; }
  std::string describe() const override;
  std::optional<double> lipschitz_constant() const override { return lipschitz_; }

  const Modulation& modulation() const noexcept { return modulation_; }
  bool skew_hermitian() const noexcept { return skew_; }

  CMatrix generator_matrix(double t) const override;
  CVector do_generator_action(double t, const CVector& y) const override;
  CVector do_frozen_exponential(double t, double tau, const CVector& y) const override;
  CVector do_shifted_inverse(double t, const CVector& x) const override;

 private:
  CMatrix a0_;
  CMatrix a1_;
  Modulation modulation_;
  double horizon_;
  double omega_;
  NormKind norm_;
  bool skew_;
  std::optional<double> lipschitz_;
};

/// A(t) = i (H0 + m(t) H1), omega = 0. Throws ConstructionError unless H0, H1
/// are Hermitian of equal size.
std::shared_ptr<const MatrixFamily> make_matrix_family(const CMatrix& h0, const CMatrix& h1, Modulation modulation,
                                                       double horizon);

/// General A(t) = A0 + m(t) A1; the caller vouches for the growth bound omega
/// in the given norm.
std::shared_ptr<const MatrixFamily> make_general_matrix_family(const CMatrix& a0, const CMatrix& a1,
                                                               Modulation modulation, double horizon, double omega,
                                                               NormKind norm = NormKind::kEuclidean);

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

// ---------------------------------------------------------------------------
// Translation group on a periodic grid

/// e^{A_0 t} on N samples of a 2L-periodic function at xi_j = -L + j 2L/N:
/// Fourier mode k in {-N/2, ..., N/2 - 1} is multiplied by e^{i pi k t / L},
/// which is the translation x(xi) -> x(xi + t) of the band-limited interpolant.
class SpectralShiftGroup {
 public:
  SpectralShiftGroup(int size, double half_period);

  int size() const noexcept { return size_; }
  double half_period() const noexcept { return half_period_; }
  double cell() const noexcept { return 2.0 * half_period_ / size_; }
  double node(int j) const noexcept { return -half_period_ + j * cell(); }
  Eigen::VectorXd nodes() const;

  /// i pi k / L for each DFT bin.
  const CVector& symbol() const noexcept { return symbol_; }

  CVector apply(double t, const CVector& y) const;
  CVector generator_action(const CVector& y) const;
  CVector to_modes(const CVector& y) const;
  CVector from_modes(const CVector& modes) const;

  /// Dense matrices; intended for N <= 512.
  CMatrix matrix(double t) const;
  CMatrix generator_matrix() const;

 private:
  int size_;
  double half_period_;
  CVector symbol_;
};

/// Throws ConstructionError unless N is a power of two and L > 0.
SpectralShiftGroup make_translation_group(int size, double half_period);

/// A(t) = c(t) A_0 on the spectral grid, diagonal in the Fourier basis.
/// c = 1 gives the constant translation generator.
class TranslationFamily final : public GeneratorFamily {
 public:
  TranslationFamily(SpectralShiftGroup group, Modulation speed, double horizon);

  FamilyKind kind() const noexcept override { return FamilyKind::kSpectralShift; }
  Eigen::Index dimension() const noexcept override { return group_.size(); }
  double omega() const noexcept override { return 0.0; }
  double horizon() const noexcept override { return horizon_; }
  std::string describe() const override;
  std::optional<double> lipschitz_constant() const override { return lipschitz_; }

  const SpectralShiftGroup& group() const noexcept { return group_; }

  CMatrix generator_matrix(double t) const override;
  std::optional<CVector> diagonal_symbol(double t) const override;
  CVector do_generator_action(double t, const CVector& y) const override;
  CVector do_frozen_exponential(double t, double tau, const CVector& y) const override;
  CVector do_shifted_inverse(double t, const CVector& x) const override;

 private:
  SpectralShiftGroup group_;
  Modulation speed_;
  double horizon_;
  std::optional<double> lipschitz_;
};

std::shared_ptr<const TranslationFamily> make_translation_family(const SpectralShiftGroup& group, double horizon,
                                                                 Modulation speed = {});

// ---------------------------------------------------------------------------
// Covariant multiplication perturbations

/// kConstant (profile 1) is the trivial control potential.
enum class PotentialKind { kLipschitzHat, kWeierstrass, kConstant };

/// Multiplier f for B = multiplication by f. Real (amplitude * profile) by
/// default; with `skew` set, f = i * amplitude * profile so B is skew-adjoint.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::kLipschitzHat;
  double alpha = 1.0;
  int depth = 20;
  double amplitude = 1.0;
  bool skew = false;

  double profile(double half_period, double xi) const;
  cplx multiplier(double half_period, double xi) const;
  std::string describe() const;
};

/// B(t) = e^{A_0 t} M_f e^{-A_0 t}; on grid-multiples of the cell this is
/// multiplication by f(xi + t).
class CovariantMultiplication final : public BoundedPerturbation {
 public:
  CovariantMultiplication(SpectralShiftGroup group, PotentialSpec potential);

  Eigen::Index dimension() const noexcept override { return group_.size(); }
  CVector apply(double t, const CVector& y) const override;
  CMatrix matrix(double t) const override;
  double sup_norm() const override { return samples_.cwiseAbs().maxCoeff(); }
  std::string describe() const override;

  const CVector& samples() const noexcept { return samples_; }
  const PotentialSpec& potential() const noexcept { return potential_; }
  const SpectralShiftGroup& group() const noexcept { return group_; }

 private:
  SpectralShiftGroup group_;
  PotentialSpec potential_;
  CVector samples_;
};

std::shared_ptr<const CovariantMultiplication> make_covariant_perturbation(const SpectralShiftGroup& group,
                                                                           const PotentialSpec& potential);

/// A(t) = A_0 + B(t) with B covariant. Frozen exponentials use
/// e^{A(t) tau} = e^{A_0 t} e^{(A_0 + M_f) tau} e^{-A_0 t}, with the inner
/// exponential from a cached diagonalization (skew f) or cached Pade
/// exponentials per tau (real f). omega = max |Re f|.
class CovariantFamily final : public CompositeFamily {
 public:
  CovariantFamily(std::shared_ptr<const TranslationFamily> free,
                  std::shared_ptr<const CovariantMultiplication> perturbation, double horizon);

  FamilyKind kind() const noexcept override { return FamilyKind::kShiftedMultiplication; }
  std::string describe() const override;

  const SpectralShiftGroup& group() const noexcept { return group_; }
  const CovariantMultiplication& covariant() const noexcept { return *covariant_; }

  /// e^{A_0 t} e^{B t} y, the closed form of U(t, 0) y.
  CVector closed_form(double t, const CVector& y) const;

  CMatrix generator_matrix(double t) const override;
  CVector do_generator_action(double t, const CVector& y) const override;
  CVector do_frozen_exponential(double t, double tau, const CVector& y) const override;
  CVector do_shifted_inverse(double t, const CVector& x) const override;

 private:
  CVector inner_exponential(double tau, const CVector& y) const;

  SpectralShiftGroup group_;
  std::shared_ptr<const CovariantMultiplication> covariant_;
  CMatrix inner_;  // A_0 + M_f
  std::optional<SkewHermitianExponential> skew_exp_;
  Eigen::PartialPivLU<CMatrix> shifted_lu_;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, CMatrix> exp_cache_;
};

/// Throws ConstructionError for N > 512 (dense inner generator).
std::shared_ptr<const CovariantFamily> make_covariant_family(const SpectralShiftGroup& group,
                                                             const PotentialSpec& potential, double horizon);

/// sup over `samples` equispaced xi in one period of |f(xi + delta) - f(xi)|.
double modulus_of_continuity(const PotentialSpec& potential, double half_period, double delta, int samples);

}  // namespace evo
