#pragma once

#include <optional>
#include <string>

#include "evopagator/state.hpp"

namespace evo {

enum class FamilyKind { kMatrix, kSpectralShift, kShiftedMultiplication, kComposite };

const char* to_string(FamilyKind kind) noexcept;

/// The map t -> A(t) on [0, T], each A(t) generating a group with
/// ||e^{A(t)tau}|| <= e^{omega |tau|}.
///
/// Public entry points take StateVector and check dimension and norm kind;
/// concrete families implement the protected do_* hooks on raw vectors.
/// Implementations must be safe to call concurrently.
class GeneratorFamily {
 public:
  virtual ~GeneratorFamily() = default;

  virtual FamilyKind kind() const noexcept = 0;
  virtual Eigen::Index dimension() const noexcept = 0;
  virtual double omega() const noexcept = 0;
  virtual double horizon() const noexcept = 0;
  virtual NormKind norm_kind() const noexcept { return NormKind::kEuclidean; }
  virtual std::string describe() const = 0;

  /// Lipschitz constant of t -> A(t) in L(Y, X), Y carrying ||A_(0) . ||.
  virtual std::optional<double> lipschitz_constant() const { return std::nullopt; }

  /// A(t)y.
  StateVector generator_action(double t, const StateVector& y) const;
  /// e^{A(t) tau} y for any real tau.
  StateVector frozen_exponential(double t, double tau, const StateVector& y) const;
  /// (A(t) - (omega + 1))^{-1} x.
  StateVector shifted_inverse(double t, const StateVector& x) const;

  /// Dense matrix of A(t). Only meaningful for moderate dimensions.
  virtual CMatrix generator_matrix(double t) const = 0;

  /// Eigenvalues of A(t) in a time-independent unitary basis, for families
  /// that are diagonal in such a basis (spectral models).
  virtual std::optional<CVector> diagonal_symbol(double /*t*/) const { return std::nullopt; }

  // Raw-vector hooks, also used by internal callers that have already
  // validated their inputs.
  virtual CVector do_generator_action(double t, const CVector& y) const = 0;
  virtual CVector do_frozen_exponential(double t, double tau, const CVector& y) const = 0;
  virtual CVector do_shifted_inverse(double t, const CVector& x) const = 0;

  /// Throws DomainError when t is outside [0, T].
  void require_time(double t) const;
  /// Throws ContractViolation on dimension or norm-kind mismatch.
  void require_state(const StateVector& y) const;

  double shift() const noexcept { return omega() + 1.0; }
};

}  // namespace evo
