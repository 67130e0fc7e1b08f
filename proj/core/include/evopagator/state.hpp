#pragma once

#include <complex>

#include <Eigen/Dense>

namespace evo {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Which X-norm a state lives in. Euclidean models L^2 / Hilbert spaces,
/// maximum models the sup-norm space of the translation counterexample.
enum class NormKind { kEuclidean, kMaximum };

const char* to_string(NormKind kind) noexcept;

double vector_norm(const CVector& v, NormKind kind);

/// Induced operator norm X -> X: largest singular value for the Euclidean
/// norm, maximum absolute row sum for the maximum norm.
double operator_norm(const CMatrix& m, NormKind kind);

/// A finite state vector tagged with its norm kind. Entries are always finite.
class StateVector {
 public:
  explicit StateVector(CVector entries, NormKind kind = NormKind::kEuclidean);

  const CVector& entries() const noexcept { return entries_; }
  NormKind kind() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return entries_.size(); }

  double norm() const { return vector_norm(entries_, kind_); }

  /// ||*this - other|| in the shared norm kind.
  double distance(const StateVector& other) const;

  /// Same kind, new entries.
  StateVector with_entries(CVector entries) const { return StateVector(std::move(entries), kind_); }

 private:
  CVector entries_;
  NormKind kind_;
};

/// Throws ContractViolation when the kinds differ.
void require_same_kind(const StateVector& a, const StateVector& b);

}  // namespace evo
