#include "evopagator/state.hpp"

#include <cmath>
#include <string>

#include "evopagator/errors.hpp"

namespace evo {

const char* to_string(NormKind kind) noexcept {
  switch (kind) {
    case NormKind::kEuclidean:
      return "euclidean";
    case NormKind::kMaximum:
      return "maximum";
  }
  return "unknown";
}

double vector_norm(const CVector& v, NormKind kind) {
  if (v.size() == 0) return 0.0;
  return kind == NormKind::kEuclidean ? v.norm() : v.cwiseAbs().maxCoeff();
}

double operator_norm(const CMatrix& m, NormKind kind) {
  if (m.size() == 0) return 0.0;
  if (kind == NormKind::kMaximum) return m.cwiseAbs().rowwise().sum().maxCoeff();
  if (m.rows() <= 16) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

StateVector::StateVector(CVector entries, NormKind kind) : entries_(std::move(entries)), kind_(kind) {
  if (entries_.size() == 0) throw DomainError("state vector must have positive length");
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    if (!std::isfinite(entries_[i].real()) || !std::isfinite(entries_[i].imag())) {
      throw DomainError("state vector entry " + std::to_string(i) + " is not finite");
    }
  }
}

double StateVector::distance(const StateVector& other) const {
  require_same_kind(*this, other);
  if (size() != other.size()) throw ContractViolation("distance between vectors of different length");
  return vector_norm(entries_ - other.entries_, kind_);
}

void require_same_kind(const StateVector& a, const StateVector& b) {
  if (a.kind() != b.kind()) {
    throw ContractViolation(std::string("norm kinds differ: ") + to_string(a.kind()) + " vs " + to_string(b.kind()));
  }
}

}  // namespace evo
