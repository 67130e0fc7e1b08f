#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "evopagator/errors.hpp"
#include "evopagator/state.hpp"

using namespace evo;

TEST(StateVector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(StateVector{CVector()}, DomainError);
  CVector v = CVector::Ones(3);
  v[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(StateVector{v}, DomainError);
  v[1] = cplx(0.0, std::numeric_limits<double>::infinity());
  EXPECT_THROW(StateVector{v}, DomainError);
}

TEST(StateVector, NormKinds) {
  CVector v(3);
  v << cplx(3, 4), 1.0, cplx(0, -2);
  EXPECT_DOUBLE_EQ(StateVector(v).norm(), std::sqrt(25.0 + 1.0 + 4.0));
  EXPECT_DOUBLE_EQ(StateVector(v, NormKind::kMaximum).norm(), 5.0);
}

TEST(StateVector, MixingKindsIsAContractViolation) {
  const StateVector a(CVector::Ones(2));
  const StateVector b(CVector::Ones(2), NormKind::kMaximum);
  EXPECT_THROW(a.distance(b), ContractViolation);
  EXPECT_THROW(require_same_kind(a, b), ContractViolation);
  EXPECT_EQ(a.with_entries(CVector::Zero(2)).kind(), NormKind::kEuclidean);
  EXPECT_EQ(b.with_entries(CVector::Zero(2)).kind(), NormKind::kMaximum);
}

TEST(OperatorNorm, EuclideanIsLargestSingularValue) {
  CMatrix m(2, 2);
  m << 3, 0, 4, 5;
  // Singular values of [[3,0],[4,5]] are 3 sqrt(5) and sqrt(5).
  EXPECT_NEAR(operator_norm(m, NormKind::kEuclidean), 3.0 * std::sqrt(5.0), 1e-13);
}

TEST(OperatorNorm, MaximumIsRowSum) {
  CMatrix m(2, 2);
  m << cplx(0, 1), -2, 0.5, 0.5;
  EXPECT_DOUBLE_EQ(operator_norm(m, NormKind::kMaximum), 3.0);
}

TEST(OperatorNorm, LargeMatricesAgreeWithSmallPath) {
  // Above 16 rows a divide-and-conquer SVD is used; compare with the power
  // iteration on m^* m.
  CMatrix m = CMatrix::Zero(40, 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) m(i, j) = cplx(std::sin(i + 2.0 * j), std::cos(3.0 * i - j));
  }
  CVector v = CVector::Ones(40);
  for (int k = 0; k < 500; ++k) v = (m.adjoint() * (m * v)).normalized();
  EXPECT_NEAR(operator_norm(m, NormKind::kEuclidean), (m * v).norm(), 1e-9);
}
