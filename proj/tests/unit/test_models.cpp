#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "evopagator/errors.hpp"
#include "evopagator/linalg.hpp"
#include "evopagator/models.hpp"
#include "evopagator/random.hpp"
#include "oracles.hpp"

using namespace evo;

namespace {

const cplx kI{0.0, 1.0};

CVector rolled(const CVector& v, int by) {
  const int n = static_cast<int>(v.size());
  CVector out(n);
  for (int j = 0; j < n; ++j) out[j] = v[(j + by) % n];
  return out;
}

}  // namespace

TEST(Potentials, WeierstrassAtZeroIsGeometricSum) {
  EXPECT_NEAR(weierstrass(1.0, 10, 0.0), 1.0 - std::ldexp(1.0, -10), 1e-15);
  EXPECT_NEAR(weierstrass(0.5, 1, 0.3), std::cos(0.6) / std::sqrt(2.0), 1e-15);
}

TEST(Potentials, HatShapeAndPeriodicity) {
  const double l = 3.0;
  EXPECT_EQ(lipschitz_hat(l, -2.0), 0.0);
  EXPECT_NEAR(lipschitz_hat(l, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(lipschitz_hat(l, 1.7), 1.0, 1e-15);
  EXPECT_NEAR(lipschitz_hat(l, 2.5), 0.5, 1e-15);
  EXPECT_NEAR(lipschitz_hat(l, 0.5 + 2 * l), 0.5, 1e-14);
  EXPECT_NEAR(lipschitz_hat(l, 2.5 - 4 * l), 0.5, 1e-14);
  EXPECT_THROW(lipschitz_hat(1.5, 0.0), ConstructionError);
}

TEST(Potentials, ModulusOfContinuity) {
  PotentialSpec hat;
  EXPECT_NEAR(modulus_of_continuity(hat, 3.0, 0.25, 1200), 0.25, 1e-12);
  PotentialSpec w{PotentialKind::kWeierstrass, 0.5, 20, 1.0, false};
  // Holder-1/2 modulus: shrinking delta by 4 roughly halves it
  const double big = modulus_of_continuity(w, std::numbers::pi, 1e-2, 4096);
  const double small = modulus_of_continuity(w, std::numbers::pi, 2.5e-3, 4096);
  EXPECT_GT(small / big, 0.35);
  EXPECT_LT(small / big, 0.7);
}

TEST(MatrixFamily, RejectsNonHermitianInput) {
  CMatrix bad(2, 2);
  bad << 0, 1, 0, 0;
  EXPECT_THROW(make_matrix_family(bad, pauli_x(), Modulation::zero(), 1.0), ConstructionError);
  EXPECT_THROW(make_matrix_family(pauli_z(), CMatrix::Zero(3, 3), Modulation::zero(), 1.0), ConstructionError);
}

TEST(MatrixFamily, FrozenExponentialMatchesClosedForm) {
  const auto f = make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(1.0), 2.0);
  EXPECT_TRUE(f->skew_hermitian());
  EXPECT_EQ(f->omega(), 0.0);
  Rng rng(5);
  const StateVector y(rng.complex_vector(2));
  for (double t : {0.0, 0.4, 1.3, 2.0}) {
    const CMatrix h = pauli_z() + t * pauli_x();
    for (double tau : {-0.7, 0.0, 0.25, 3.0}) {
      const CVector expected = oracle::exp_i_hermitian_2x2(h, tau) * y.entries();
      EXPECT_LE((f->frozen_exponential(t, tau, y).entries() - expected).norm(), 1e-14);
    }
  }
  EXPECT_THROW(f->frozen_exponential(2.5, 1.0, y), DomainError);
  EXPECT_THROW(f->frozen_exponential(0.0, 1.0, StateVector(CVector::Ones(3))), ContractViolation);
}

TEST(MatrixFamily, ShiftedInverseInvertsShiftedGenerator) {
  Rng rng(9);
  const auto f = make_matrix_family(rng.hermitian(6), rng.hermitian(6), Modulation::linear(0.5), 1.0);
  const StateVector x(rng.complex_vector(6));
  for (double t : {0.0, 0.33, 1.0}) {
    const StateVector y = f->shifted_inverse(t, x);
    const CVector back = f->generator_action(t, y).entries() - f->shift() * y.entries();
    EXPECT_LE((back - x.entries()).norm(), 1e-13 * x.norm());
  }
}

TEST(MatrixFamily, LipschitzConstantOfLinearModulation) {
  const auto f = make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(3.0), 1.0);
  ASSERT_TRUE(f->lipschitz_constant());
  EXPECT_NEAR(*f->lipschitz_constant(), 3.0 / std::sqrt(2.0), 1e-14);
  const auto w = make_matrix_family(pauli_z(), pauli_x(), Modulation::weierstrass(0.5, 10), 1.0);
  EXPECT_FALSE(w->lipschitz_constant());
}

TEST(SpectralShift, TranslatesBandLimitedFunctions) {
  const auto g = make_translation_group(32, 2.0);
  const auto xi = g.nodes();
  CVector y(32);
  for (int j = 0; j < 32; ++j) y[j] = std::cos(std::numbers::pi * xi[j] / 2.0) + 0.5 * std::sin(3 * std::numbers::pi * xi[j] / 2.0);
  const double t = 0.37;
  const CVector z = g.apply(t, y);
  for (int j = 0; j < 32; ++j) {
    const double s = xi[j] + t;
    const double expected = std::cos(std::numbers::pi * s / 2.0) + 0.5 * std::sin(3 * std::numbers::pi * s / 2.0);
    EXPECT_NEAR(z[j].real(), expected, 1e-13);
    EXPECT_NEAR(z[j].imag(), 0.0, 1e-13);
  }
}

TEST(SpectralShift, CellShiftIsExactRollAndGroupLaw) {
  const auto g = make_translation_group(16, 3.0);
  Rng rng(2);
  const CVector y = rng.complex_vector(16);
  EXPECT_LE((g.apply(g.cell(), y) - rolled(y, 1)).norm(), 1e-13);
  EXPECT_LE((g.apply(-3 * g.cell(), y) - rolled(y, 13)).norm(), 1e-13);
  EXPECT_LE((g.apply(0.3, g.apply(0.9, y)) - g.apply(1.2, y)).norm(), 1e-13);
  EXPECT_NEAR(g.apply(0.77, y).norm(), y.norm(), 1e-13);
  EXPECT_LE((g.matrix(0.77) * y - g.apply(0.77, y)).norm(), 1e-12);
  const CMatrix gen = g.generator_matrix();
  EXPECT_LE((gen * y - g.generator_action(y)).norm(), 1e-11);
  EXPECT_LE((gen + gen.adjoint()).norm(), 1e-11);
  EXPECT_LE((oracle::taylor_exp(gen, 0.77) * y - g.apply(0.77, y)).norm(), 1e-11);
}

TEST(SpectralShift, ConstructionChecks) {
  EXPECT_THROW(make_translation_group(12, 1.0), ConstructionError);
  EXPECT_THROW(make_translation_group(16, 0.0), ConstructionError);
}

TEST(TranslationFamily, DiagonalSymbolScalesWithSpeed) {
  const auto g = make_translation_group(8, 2.0);
  const auto f = make_translation_family(g, 1.0, Modulation::linear(2.0));
  const auto sym = f->diagonal_symbol(0.5);
  ASSERT_TRUE(sym);
  EXPECT_LE((*sym - 1.0 * g.symbol()).norm(), 1e-15);
  Rng rng(4);
  const StateVector y(rng.complex_vector(8));
  EXPECT_LE((f->frozen_exponential(0.5, 0.3, y).entries() - g.apply(0.3, y.entries())).norm(), 1e-13);
}

TEST(Covariant, GridShiftIsMultiplicationByShiftedProfile) {
  const auto g = make_translation_group(32, 2.0);
  const auto b = make_covariant_perturbation(g, PotentialSpec{});
  Rng rng(8);
  const CVector y = rng.complex_vector(32);
  const double t = 3 * g.cell();
  const CVector expected = rolled(b->samples(), 3).cwiseProduct(y);
  EXPECT_LE((b->apply(t, y) - expected).norm(), 1e-13);
  EXPECT_LE((b->matrix(0.41) * y - b->apply(0.41, y)).norm(), 1e-12);
  EXPECT_NEAR(b->sup_norm(), 1.0, 1e-15);
}

TEST(Covariant, OmegaAndSkewVariant) {
  const auto g = make_translation_group(16, 2.0);
  PotentialSpec real{PotentialKind::kLipschitzHat, 1.0, 20, 0.7, false};
  EXPECT_NEAR(make_covariant_family(g, real, 1.0)->omega(), 0.7, 1e-15);
  PotentialSpec skew = real;
  skew.skew = true;
  const auto f = make_covariant_family(g, skew, 1.0);
  EXPECT_EQ(f->omega(), 0.0);
  Rng rng(1);
  const StateVector y(rng.complex_vector(16));
  EXPECT_NEAR(f->frozen_exponential(0.3, 2.0, y).norm(), y.norm(), 1e-12);
  EXPECT_THROW(make_covariant_family(make_translation_group(1024, 2.0), real, 1.0), ConstructionError);
}

TEST(Covariant, FrozenExponentialMatchesDenseExponential) {
  const auto g = make_translation_group(16, 2.0);
  for (bool skew : {false, true}) {
    PotentialSpec p{PotentialKind::kLipschitzHat, 1.0, 20, 1.0, skew};
    const auto f = make_covariant_family(g, p, 1.0);
    Rng rng(12);
    const StateVector y(rng.complex_vector(16));
    for (double t : {0.0, 0.25, 0.6}) {
      const CVector expected = oracle::taylor_exp(f->generator_matrix(t), 0.45) * y.entries();
      EXPECT_LE((f->frozen_exponential(t, 0.45, y).entries() - expected).norm(), 1e-11 * y.norm());
    }
  }
}

TEST(Covariant, ClosedFormSolvesTheEvolutionEquation) {
  const auto g = make_translation_group(16, 2.0);
  const auto f = make_covariant_family(g, PotentialSpec{}, 1.0);
  Rng rng(6);
  const CVector y = rng.complex_vector(16);
  EXPECT_LE((f->closed_form(0.0, y) - y).norm(), 1e-14);
  const CVector rk = oracle::rk4([&](double t) { return f->generator_matrix(t); }, 0.0, 1.0, y, 4000);
  EXPECT_LE((f->closed_form(1.0, y) - rk).norm(), 1e-9 * y.norm());
}
