#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "evopagator/generator_family.hpp"

namespace evo {

/// Time-dependent bounded operator B(t) on the discrete space.
class BoundedPerturbation {
 public:
  virtual ~BoundedPerturbation() = default;

  virtual Eigen::Index dimension() const noexcept = 0;
  virtual CVector apply(double t, const CVector& y) const = 0;
  virtual CMatrix matrix(double t) const = 0;
  /// sup over t of ||B(t)|| in the Euclidean operator norm.
  virtual double sup_norm() const = 0;
  virtual std::string describe() const = 0;
};

/// B(t) given by an explicit matrix-valued function.
class MatrixPerturbation final : public BoundedPerturbation {
 public:
  MatrixPerturbation(Eigen::Index dimension, std::function<CMatrix(double)> value, double sup_norm,
                     std::string label);

  /// B(t) = beta * Identity.
  static std::shared_ptr<const MatrixPerturbation> scalar(Eigen::Index dimension, cplx beta);
  static std::shared_ptr<const MatrixPerturbation> zero(Eigen::Index dimension);

  Eigen::Index dimension() const noexcept override { return dimension_; }
  CVector apply(double t, const CVector& y) const override { return value_(t) * y; }
  CMatrix matrix(double t) const override { return value_(t); }
  double sup_norm() const override { return sup_norm_; }
  std::string describe() const override { return label_; }

 private:
  Eigen::Index dimension_;
  std::function<CMatrix(double)> value_;
  double sup_norm_;
  std::string label_;
};

/// A(t) = A_0 + B(t) with A_0 = free(0) constant and B bounded.
///
/// The default frozen exponential forms the dense matrix A_0 + B(t); derived
/// families with more structure override it.
class CompositeFamily : public GeneratorFamily {
 public:
  CompositeFamily(std::shared_ptr<const GeneratorFamily> free, std::shared_ptr<const BoundedPerturbation> perturbation,
                  double omega, double horizon);

  FamilyKind kind() const noexcept override { return FamilyKind::kComposite; }
  Eigen::Index dimension() const noexcept override { return free_->dimension(); }
  double omega() const noexcept override { return omega_; }
  double horizon() const noexcept override { return horizon_; }
  NormKind norm_kind() const noexcept override { return free_->norm_kind(); }
  std::string describe() const override;

  const GeneratorFamily& free_part() const noexcept { return *free_; }
  const BoundedPerturbation& perturbation() const noexcept { return *perturbation_; }
  std::shared_ptr<const GeneratorFamily> free_ptr() const noexcept { return free_; }
  std::shared_ptr<const BoundedPerturbation> perturbation_ptr() const noexcept { return perturbation_; }

  CMatrix generator_matrix(double t) const override;
  CVector do_generator_action(double t, const CVector& y) const override;
  CVector do_frozen_exponential(double t, double tau, const CVector& y) const override;
  CVector do_shifted_inverse(double t, const CVector& x) const override;

 private:
  std::shared_ptr<const GeneratorFamily> free_;
  std::shared_ptr<const BoundedPerturbation> perturbation_;
  double omega_;
  double horizon_;
};

/// Composite family. Without an explicit omega the bounded-perturbation bound
/// omega(A_0) + sup ||B|| is used.
std::shared_ptr<const CompositeFamily> make_composite_family(std::shared_ptr<const GeneratorFamily> free,
                                                             std::shared_ptr<const BoundedPerturbation> perturbation,
                                                             double horizon, std::optional<double> omega = {});

}  // namespace evo
