#include "evopagator/composite.hpp"

#include <Eigen/LU>

#include "evopagator/errors.hpp"
#include "evopagator/linalg.hpp"

namespace evo {

MatrixPerturbation::MatrixPerturbation(Eigen::Index dimension, std::function<CMatrix(double)> value, double sup_norm,
                                       std::string label)
    : dimension_(dimension), value_(std::move(value)), sup_norm_(sup_norm), label_(std::move(label)) {
  if (dimension_ <= 0) throw ConstructionError("perturbation dimension must be positive");
  if (!value_) throw ConstructionError("perturbation needs a value function");
  if (!(sup_norm_ >= 0.0)) throw ConstructionError("sup norm must be non-negative");
}

std::shared_ptr<const MatrixPerturbation> MatrixPerturbation::scalar(Eigen::Index dimension, cplx beta) {
  const CMatrix m = beta * CMatrix::Identity(dimension, dimension);
  return std::make_shared<const MatrixPerturbation>(
      dimension, [m](double) { return m; }, std::abs(beta),
      "scalar(" + std::to_string(beta.real()) + "+" + std::to_string(beta.imag()) + "i)");
}

std::shared_ptr<const MatrixPerturbation> MatrixPerturbation::zero(Eigen::Index dimension) {
  return scalar(dimension, cplx(0.0, 0.0));
}

CompositeFamily::CompositeFamily(std::shared_ptr<const GeneratorFamily> free,
                                 std::shared_ptr<const BoundedPerturbation> perturbation, double omega, double horizon)
    : free_(std::move(free)), perturbation_(std::move(perturbation)), omega_(omega), horizon_(horizon) {
  if (!free_ || !perturbation_) throw ConstructionError("composite family needs both parts");
  if (free_->dimension() != perturbation_->dimension()) throw ConstructionError("composite parts differ in dimension");
  if (!(horizon_ > 0.0) || horizon_ > free_->horizon()) {
    throw ConstructionError("composite horizon must lie in (0, horizon of the free part]");
  }
  if (!(omega_ >= 0.0)) throw ConstructionError("omega must be non-negative");
}

std::string CompositeFamily::describe() const {
  return "composite[" + free_->describe() + " + " + perturbation_->describe() + "]";
}

CMatrix CompositeFamily::generator_matrix(double t) const {
  return free_->generator_matrix(0.0) + perturbation_->matrix(t);
}

CVector CompositeFamily::do_generator_action(double t, const CVector& y) const {
  return free_->do_generator_action(0.0, y) + perturbation_->apply(t, y);
}

CVector CompositeFamily::do_frozen_exponential(double t, double tau, const CVector& y) const {
  return matrix_exponential(generator_matrix(t), tau) * y;
}

CVector CompositeFamily::do_shifted_inverse(double t, const CVector& x) const {
  CMatrix m = generator_matrix(t);
  m.diagonal().array() -= shift();
  return Eigen::PartialPivLU<CMatrix>(m).solve(x);
}

std::shared_ptr<const CompositeFamily> make_composite_family(std::shared_ptr<const GeneratorFamily> free,
                                                             std::shared_ptr<const BoundedPerturbation> perturbation,
                                                             double horizon, std::optional<double> omega) {
  if (!free || !perturbation) throw ConstructionError("composite family needs both parts");
  const double w = omega.value_or(free->omega() + perturbation->sup_norm());
  return std::make_shared<const CompositeFamily>(std::move(free), std::move(perturbation), w, horizon);
}

}  // namespace evo
