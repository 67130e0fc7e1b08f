#include "evopagator/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "evopagator/errors.hpp"
#include "evopagator/norms.hpp"

namespace evo {

namespace {

constexpr cplx kI{0.0, 1.0};

Eigen::FFT<double>& fft_engine() {
  // kissfft caches twiddle tables per size; one engine per thread.
  thread_local Eigen::FFT<double> engine;
  return engine;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------------------

double weierstrass(double alpha, int depth, double xi) {
  double sum = 0.0;
  double freq = 1.0;
  for (int n = 1; n <= depth; ++n) {
    freq *= 2.0;
    sum += std::pow(2.0, -alpha * n) * std::cos(freq * xi);
  }
  return sum;
}

double lipschitz_hat(double half_period, double xi) {
  if (!(half_period >= 2.0)) throw ConstructionError("hat potential needs half period >= 2");
  const double period = 2.0 * half_period;
  // Reduce to [-L, L).
  double x = std::fmod(xi + half_period, period);
  if (x < 0.0) x += period;
  x -= half_period;
  if (x <= 0.0) return 0.0;
  if (x <= 1.0) return x;
  if (x <= half_period - 1.0) return 1.0;
  return half_period - x;
}

Modulation Modulation::zero() { return {[](double) { return 0.0; }, 0.0, "zero"}; }

Modulation Modulation::linear(double slope) {
  return {[slope](double t) { return slope * t; }, std::abs(slope), "linear(" + std::to_string(slope) + ")"};
}

Modulation Modulation::weierstrass(double alpha, int depth, double amplitude) {
  std::ostringstream label;
  label << "weierstrass(alpha=" << alpha << ",depth=" << depth << ",amp=" << amplitude << ")";
  return {[=](double t) { return amplitude * evo::weierstrass(alpha, depth, t); }, std::nullopt, label.str()};
}

// ---------------------------------------------------------------------------

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

MatrixFamily::MatrixFamily(CMatrix a0, CMatrix a1, Modulation modulation, double horizon, double omega,
                           NormKind norm)
    : a0_(std::move(a0)),
      a1_(std::move(a1)),
      modulation_(std::move(modulation)),
      horizon_(horizon),
      omega_(omega),
      norm_(norm),
      skew_(false) {
  if (a0_.rows() == 0 || a0_.rows() != a0_.cols() || a1_.rows() != a0_.rows() || a1_.cols() != a0_.cols()) {
    throw ConstructionError("matrix family needs square matrices of equal size");
  }
  if (!modulation_.value) throw ConstructionError("matrix family needs a modulation");
  if (!(horizon_ > 0.0)) throw ConstructionError("horizon must be positive");
  if (!(omega_ >= 0.0)) throw ConstructionError("omega must be non-negative");
  skew_ = norm_ == NormKind::kEuclidean && is_skew_hermitian(a0_) && is_skew_hermitian(a1_);
  if (modulation_.lipschitz) {
    CMatrix shifted0 = generator_matrix(0.0);
    shifted0.diagonal().array() -= shift();
    const CMatrix inv0 = Eigen::PartialPivLU<CMatrix>(shifted0).inverse();
    lipschitz_ = *modulation_.lipschitz * operator_norm(a1_ * inv0, norm_);
  }
}

std::string MatrixFamily::describe() const {
  std::ostringstream os;
  os << "matrix(dim=" << a0_.rows() << ",m=" << modulation_.label << ",T=" << horizon_ << ",omega=" << omega_ << ")";
  return os.str();
}

CMatrix MatrixFamily::generator_matrix(double t) const { return a0_ + modulation_(t) * a1_; }

CVector MatrixFamily::do_generator_action(double t, const CVector& y) const { return generator_matrix(t) * y; }

CVector MatrixFamily::do_frozen_exponential(double t, double tau, const CVector& y) const {
  if (tau == 0.0) return y;
  if (skew_) return SkewHermitianExponential(generator_matrix(t)).apply(tau, y);
  return matrix_exponential(generator_matrix(t), tau) * y;
}

CVector MatrixFamily::do_shifted_inverse(double t, const CVector& x) const {
  CMatrix m = generator_matrix(t);
  m.diagonal().array() -= shift();
  return Eigen::PartialPivLU<CMatrix>(m).solve(x);
}

std::shared_ptr<const MatrixFamily> make_matrix_family(const CMatrix& h0, const CMatrix& h1, Modulation modulation,
                                                       double horizon) {
  if (h0.rows() != h0.cols() || h1.rows() != h1.cols() || h0.rows() != h1.rows() || h0.rows() == 0) {
    throw ConstructionError("H0 and H1 must be square and of equal size");
  }
  if (!is_hermitian(h0) || !is_hermitian(h1)) throw ConstructionError("H0 and H1 must be Hermitian");
  return std::make_shared<const MatrixFamily>(kI * h0, kI * h1, std::move(modulation), horizon, 0.0,
                                              NormKind::kEuclidean);
}

std::shared_ptr<const MatrixFamily> make_general_matrix_family(const CMatrix& a0, const CMatrix& a1,
                                                               Modulation modulation, double horizon, double omega,
                                                               NormKind norm) {
  return std::make_shared<const MatrixFamily>(a0, a1, std::move(modulation), horizon, omega, norm);
}

// ---------------------------------------------------------------------------

SpectralShiftGroup::SpectralShiftGroup(int size, double half_period) : size_(size), half_period_(half_period) {
  if (!is_power_of_two(size_)) throw ConstructionError("grid size must be a power of two");
  if (!(half_period_ > 0.0)) throw ConstructionError("half period must be positive");
  symbol_.resize(size_);
  for (int k = 0; k < size_; ++k) {
    const int mode = k < size_ / 2 ? k : k - size_;
    symbol_[k] = kI * (std::numbers::pi * mode / half_period_);
  }
}

Eigen::VectorXd SpectralShiftGroup::nodes() const {
  Eigen::VectorXd xi(size_);
  for (int j = 0; j < size_; ++j) xi[j] = node(j);
  return xi;
}

CVector SpectralShiftGroup::to_modes(const CVector& y) const {
  if (y.size() != size_) throw ContractViolation("grid function has wrong length");
  CVector modes(size_);
  fft_engine().fwd(modes, y);
  return modes;
}

CVector SpectralShiftGroup::from_modes(const CVector& modes) const {
  CVector y(size_);
  fft_engine().inv(y, modes);
  return y;
}

CVector SpectralShiftGroup::apply(double t, const CVector& y) const {
  if (t == 0.0) return y;
  CVector modes = to_modes(y);
  for (int k = 0; k < size_; ++k) modes[k] *= std::exp(symbol_[k] * t);
  return from_modes(modes);
}

CVector SpectralShiftGroup::generator_action(const CVector& y) const {
  CVector modes = to_modes(y);
  modes.array() *= symbol_.array();
  return from_modes(modes);
}

CMatrix SpectralShiftGroup::matrix(double t) const {
  const CMatrix f = dft_matrix(size_);
  CVector phases(size_);
  for (int k = 0; k < size_; ++k) phases[k] = std::exp(symbol_[k] * t);
  return f.adjoint() * phases.asDiagonal() * f / static_cast<double>(size_);
}

CMatrix SpectralShiftGroup::generator_matrix() const {
  const CMatrix f = dft_matrix(size_);
  return f.adjoint() * symbol_.asDiagonal() * f / static_cast<double>(size_);
}

SpectralShiftGroup make_translation_group(int size, double half_period) { return SpectralShiftGroup(size, half_period); }

// ---------------------------------------------------------------------------

TranslationFamily::TranslationFamily(SpectralShiftGroup group, Modulation speed, double horizon)
    : group_(std::move(group)), speed_(std::move(speed)), horizon_(horizon) {
  if (!speed_.value) speed_ = {[](double) { return 1.0; }, 0.0, "unit"};
  if (!(horizon_ > 0.0)) throw ConstructionError("horizon must be positive");
  if (speed_.lipschitz) {
    const Eigen::ArrayXd modes = group_.symbol().array().abs();
    const Eigen::ArrayXd denom = (speed_(0.0) * group_.symbol().array() - shift()).abs();
    lipschitz_ = *speed_.lipschitz * (modes / denom).maxCoeff();
  }
}

std::string TranslationFamily::describe() const {
  std::ostringstream os;
  os << "translation(N=" << group_.size() << ",L=" << group_.half_period() << ",speed=" << speed_.label
     << ",T=" << horizon_ << ")";
  return os.str();
}

CMatrix TranslationFamily::generator_matrix(double t) const { return speed_(t) * group_.generator_matrix(); }

std::optional<CVector> TranslationFamily::diagonal_symbol(double t) const { return CVector(speed_(t) * group_.symbol()); }

CVector TranslationFamily::do_generator_action(double t, const CVector& y) const {
  return speed_(t) * group_.generator_action(y);
}

CVector TranslationFamily::do_frozen_exponential(double t, double tau, const CVector& y) const {
  return group_.apply(speed_(t) * tau, y);
}

CVector TranslationFamily::do_shifted_inverse(double t, const CVector& x) const {
  CVector modes = group_.to_modes(x);
  const double c = speed_(t);
  for (int k = 0; k < group_.size(); ++k) modes[k] /= (c * group_.symbol()[k] - shift());
  return group_.from_modes(modes);
}

std::shared_ptr<const TranslationFamily> make_translation_family(const SpectralShiftGroup& group, double horizon,
                                                                 Modulation speed) {
  return std::make_shared<const TranslationFamily>(group, std::move(speed), horizon);
}

// ---------------------------------------------------------------------------

double PotentialSpec::profile(double half_period, double xi) const {
  switch (kind) {
    case PotentialKind::kLipschitzHat:
      return lipschitz_hat(half_period, xi);
    case PotentialKind::kWeierstrass:
      return weierstrass(alpha, depth, xi);
    case PotentialKind::kConstant:
      return 1.0;
  }
  return 0.0;
}

cplx PotentialSpec::multiplier(double half_period, double xi) const {
  const double v = amplitude * profile(half_period, xi);
  return skew ? cplx(0.0, v) : cplx(v, 0.0);
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case PotentialKind::kLipschitzHat:
      os << "hat";
      break;
    case PotentialKind::kWeierstrass:
      os << "weierstrass(alpha=" << alpha << ",depth=" << depth << ")";
      break;
    case PotentialKind::kConstant:
      os << "constant";
      break;
  }
  os << "*" << amplitude << (skew ? "*i" : "");
  return os.str();
}

CovariantMultiplication::CovariantMultiplication(SpectralShiftGroup group, PotentialSpec potential)
    : group_(std::move(group)), potential_(potential), samples_(group_.size()) {
  if (potential_.kind == PotentialKind::kLipschitzHat && group_.half_period() < 2.0) {
    throw ConstructionError("the hat potential needs half period L >= 2");
  }
  if (potential_.kind == PotentialKind::kWeierstrass && (potential_.alpha <= 0.0 || potential_.alpha > 1.0)) {
    throw ConstructionError("weierstrass exponent must lie in (0, 1]");
  }
  for (int j = 0; j < group_.size(); ++j) samples_[j] = potential_.multiplier(group_.half_period(), group_.node(j));
}

CVector CovariantMultiplication::apply(double t, const CVector& y) const {
  if (t == 0.0) return samples_.cwiseProduct(y);
  return group_.apply(t, samples_.cwiseProduct(group_.apply(-t, y)));
}

CMatrix CovariantMultiplication::matrix(double t) const {
  if (t == 0.0) return samples_.asDiagonal();
  return group_.matrix(t) * samples_.asDiagonal() * group_.matrix(-t);
}

std::string CovariantMultiplication::describe() const {
  std::ostringstream os;
  os << "covariant(" << potential_.describe() << ",N=" << group_.size() << ",L=" << group_.half_period() << ")";
  return os.str();
}

std::shared_ptr<const CovariantMultiplication> make_covariant_perturbation(const SpectralShiftGroup& group,
                                                                           const PotentialSpec& potential) {
  return std::make_shared<const CovariantMultiplication>(group, potential);
}

// ---------------------------------------------------------------------------

namespace {

double covariant_omega(const CovariantMultiplication& b) { return b.samples().real().cwiseAbs().maxCoeff(); }

}  // namespace

CovariantFamily::CovariantFamily(std::shared_ptr<const TranslationFamily> free,
                                 std::shared_ptr<const CovariantMultiplication> perturbation, double horizon)
    : CompositeFamily(free, perturbation, perturbation ? covariant_omega(*perturbation) : 0.0, horizon),
      group_(free->group()),
      covariant_(std::move(perturbation)) {
  if (group_.size() > 512) throw ConstructionError("covariant family is limited to N <= 512");
  inner_ = group_.generator_matrix();
  inner_.diagonal() += covariant_->samples();
  if (covariant_->samples().real().cwiseAbs().maxCoeff() == 0.0) skew_exp_.emplace(inner_);
  CMatrix shifted = inner_;
  shifted.diagonal().array() -= shift();
  shifted_lu_.compute(shifted);
}

std::string CovariantFamily::describe() const {
  std::ostringstream os;
  os << "covariant-family(" << covariant_->describe() << ",T=" << horizon() << ")";
  return os.str();
}

CVector CovariantFamily::closed_form(double t, const CVector& y) const {
  CVector z(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) z[j] = std::exp(covariant_->samples()[j] * t) * y[j];
  return group_.apply(t, z);
}

CMatrix CovariantFamily::generator_matrix(double t) const {
  if (t == 0.0) return inner_;
  return group_.matrix(t) * inner_ * group_.matrix(-t);
}

CVector CovariantFamily::do_generator_action(double t, const CVector& y) const {
  return group_.generator_action(y) + covariant_->apply(t, y);
}

CVector CovariantFamily::inner_exponential(double tau, const CVector& y) const {
  if (tau == 0.0) return y;
  if (skew_exp_) return skew_exp_->apply(tau, y);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = exp_cache_.find(tau); it != exp_cache_.end()) return it->second * y;
  }
  CMatrix e = matrix_exponential(inner_, tau);
  CVector out = e * y;
  std::lock_guard lock(cache_mutex_);
  exp_cache_.emplace(tau, std::move(e));
  return out;
}

CVector CovariantFamily::do_frozen_exponential(double t, double tau, const CVector& y) const {
  return group_.apply(t, inner_exponential(tau, group_.apply(-t, y)));
}

CVector CovariantFamily::do_shifted_inverse(double t, const CVector& x) const {
  return group_.apply(t, shifted_lu_.solve(group_.apply(-t, x)));
}

std::shared_ptr<const CovariantFamily> make_covariant_family(const SpectralShiftGroup& group,
                                                             const PotentialSpec& potential, double horizon) {
  auto free = make_translation_family(group, horizon);
  auto b = make_covariant_perturbation(group, potential);
  return std::make_shared<const CovariantFamily>(std::move(free), std::move(b), horizon);
}

double modulus_of_continuity(const PotentialSpec& potential, double half_period, double delta, int samples) {
  if (samples < 1) throw DomainError("modulus_of_continuity needs samples >= 1");
  const double period = 2.0 * half_period;
  double best = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double xi = -half_period + period * static_cast<double>(j) / samples;
    best = std::max(best, std::abs(potential.multiplier(half_period, xi + delta) -
                                   potential.multiplier(half_period, xi)));
  }
  return best;
}

}  // namespace evo
