#include "evopagator/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "evopagator/dyson.hpp"
#include "evopagator/errors.hpp"
#include "evopagator/linalg.hpp"
#include "evopagator/models.hpp"
#include "evopagator/norms.hpp"
#include "evopagator/product_formula.hpp"
#include "evopagator/random.hpp"
#include "evopagator/variation.hpp"

namespace evo {

namespace {

constexpr cplx kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// plumbing

/// Runs fn(0..n-1) on up to worker_threads() threads; results come back in
/// index order so the merge is independent of scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_threads()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Records of one model within a study, with a pass flag per record.
struct Recorder {
  std::string study;
  std::string model;
  std::string provenance;
  std::vector<ExperimentRecord> records;
  std::vector<bool> ok;

  void add(int level, double mesh, const std::string& metric, double value, bool pass = true,
           std::map<std::string, double> aux = {}) {
    ExperimentRecord r;
    r.study = study;
    r.level = level;
    r.mesh = mesh;
    r.metric = metric;
    r.value = value;
    r.provenance = model + ": " + provenance;
    r.auxiliary = std::move(aux);
    records.push_back(std::move(r));
    ok.push_back(pass);
  }
};

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

nlohmann::json metric_summary(const Recorder& rec) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < rec.records.size(); ++i) {
    const auto& r = rec.records[i];
    auto& m = out[r.metric];
    if (m.is_null()) {
      m = {{"count", 0}, {"max", r.value}, {"min", r.value}, {"violations", 0}};
    }
    m["count"] = m["count"].get<int>() + 1;
    m["max"] = std::max(m["max"].get<double>(), r.value);
    m["min"] = std::min(m["min"].get<double>(), r.value);
    if (!rec.ok[i]) m["violations"] = m["violations"].get<int>() + 1;
  }
  return out;
}

StudyResult merge(StudyKind kind, const std::vector<Recorder>& parts, nlohmann::json extra = nlohmann::json::object()) {
  StudyResult result;
  result.study = kind;
  nlohmann::json models = nlohmann::json::object();
  for (const auto& part : parts) {
    for (std::size_t i = 0; i < part.records.size(); ++i) {
      validate(part.records[i]);
      if (!part.ok[i]) result.violations.push_back(result.records.size());
      result.records.push_back(part.records[i]);
    }
    models[part.model] = metric_summary(part);
  }
  result.summary = std::move(extra);
  result.summary["study"] = to_string(kind);
  result.summary["models"] = std::move(models);
  result.summary["records"] = result.records.size();
  result.summary["violations"] = result.violations.size();
  result.summary["passed"] = result.violations.empty();
  return result;
}

std::vector<int> level_range(const StudyConfig& cfg) {
  std::vector<int> levels;
  for (int k = cfg.level_min; k <= cfg.level_max; ++k) levels.push_back(k);
  return levels;
}

CVector unit_vector(Eigen::Index n, Eigen::Index i = 0) {
  CVector v = CVector::Zero(n);
  v[i] = 1.0;
  return v;
}

/// The single low mode e^{i pi xi / L} on the group grid.
CVector low_mode(const SpectralShiftGroup& group) {
  CVector y(group.size());
  for (int j = 0; j < group.size(); ++j) y[j] = std::exp(kI * std::numbers::pi * group.node(j) / group.half_period());
  return y;
}

int log2_exact(int n) {
  int p = 0;
  while ((1 << p) < n) ++p;
  return p;
}

/// Weierstrass potentials live on the 2 pi circle and keep their band below Nyquist.
PotentialSpec weierstrass_potential(const StudyConfig& cfg, int grid_size) {
  PotentialSpec p;
  p.kind = PotentialKind::kWeierstrass;
  p.alpha = cfg.alpha;
  p.depth = std::min(cfg.series_depth, log2_exact(grid_size) - 1);
  p.amplitude = cfg.amplitude;
  p.skew = true;
  return p;
}

PotentialSpec hat_potential(const StudyConfig& cfg) {
  PotentialSpec p;
  p.kind = PotentialKind::kLipschitzHat;
  p.amplitude = cfg.amplitude;
  return p;
}

std::shared_ptr<const CovariantFamily> covariant_model(const StudyConfig& cfg, const std::string& name, int grid_size) {
  if (name == "covariant-hat") {
    return make_covariant_family(make_translation_group(grid_size, cfg.half_period), hat_potential(cfg), cfg.horizon);
  }
  if (name == "covariant-weierstrass") {
    return make_covariant_family(make_translation_group(grid_size, std::numbers::pi),
                                 weierstrass_potential(cfg, grid_size), cfg.horizon);
  }
  if (name == "covariant-constant") {
    PotentialSpec p;
    p.kind = PotentialKind::kConstant;
    p.amplitude = cfg.amplitude;
    return make_covariant_family(make_translation_group(grid_size, cfg.half_period), p, cfg.horizon);
  }
  throw ConstructionError("unknown covariant model '" + name + "'");
}

std::shared_ptr<const MatrixFamily> lipschitz_2x2(double horizon) {
  return make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(1.0), horizon);
}

std::shared_ptr<const MatrixFamily> random_lipschitz(int dimension, double horizon, std::uint64_t seed) {
  Rng rng(seed);
  const CMatrix h0 = rng.hermitian(dimension);
  const CMatrix h1 = rng.hermitian(dimension);
  return make_matrix_family(h0, h1, Modulation::linear(1.0), horizon);
}

std::shared_ptr<const MatrixFamily> constant_family(const CMatrix& h, double horizon) {
  return make_matrix_family(h, CMatrix::Zero(h.rows(), h.cols()), Modulation::zero(), horizon);
}

/// High-accuracy reference for U(t, s) y by adaptive integration.
CVector ode_oracle(const GeneratorFamily& family, double t, double s, const CVector& y) {
  if (t == s) return y;
  return integrate_linear_ode([&family](double tau, const CVector& v) { return family.do_generator_action(tau, v); },
                              s, t, y, 1e-12);
}

bool ascending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

bool descending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// invariants

struct InvariantModel {
  std::string name;
  std::shared_ptr<const GeneratorFamily> family;
  std::optional<CMatrix> constant_generator;  // A for A(t) = A
  bool lipschitz_matrix = false;              // Step-1/2/4 bounds apply with the Lipschitz shortcut
  int samples = 0;
  std::uint64_t seed = 0;
};

Recorder run_invariant_model(const StudyConfig& cfg, const InvariantModel& m) {
  Recorder rec{to_string(StudyKind::kInvariants), m.name, m.family->describe() + ";seed=" + std::to_string(m.seed), {}, {}};
  const GeneratorFamily& family = *m.family;
  const double horizon = family.horizon();
  const double omega = family.omega();
  const bool isometric = omega == 0.0;
  Rng rng(m.seed);
  const auto levels = level_range(cfg);

  std::optional<VariationFunctional> vf;
  if (m.lipschitz_matrix) vf = VariationFunctional::for_family(family, VariationMode::kExactLipschitz);

  struct Sample {
    double s, t;
    StateVector y;
  };
  std::vector<Sample> kept;

  for (int i = 0; i < m.samples; ++i) {
    const int level = levels[static_cast<std::size_t>(i) % levels.size()];
    const Propagator prop(m.family, Partition::dyadic(horizon, level));
    const double mesh = prop.partition().mesh();
    double s = rng.uniform(0.0, horizon);
    double t = rng.uniform(0.0, horizon);
    if (s > t) std::swap(s, t);
    if (s == t) t = std::min(horizon, s + mesh);
    const auto r_index = static_cast<std::size_t>(rng.uniform() * static_cast<double>(prop.partition().cells() + 1));
    const double r = prop.partition().points()[std::min(r_index, prop.partition().cells())];
    const double r_off = rng.uniform(0.0, horizon);
    const StateVector y(rng.complex_vector(family.dimension()));
    const double ny = y.norm();

    const StateVector forward = prop.apply(t, s, y);
    const double growth = forward.norm() / (std::exp(omega * (t - s)) * ny);
    rec.add(level, mesh, "quasi_contraction_excess", growth - 1.0, growth - 1.0 <= 1e-10);
    if (isometric) {
      const double defect = std::abs(forward.norm() - ny) / ny;
      rec.add(level, mesh, "isometry_defect", defect, defect <= 1e-10);
    }
    const StateVector backward = prop.apply(s, t, y);
    const double back_growth = backward.norm() / (std::exp(omega * (t - s)) * ny);
    rec.add(level, mesh, "inverse_quasi_contraction_excess", back_growth - 1.0, back_growth - 1.0 <= 1e-10);

    const double inverse = prop.apply(s, t, forward).distance(y) / ny;
    rec.add(level, mesh, "inverse_residual_rel", inverse, inverse <= 1e-10);
    const double identity = prop.apply(s, s, y).distance(y) / ny;
    rec.add(level, mesh, "identity_residual", identity, identity == 0.0);

    // Cocycle with (t, r, s) in arbitrary order; r a partition point.
    const double a = rng.uniform() < 0.5 ? t : s;
    const double b = a == t ? s : t;
    const double cocycle = cocycle_check(prop, a, r, b, y) / ny;
    rec.add(level, mesh, "cocycle_residual_rel", cocycle, cocycle <= cfg.residual_tolerance, {{"r", r}});
    rec.add(level, mesh, "cocycle_offpartition_rel", cocycle_check(prop, a, r_off, b, y) / ny, true, {{"r", r_off}});

    if (m.constant_generator) {
      const CMatrix exact = (*m.constant_generator * (t - s)).exp();
      const CVector expected = exact * y.entries();
      const double err = (forward.entries() - expected).norm() / expected.norm();
      rec.add(level, mesh, "constant_exactness_rel", err, err <= cfg.residual_tolerance);
    }

    if (vf) {
      const double limit = 1.0 + cfg.ratio_slack;
      const BoundCheck step1 = norm_equivalence_check(family, *vf, t, s, y);
      rec.add(level, mesh, "step1_ratio", step1.ratio(), step1.ratio() <= limit);
      const BoundCheck step1r = norm_equivalence_check(family, *vf, s, t, y);
      rec.add(level, mesh, "step1_ratio", step1r.ratio(), step1r.ratio() <= limit);
      const BoundCheck step2 = graph_norm_bound_check(prop, *vf, t, s, y);
      rec.add(level, mesh, "step2_ratio", step2.ratio(), step2.ratio() <= limit);
      const BoundCheck step2i = inverse_graph_norm_bound_check(prop, *vf, t, s, y);
      rec.add(level, mesh, "step2_inverse_ratio", step2i.ratio(), step2i.ratio() <= limit);
      const StateVector evolved = y.with_entries(ode_oracle(family, t, s, y.entries()));
      const BoundCheck step4 = limit_graph_norm_bound_check(family, *vf, t, s, y, evolved);
      rec.add(level, mesh, "step4_ratio", step4.ratio(), step4.ratio() <= limit);
      if (kept.size() < 20) kept.push_back({s, t, y});
    }
  }

  // Uniform Y-boundedness: the same (s, t, y) set on every level.
  if (vf && !kept.empty()) {
    const double v_total = (*vf)(family, 0.0, horizon);
    const double majorant = std::exp(5.0 * v_total + omega * horizon);
    std::optional<double> previous;
    for (int level : levels) {
      const Propagator prop(m.family, Partition::dyadic(horizon, level));
      double sup = 0.0;
      for (const auto& k : kept) {
        sup = std::max(sup, graph_norm(family, 0.0, prop.apply(k.t, k.s, k.y)) / graph_norm(family, 0.0, k.y));
      }
      const bool bounded = sup <= majorant * (1.0 + cfg.ratio_slack) && (!previous || sup <= 1.01 * *previous);
      rec.add(level, prop.partition().mesh(), "y_bound_sup", sup, bounded, {{"majorant", majorant}});
      previous = sup;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// convergence

Recorder run_convergence_model(const StudyConfig& cfg, const std::string& name) {
  Recorder rec{to_string(StudyKind::kConverge), name, "", {}, {}};
  std::shared_ptr<const GeneratorFamily> family;
  CVector y;
  CVector reference;
  bool lipschitz = true;
  bool constant = false;
  std::string oracle;

  if (name == "lipschitz-2x2" || name == "random-lipschitz" || name == "constant") {
    std::shared_ptr<const MatrixFamily> mf;
    if (name == "lipschitz-2x2") {
      mf = lipschitz_2x2(cfg.horizon);
    } else if (name == "random-lipschitz") {
      mf = random_lipschitz(cfg.dimension, cfg.horizon, cfg.seed);
    } else {
      mf = constant_family(pauli_z(), cfg.horizon);
      constant = true;
    }
    family = mf;
    y = unit_vector(mf->dimension());
    reference = ode_oracle(*mf, cfg.time, cfg.start, y);
    oracle = "ode(dopri5,tol=1e-12)";
  } else {
    auto cf = covariant_model(cfg, name, cfg.grid_size);
    if (cfg.start != 0.0) throw ConstructionError("covariant convergence needs start = 0 (closed form is U(t,0))");
    family = cf;
    y = low_mode(cf->group());
    reference = cf->closed_form(cfg.time, y);
    lipschitz = name == "covariant-hat";
    constant = name == "covariant-constant";
    oracle = "closed-form";
  }
  rec.provenance = family->describe() + ";t=" + format_param(cfg.time) + ";s=" + format_param(cfg.start) +
                   ";oracle=" + oracle;

  const StateVector y0(y);
  const StateVector ref(reference);
  std::vector<double> meshes;
  std::vector<double> errors;
  std::optional<StateVector> previous;
  for (int level : level_range(cfg)) {
    const Propagator prop(family, Partition::dyadic(family->horizon(), level));
    const StateVector u = prop.apply(cfg.time, cfg.start, y0);
    const double err = u.distance(ref);
    meshes.push_back(prop.partition().mesh());
    errors.push_back(err);
    rec.add(level, meshes.back(), "oracle_error", err);
    if (previous) rec.add(level, meshes.back(), "cauchy_difference", u.distance(*previous));
    previous = u;
  }

  const double scale = y0.norm();
  const bool degenerate = *std::max_element(errors.begin(), errors.end()) <= 1e-12 * scale;
  if (degenerate || constant) {
    rec.add(-1, 0.0, "exact", degenerate ? 1.0 : 0.0, degenerate);
  } else {
    const double order = observed_order(meshes, errors);
    const bool in_band = !lipschitz || (order >= 0.85 && order <= 1.15);
    rec.add(-1, 0.0, "observed_order", order, in_band);
    const double reduction = errors.back() / errors.front();
    rec.add(-1, 0.0, "error_reduction", reduction);
  }

  // Derivative check at a partition point of a fine, fixed resolution.
  const int fine = std::max(cfg.level_max + 2, 12);
  const Propagator prop(family, Partition::dyadic(family->horizon(), fine));
  const double t0 = prop.partition().points()[prop.partition().cells() / 2];
  const StateVector u0 = prop.apply(t0, cfg.start, y0);
  const CVector au = family->do_generator_action(t0, u0.entries());
  std::vector<double> hs;
  std::vector<double> residuals;
  for (int j = 4; j <= 10; ++j) {
    const double h = std::ldexp(family->horizon(), -j);
    if (t0 + h > family->horizon()) continue;
    const StateVector uh = prop.apply(t0 + h, cfg.start, y0);
    const CVector quotient = (uh.entries() - u0.entries()) / h;
    const double res = vector_norm(quotient - au, u0.kind());
    hs.push_back(h);
    residuals.push_back(res);
    rec.add(j, h, "derivative_residual", res, true, {{"t", t0}});
  }
  if (hs.size() >= 2 && residuals.back() > 1e-12 * scale) {
    const double order = observed_order(hs, residuals);
    rec.add(-1, 0.0, "derivative_residual_order", order, order >= 0.8);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// dyson

DysonConfig dyson_config(const StudyConfig& cfg) {
  DysonConfig d;
  d.order = cfg.dyson_order;
  d.nodes_per_unit_time = cfg.quadrature_nodes;
  d.rule = parse_quadrature_rule(cfg.quadrature_rule);
  return d;
}

std::string dyson_label(const DysonConfig& d) {
  return "dyson(K=" + std::to_string(d.order) + ",nodes=" + std::to_string(d.nodes_per_unit_time) +
         ",rule=" + to_string(d.rule) + ")";
}

Recorder run_dyson_model(const StudyConfig& cfg, const std::string& name) {
  Recorder rec{to_string(StudyKind::kDysonCompare), name, "", {}, {}};
  const DysonConfig dcfg = dyson_config(cfg);
  const double t = cfg.time;
  const double s = cfg.start;
  const auto levels = level_range(cfg);

  if (name == "scalar" || name == "matrix") {
    auto free = constant_family(pauli_z(), cfg.horizon);
    std::shared_ptr<const BoundedPerturbation> b;
    if (name == "scalar") {
      b = MatrixPerturbation::scalar(2, kI);
    } else {
      const CMatrix sx = kI * pauli_x();
      b = std::make_shared<const MatrixPerturbation>(
          2, [sx](double tau) { return CMatrix(tau * sx); }, cfg.horizon, "i*t*sigma_x");
    }
    auto family = make_composite_family(free, b, cfg.horizon, 0.0);
    rec.provenance = family->describe() + ";t=" + format_param(t) + ";s=" + format_param(s) + ";" + dyson_label(dcfg);
    const StateVector y(unit_vector(2));

    CVector exact;
    if (name == "scalar") {
      exact = std::exp(kI * (t - s)) * free->do_frozen_exponential(0.0, t - s, y.entries());
    } else {
      exact = ode_oracle(*family, t, s, y.entries());
    }
    const StateVector exact_state(exact);
    const double b_sup = b->sup_norm();

    // Truncation sweep, K = 1..order.
    std::vector<double> errs;
    std::vector<double> bounds;
    for (int k = 1; k <= dcfg.order; ++k) {
      DysonConfig dk = dcfg;
      dk.order = k;
      const double err = dyson_propagate(*family, t, s, y, dk).distance(exact_state);
      const double bound = truncation_bound(b_sup, t - s, k, family->omega());
      errs.push_back(err);
      bounds.push_back(bound);
      rec.add(k, 0.0, "truncation_error", err, err <= bound, {{"bound", bound}});
      rec.add(k, 0.0, "truncation_bound", bound);
    }

    const StateVector dyson = dyson_propagate(*family, t, s, y, dcfg);
    const double dyson_err = dyson.distance(exact_state);
    const double dyson_bound = truncation_bound(b_sup, t - s, dcfg.order, family->omega());
    rec.add(dcfg.order, 0.0, "dyson_oracle_error", dyson_err, dyson_err <= dyson_bound + 1e-9);
    const double norm_ratio = dyson.norm() / (std::exp((family->omega() + b_sup) * (t - s)) * y.norm());
    rec.add(dcfg.order, 0.0, "dyson_norm_ratio", norm_ratio, norm_ratio <= 1.0 + 1e-9);

    for (const auto& r : dyson_vs_product(family, t, s, y, dcfg, levels)) {
      const Propagator prop(family, Partition::dyadic(family->horizon(), r.level));
      const double product_err = prop.apply(t, s, y).distance(exact_state);
      const double allowance = dyson_bound + product_err + 1e-12;
      rec.add(r.level, r.mesh, r.metric, r.value, r.value <= allowance, {{"product_error", product_err}});
    }
    return rec;
  }

  if (name == "covariant-hat") {
    auto family = covariant_model(cfg, name, cfg.grid_size);
    if (s != 0.0) throw ConstructionError("covariant dyson comparison needs start = 0");
    rec.provenance = family->describe() + ";t=" + format_param(t) + ";" + dyson_label(dcfg) + ";oracle=closed-form";
    const StateVector y(low_mode(family->group()));
    const StateVector exact(family->closed_form(t, y.entries()));
    const StateVector dyson = dyson_propagate(*family, t, s, y, dcfg);
    const double dyson_err = dyson.distance(exact);
    const double bound = truncation_bound(family->perturbation().sup_norm(), t, dcfg.order, family->omega()) * y.norm();
    rec.add(dcfg.order, 0.0, "dyson_oracle_error", dyson_err, dyson_err <= bound + 1e-9, {{"bound", bound}});
    std::vector<double> distances;
    for (const auto& r : dyson_vs_product(family, t, s, y, dcfg, levels)) {
      distances.push_back(r.value);
      const bool monotone = distances.size() < 2 || distances.back() < distances[distances.size() - 2];
      rec.add(r.level, r.mesh, r.metric, r.value, monotone);
    }
    return rec;
  }
  throw ConstructionError("unknown dyson model '" + name + "'");
}

// ---------------------------------------------------------------------------
// regularity sweep

struct SweepCase {
  std::string name;
  Modulation modulation;
  double alpha = 1.0;
  bool zero = false;
};

Recorder run_sweep_case(const StudyConfig& cfg, const SweepCase& c) {
  Recorder rec{to_string(StudyKind::kRegularitySweep), c.name, "", {}, {}};
  const CMatrix h1 = (pauli_x() + pauli_z()) / std::sqrt(2.0);
  auto family = make_matrix_family(pauli_z(), h1, c.modulation, cfg.horizon);
  const StateVector y(unit_vector(2));
  CVector reference;
  if (c.zero) {
    reference = (family->generator_matrix(0.0) * (cfg.time - cfg.start)).exp() * y.entries();
    rec.provenance = family->describe() + ";oracle=exact-exponential";
  } else {
    reference =
        Propagator(family, Partition::dyadic(cfg.horizon, cfg.reference_level)).apply(cfg.time, cfg.start, y).entries();
    rec.provenance = family->describe() + ";oracle=self(level=" + std::to_string(cfg.reference_level) + ")";
  }
  const StateVector ref(reference);

  std::vector<double> meshes;
  std::vector<double> errors;
  for (int level : level_range(cfg)) {
    const Propagator prop(family, Partition::dyadic(cfg.horizon, level));
    const double err = prop.apply(cfg.time, cfg.start, y).distance(ref);
    meshes.push_back(prop.partition().mesh());
    errors.push_back(err);
    rec.add(level, meshes.back(), "self_oracle_error", err, !c.zero || err <= 1e-12, {{"alpha", c.alpha}});
  }
  if (!c.zero) rec.add(-1, 0.0, "observed_order", observed_order(meshes, errors), true, {{"alpha", c.alpha}});
  return rec;
}

// ---------------------------------------------------------------------------
// domain escape

struct EscapeRow {
  double energy = 0.0;
  double jump = 0.0;
  double x_norm_defect = 0.0;
};

/// Slope jumps |f'(xi+) - f'(xi-)| of the hat potential at its corners. For
/// L = 2 the plateau is empty and the corners at 1 and L - 1 coincide.
std::vector<std::pair<double, double>> hat_kinks(double half_period) {
  std::vector<double> corners{0.0, 1.0, half_period - 1.0, half_period};
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
  std::vector<std::pair<double, double>> out;
  const double eps = 1e-3;  // the hat is linear on each side within eps
  for (double xi : corners) {
    const double right = (lipschitz_hat(half_period, xi + eps) - lipschitz_hat(half_period, xi)) / eps;
    const double left = (lipschitz_hat(half_period, xi) - lipschitz_hat(half_period, xi - eps)) / eps;
    out.emplace_back(xi, std::abs(right - left));
  }
  return out;
}

Recorder run_escape_model(const StudyConfig& cfg, const std::string& name) {
  Recorder rec{to_string(StudyKind::kDomainEscape), name, "", {}, {}};
  const double t = cfg.time;
  const bool example2 = name == "example2";
  const bool control = name == "control";
  const double half_period = example2 ? std::numbers::pi : cfg.half_period;

  std::ostringstream prov;
  if (example2) {
    prov << "z=exp(i*g*t)*y;g=weierstrass(alpha=" << cfg.alpha << ",depth=log2(N)-1)*" << cfg.amplitude
         << ";L=pi;t=" << t << ";norm=L2";
  } else if (control) {
    prov << "z=y;f=0;L=" << half_period << ";norm=L2";
  } else {
    prov << "z=exp(f*t)*y;f=hat*" << cfg.amplitude << ";L=" << half_period << ";t=" << t << ";norm=L2";
  }
  prov << ";y=exp(i*pi*xi/L)";
  rec.provenance = prov.str();

  double analytic_jump = 0.0;
  if (!example2 && !control) {
    for (const auto& [xi, slope] : hat_kinks(half_period)) {
      const double f = cfg.amplitude * lipschitz_hat(half_period, xi);
      analytic_jump = std::max(analytic_jump, t * cfg.amplitude * slope * std::exp(f * t));
    }
  }

  std::optional<EscapeRow> previous;
  for (int p : cfg.grid_exponents) {
    const int n = 1 << p;
    const SpectralShiftGroup group = make_translation_group(n, half_period);
    const double dx = group.cell();
    const CVector y = low_mode(group);
    CVector z(n);
    PotentialSpec pot = example2 ? PotentialSpec{PotentialKind::kWeierstrass, cfg.alpha, p - 1, cfg.amplitude, true}
                                 : PotentialSpec{PotentialKind::kLipschitzHat, 1.0, 0, cfg.amplitude, false};
    for (int j = 0; j < n; ++j) {
      const cplx f = control ? cplx(0.0) : pot.multiplier(half_period, group.node(j));
      z[j] = std::exp(f * t) * y[j];
    }
    EscapeRow row;
    row.energy = derivative_energy(z, dx);
    row.jump = derivative_jump(z, dx);
    row.x_norm_defect = std::abs(grid_l2_norm(z, dx) - grid_l2_norm(y, dx)) / grid_l2_norm(y, dx);

    rec.add(p, n, "derivative_energy", row.energy);
    rec.add(p, n, "derivative_jump", row.jump, true, {{"analytic_limit", analytic_jump}});
    rec.add(p, n, "x_norm_defect", row.x_norm_defect, !example2 || row.x_norm_defect <= 1e-10);
    if (previous) {
      rec.add(p, n, "energy_growth", row.energy / previous->energy);
      rec.add(p, n, "jump_growth", row.jump / previous->jump);
    }
    previous = row;
  }
  if (analytic_jump > 0.0) rec.add(-1, 0.0, "analytic_jump_limit", analytic_jump);
  return rec;
}

/// X-norm convergence of the product formula on the Example-2 family.
Recorder run_escape_convergence(const StudyConfig& cfg) {
  Recorder rec{to_string(StudyKind::kDomainEscape), "example2-product", "", {}, {}};
  auto family = covariant_model(cfg, "covariant-weierstrass", cfg.grid_size);
  rec.provenance = family->describe() + ";t=" + format_param(cfg.time) + ";oracle=closed-form";
  const StateVector y(low_mode(family->group()));
  const StateVector exact(family->closed_form(cfg.time, y.entries()));
  std::optional<StateVector> previous;
  std::vector<double> cauchy;
  for (int level : level_range(cfg)) {
    const Propagator prop(family, Partition::dyadic(family->horizon(), level));
    const StateVector u = prop.apply(cfg.time, 0.0, y);
    const double mesh = prop.partition().mesh();
    const double defect = std::abs(u.norm() - y.norm()) / y.norm();
    rec.add(level, mesh, "x_norm_defect", defect, defect <= 1e-10);
    rec.add(level, mesh, "x_closed_form_error", u.distance(exact));
    if (previous) {
      cauchy.push_back(u.distance(*previous));
      const bool decreasing = cauchy.size() < 2 || cauchy.back() < cauchy[cauchy.size() - 2];
      rec.add(level, mesh, "x_cauchy_difference", cauchy.back(), decreasing);
    }
    previous = u;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// closed form

Recorder run_closed_form_model(const StudyConfig& cfg) {
  Recorder rec{to_string(StudyKind::kClosedForm), cfg.model, "", {}, {}};
  auto family = covariant_model(cfg, cfg.model, cfg.grid_size);
  const DysonConfig dcfg = dyson_config(cfg);
  rec.provenance = family->describe() + ";t=" + format_param(cfg.time) + ";" + dyson_label(dcfg);
  const StateVector y(low_mode(family->group()));
  const StateVector exact(family->closed_form(cfg.time, y.entries()));
  const bool constant = cfg.model == "covariant-constant";

  std::optional<double> previous;
  for (int level : level_range(cfg)) {
    const Propagator prop(family, Partition::dyadic(family->horizon(), level));
    const double d = prop.apply(cfg.time, 0.0, y).distance(exact) / y.norm();
    const double mesh = prop.partition().mesh();
    const bool trivial = constant || cfg.time == 0.0;
    rec.add(level, mesh, "closed_form_distance", d, !trivial || d <= 1e-12);
    if (previous && *previous > 0.0) rec.add(level, mesh, "distance_ratio", d / *previous);
    previous = d;
  }
  const double dyson = dyson_propagate(*family, cfg.time, 0.0, y, dcfg).distance(exact) / y.norm();
  const double bound = truncation_bound(family->perturbation().sup_norm(), cfg.time, dcfg.order, family->omega());
  rec.add(dcfg.order, 0.0, "dyson_closed_form_distance", dyson, dyson <= bound + 1e-9, {{"bound", bound}});
  return rec;
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(StudyKind kind) noexcept {
  switch (kind) {
    case StudyKind::kInvariants:
      return "invariants";
    case StudyKind::kConverge:
      return "converge";
    case StudyKind::kDysonCompare:
      return "dyson";
    case StudyKind::kRegularitySweep:
      return "regularity";
    case StudyKind::kDomainEscape:
      return "escape";
    case StudyKind::kClosedForm:
      return "closed-form";
  }
  return "unknown";
}

std::optional<StudyKind> parse_study_kind(const std::string& name) {
  for (auto k : {StudyKind::kInvariants, StudyKind::kConverge, StudyKind::kDysonCompare, StudyKind::kRegularitySweep,
                 StudyKind::kDomainEscape, StudyKind::kClosedForm}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

StudyConfig default_config(StudyKind kind) {
  StudyConfig c;
  c.study = kind;
  switch (kind) {
    case StudyKind::kInvariants:
      c.model = "suite";
      c.level_min = 4;
      c.level_max = 10;
      c.grid_size = 32;
      break;
    case StudyKind::kConverge:
      c.model = "lipschitz-2x2";
      break;
    case StudyKind::kDysonCompare:
      c.model = "suite";
      c.level_min = 2;
      c.level_max = 8;
      break;
    case StudyKind::kRegularitySweep:
      c.model = "weierstrass-modulation";
      c.horizon = 2.0 * std::numbers::pi;
      c.time = c.horizon;
      c.amplitude = 0.1;
      break;
    case StudyKind::kDomainEscape:
      c.model = "examples";
      c.grid_size = 128;
      break;
    case StudyKind::kClosedForm:
      c.model = "covariant-hat";
      c.level_min = 1;
      c.level_max = 8;
      break;
  }
  return c;
}

namespace {

const std::vector<std::string>& allowed_models(StudyKind kind) {
  static const std::map<StudyKind, std::vector<std::string>> table{
      {StudyKind::kInvariants,
       {"suite", "constant", "lipschitz-2x2", "random-lipschitz", "covariant-hat", "covariant-weierstrass"}},
      {StudyKind::kConverge,
       {"lipschitz-2x2", "constant", "random-lipschitz", "covariant-hat", "covariant-weierstrass", "covariant-constant"}},
      {StudyKind::kDysonCompare, {"suite", "scalar", "matrix", "covariant-hat"}},
      {StudyKind::kRegularitySweep, {"weierstrass-modulation"}},
      {StudyKind::kDomainEscape, {"examples"}},
      {StudyKind::kClosedForm, {"covariant-hat", "covariant-weierstrass", "covariant-constant"}},
  };
  return table.at(kind);
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void validate(const StudyConfig& c) {
  auto fail = [](const std::string& what) { throw ConstructionError(what); };
  const auto& models = allowed_models(c.study);
  if (std::find(models.begin(), models.end(), c.model) == models.end()) {
    fail("model '" + c.model + "' is not available for study " + to_string(c.study));
  }
  if (c.dimension < 1 || c.dimension > 64) fail("dimension must lie in [1, 64]");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) fail("horizon must be positive");
  if (!(c.start >= 0.0 && c.start <= c.horizon)) fail("start must lie in [0, horizon]");
  if (!(c.time >= c.start && c.time <= c.horizon)) fail("time must lie in [start, horizon]");
  if (!power_of_two(c.grid_size) || c.grid_size < 8 || c.grid_size > 512) {
    fail("grid_size must be a power of two in [8, 512]");
  }
  if (!(c.half_period >= 2.0) || !std::isfinite(c.half_period)) fail("half_period must be >= 2");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (c.alphas.empty()) fail("alphas must be non-empty");
  for (double a : c.alphas) {
    if (!(a > 0.0 && a < 1.0)) fail("every entry of alphas must lie in (0, 1)");
  }
  if (c.series_depth < 1 || c.series_depth > 40) fail("series_depth must lie in [1, 40]");
  if (!std::isfinite(c.amplitude) || c.amplitude < 0.0) fail("amplitude must be finite and non-negative");
  if (c.level_min < 0 || c.level_max < c.level_min || c.level_max > 22) fail("need 0 <= level_min <= level_max <= 22");
  if (c.study == StudyKind::kConverge && c.level_max - c.level_min < 1) fail("converge needs at least two levels");
  if (c.reference_level <= c.level_max || c.reference_level > 24) {
    fail("reference_level must exceed level_max and be at most 24");
  }
  if (c.grid_exponents.empty()) fail("grid_exponents must be non-empty");
  for (std::size_t i = 0; i < c.grid_exponents.size(); ++i) {
    const int p = c.grid_exponents[i];
    if (p < 3 || p > 20) fail("grid_exponents must lie in [3, 20]");
    if (i > 0 && p != c.grid_exponents[i - 1] + 1) fail("grid_exponents must be consecutive (a doubling sequence)");
  }
  if (c.samples < 1) fail("samples must be >= 1");
  if (c.families < 1) fail("families must be >= 1");
  DysonConfig d;
  d.order = c.dyson_order;
  d.nodes_per_unit_time = c.quadrature_nodes;
  d.rule = parse_quadrature_rule(c.quadrature_rule);
  validate(d);
  if (!(c.residual_tolerance > 0.0)) fail("residual_tolerance must be positive");
  if (!(c.ratio_slack > 0.0)) fail("ratio_slack must be positive");
}

// ---------------------------------------------------------------------------

StudyResult run_invariants(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<InvariantModel> models;
  const bool suite = cfg.model == "suite";
  auto want = [&](const std::string& name) { return suite || cfg.model == name; };

  if (want("constant")) {
    const CMatrix h2 = pauli_z();
    models.push_back({"constant-2x2", constant_family(h2, cfg.horizon), CMatrix(kI * h2), true, cfg.samples, cfg.seed});
    Rng rng(cfg.seed ^ 0x8u);
    const CMatrix h8 = rng.hermitian(8);
    models.push_back(
        {"constant-8x8", constant_family(h8, cfg.horizon), CMatrix(kI * h8), true, cfg.samples, cfg.seed + 1});
  }
  if (want("lipschitz-2x2")) {
    models.push_back({"lipschitz-2x2", lipschitz_2x2(cfg.horizon), std::nullopt, true, cfg.samples, cfg.seed + 2});
  }
  if (want("random-lipschitz")) {
    const int per_family = std::max(5, cfg.samples / 10);
    for (int f = 0; f < cfg.families; ++f) {
      const std::uint64_t seed = cfg.seed + 1000 + static_cast<std::uint64_t>(f);
      models.push_back({"random-lipschitz-" + std::to_string(f), random_lipschitz(cfg.dimension, cfg.horizon, seed),
                        std::nullopt, true, per_family, seed});
    }
  }
  if (want("covariant-hat")) {
    models.push_back(
        {"covariant-hat", covariant_model(cfg, "covariant-hat", cfg.grid_size), std::nullopt, false, cfg.samples,
         cfg.seed + 3});
  }
  if (!suite && cfg.model == "covariant-weierstrass") {
    models.push_back({"covariant-weierstrass", covariant_model(cfg, "covariant-weierstrass", cfg.grid_size),
                      std::nullopt, false, cfg.samples, cfg.seed + 4});
  }

  auto parts = parallel_map<Recorder>(models.size(), [&](std::size_t i) { return run_invariant_model(cfg, models[i]); });
  return merge(StudyKind::kInvariants, parts);
}

StudyResult run_convergence(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<Recorder> parts{run_convergence_model(cfg, cfg.model)};
  nlohmann::json extra;
  for (const auto& r : parts.front().records) {
    if (r.metric == "observed_order") extra["observed_order"] = r.value;
    if (r.metric == "exact") extra["observed_order"] = "exact";
  }
  return merge(StudyKind::kConverge, parts, extra);
}

StudyResult run_dyson_compare(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<std::string> names;
  if (cfg.model == "suite") {
    names = {"scalar", "matrix", "covariant-hat"};
  } else {
    names = {cfg.model};
  }
  auto parts = parallel_map<Recorder>(names.size(), [&](std::size_t i) { return run_dyson_model(cfg, names[i]); });
  return merge(StudyKind::kDysonCompare, parts);
}

StudyResult run_regularity_sweep(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<SweepCase> cases;
  for (double a : cfg.alphas) {
    cases.push_back({"alpha=" + format_param(a), Modulation::weierstrass(a, cfg.series_depth, cfg.amplitude), a, false});
  }
  Modulation lip = Modulation::linear(cfg.amplitude / cfg.horizon);
  cases.push_back({"lipschitz", lip, 1.0, false});
  cases.push_back({"zero", Modulation::zero(), 1.0, true});

  auto parts = parallel_map<Recorder>(cases.size(), [&](std::size_t i) { return run_sweep_case(cfg, cases[i]); });

  nlohmann::json orders = nlohmann::json::object();
  std::vector<double> sequence;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (const auto& r : parts[i].records) {
      if (r.metric == "observed_order") {
        orders[parts[i].model] = r.value;
        sequence.push_back(r.value);
      }
    }
  }
  nlohmann::json extra;
  extra["orders"] = orders;
  extra["calibration"] = {{"strictly_increasing_in_alpha", ascending(sequence)},
                          {"note", "empirical expectation, not an asserted invariant"}};
  return merge(StudyKind::kRegularitySweep, parts, extra);
}

StudyResult run_domain_escape(const StudyConfig& cfg) {
  validate(cfg);
  const std::vector<std::string> names{"example1", "example2", "control"};
  auto parts = parallel_map<Recorder>(names.size() + 1, [&](std::size_t i) {
    return i < names.size() ? run_escape_model(cfg, names[i]) : run_escape_convergence(cfg);
  });

  auto collect = [](const Recorder& rec, const std::string& metric) {
    std::vector<double> v;
    for (const auto& r : rec.records) {
      if (r.metric == metric) v.push_back(r.value);
    }
    return v;
  };
  const auto e1_energy = collect(parts[0], "derivative_energy");
  const auto e1_jump = collect(parts[0], "derivative_jump");
  const auto e2_growth = collect(parts[1], "energy_growth");
  const auto e2_cauchy = collect(parts[3], "x_cauchy_difference");
  const double limit = collect(parts[0], "analytic_jump_limit").at(0);

  nlohmann::json extra;
  const double e1_spread = *std::max_element(e1_energy.begin(), e1_energy.end()) /
                               *std::min_element(e1_energy.begin(), e1_energy.end()) - 1.0;
  const double e2_min_growth = e2_growth.empty() ? 0.0 : *std::min_element(e2_growth.begin(), e2_growth.end());
  extra["example1"] = {{"energy_spread", e1_spread},
                       {"jump_over_limit", e1_jump.back() / limit},
                       {"analytic_jump_limit", limit}};
  extra["example2"] = {{"energy_growth", e2_growth},
                       {"min_energy_growth", e2_min_growth},
                       {"derivative_energy_growth_detected", !e2_growth.empty() && e2_min_growth > 1.0},
                       {"growth_factor_at_least_1.3", !e2_growth.empty() && e2_min_growth >= 1.3},
                       {"x_convergence", descending(e2_cauchy)}};
  return merge(StudyKind::kDomainEscape, parts, extra);
}

StudyResult run_closed_form(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<Recorder> parts{run_closed_form_model(cfg)};
  std::vector<double> ratios;
  for (const auto& r : parts.front().records) {
    if (r.metric == "distance_ratio") ratios.push_back(r.value);
  }
  nlohmann::json extra;
  extra["distance_ratios"] = ratios;
  return merge(StudyKind::kClosedForm, parts, extra);
}

StudyResult run_study(const StudyConfig& cfg) {
  switch (cfg.study) {
    case StudyKind::kInvariants:
      return run_invariants(cfg);
    case StudyKind::kConverge:
      return run_convergence(cfg);
    case StudyKind::kDysonCompare:
      return run_dyson_compare(cfg);
    case StudyKind::kRegularitySweep:
      return run_regularity_sweep(cfg);
    case StudyKind::kDomainEscape:
      return run_domain_escape(cfg);
    case StudyKind::kClosedForm:
      return run_closed_form(cfg);
  }
  throw ConstructionError("unknown study");
}

int worker_threads() {
  if (const char* env = std::getenv("EVOPAGATOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------

double grid_l2_norm(const CVector& z, double dx) {
  if (!(dx > 0.0)) throw DomainError("grid spacing must be positive");
  return std::sqrt(dx) * z.norm();
}

namespace {

CVector forward_difference(const CVector& z, double dx) {
  if (!(dx > 0.0)) throw DomainError("grid spacing must be positive");
  if (z.size() < 2) throw DomainError("difference needs at least two samples");
  const Eigen::Index n = z.size();
  CVector d(n);
  for (Eigen::Index j = 0; j < n; ++j) d[j] = (z[(j + 1) % n] - z[j]) / dx;
  return d;
}

}  // namespace

double derivative_energy(const CVector& z, double dx) { return grid_l2_norm(forward_difference(z, dx), dx); }

double derivative_jump(const CVector& z, double dx) {
  const CVector d = forward_difference(z, dx);
  const Eigen::Index n = d.size();
  double best = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) best = std::max(best, std::abs(d[j] - d[(j + n - 1) % n]));
  return best;
}

}  // namespace evo
