// Acceptance checks, one PASS/FAIL line per criterion.
//   acceptance                 run all ten
//   acceptance --criterion N   run criterion N only (exit 1 on FAIL)

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "evopagator/dyson.hpp"
#include "evopagator/experiments.hpp"
#include "evopagator/models.hpp"
#include "evopagator/product_formula.hpp"
#include "evopagator/random.hpp"
#include "oracles.hpp"

using namespace evo;
namespace fs = std::filesystem;

namespace {

const cplx kI{0.0, 1.0};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) { return format_double(v); }

bool has_prefix(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::vector<const ExperimentRecord*> select(const StudyResult& r, const std::string& metric,
                                            const std::string& model_prefix = "") {
  std::vector<const ExperimentRecord*> out;
  for (const auto& rec : r.records) {
    if (rec.metric == metric && has_prefix(rec.provenance, model_prefix)) out.push_back(&rec);
  }
  return out;
}

Partition random_partition(Rng& rng, double horizon, int interior) {
  std::vector<double> pts{0.0, horizon};
  for (int i = 0; i < interior; ++i) pts.push_back(rng.uniform(0.0, horizon));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return Partition(pts);
}

// 1: constant generators are reproduced exactly on every partition.
Verdict constant_exactness() {
  Rng rng(101);
  double worst = 0.0;
  int cases = 0;
  for (int dim : {2, 8}) {
    const CMatrix h = dim == 2 ? pauli_z() + 0.5 * pauli_x() : rng.hermitian(dim);
    const auto f = make_matrix_family(h, CMatrix::Zero(dim, dim), Modulation::zero(), 1.0);
    const CMatrix a = kI * h;
    std::vector<Partition> parts;
    for (int level = 0; level <= 10; level += 2) parts.push_back(Partition::dyadic(1.0, level));
    for (int k = 0; k < 6; ++k) parts.push_back(random_partition(rng, 1.0, 3 + 7 * k));
    for (const auto& part : parts) {
      const Propagator p(f, part);
      for (int k = 0; k < 10; ++k) {
        const double t = rng.uniform(), s = rng.uniform();
        const StateVector y(rng.complex_vector(dim));
        const CVector expected = oracle::taylor_exp(a, t - s) * y.entries();
        worst = std::max(worst, (p.apply(t, s, y).entries() - expected).norm() / expected.norm());
        ++cases;
      }
    }
  }
  return {worst <= 1e-12, "worst relative error " + num(worst) + " over " + std::to_string(cases) + " cases"};
}

// 2: skew-Hermitian models keep the norm.
Verdict quasi_contractivity() {
  Rng rng(202);
  std::vector<std::shared_ptr<const GeneratorFamily>> models{
      make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(1.0), 1.0),
      make_matrix_family(rng.hermitian(4), rng.hermitian(4), Modulation::linear(1.0), 1.0),
      make_matrix_family(pauli_z(), pauli_y(), Modulation::weierstrass(0.5, 20), 1.0),
      make_covariant_family(make_translation_group(64, 3.14159265358979),
                            PotentialSpec{PotentialKind::kWeierstrass, 1.0, 5, 1.0, true}, 1.0),
  };
  double worst = 0.0;
  int cases = 0;
  for (const auto& f : models) {
    if (f->omega() != 0.0) return {false, "model with omega != 0: " + f->describe()};
    for (int level = 0; level <= 10; ++level) {
      const Propagator p(f, Partition::dyadic(1.0, level));
      for (int k = 0; k < 10; ++k) {
        const double t = rng.uniform(), s = rng.uniform();
        const StateVector y(rng.complex_vector(f->dimension()));
        worst = std::max(worst, std::abs(p.apply(t, s, y).norm() - y.norm()) / y.norm());
        ++cases;
      }
    }
  }
  return {worst <= 1e-10, "worst norm defect " + num(worst) + " over " + std::to_string(cases) + " cases"};
}

// 3: cocycle identity with r on the partition.
Verdict cocycle() {
  Rng rng(303);
  const std::vector<std::pair<std::string, std::shared_ptr<const GeneratorFamily>>> models{
      {"lipschitz-2x2", make_matrix_family(pauli_z(), pauli_x(), Modulation::linear(1.0), 1.0)},
      {"random-4x4", make_matrix_family(rng.hermitian(4), rng.hermitian(4), Modulation::linear(1.0), 1.0)},
      {"covariant-hat", make_covariant_family(make_translation_group(32, 2.0), PotentialSpec{}, 1.0)},
  };
  std::ostringstream detail;
  bool pass = true;
  for (const auto& [name, f] : models) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const int level = 1 + k % 8;
      const Propagator p(f, Partition::dyadic(1.0, level));
      const double t = rng.uniform(), s = rng.uniform();
      const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(p.partition().cells() + 1));
      const double r = p.partition().points()[std::min(idx, p.partition().cells())];
      const StateVector y(rng.complex_vector(f->dimension()));
      const double scale = std::max(y.norm(), p.apply(t, s, y).norm());
      worst = std::max(worst, cocycle_check(p, t, r, s, y) / scale);
    }
    pass = pass && worst <= 1e-12;
    detail << name << " " << num(worst) << "; ";
  }
  return {pass, "worst relative residual per model: " + detail.str()};
}

// 4: Step-1/2/4 graph-norm bounds on 50 random Lipschitz 4x4 families.
Verdict graph_norm_bounds() {
  auto cfg = default_config(StudyKind::kInvariants);
  cfg.model = "random-lipschitz";
  cfg.dimension = 4;
  cfg.families = 50;
  const auto r = run_invariants(cfg);
  const double limit = 1.0 + 1e-9;
  std::ostringstream detail;
  bool pass = true;
  std::size_t total = 0;
  for (const char* metric : {"step1_ratio", "step2_ratio", "step2_inverse_ratio", "step4_ratio"}) {
    const auto rows = select(r, metric);
    double worst = 0.0;
    for (const auto* row : rows) worst = std::max(worst, row->value);
    pass = pass && !rows.empty() && worst <= limit;
    total += rows.size();
    detail << metric << " worst " << num(worst) << "; ";
  }
  detail << total << " samples";
  return {pass, detail.str()};
}

// 5: first-order convergence against the ODE oracle.
Verdict convergence() {
  const auto cfg = default_config(StudyKind::kConverge);
  const auto r = run_convergence(cfg);
  const auto order_rows = select(r, "observed_order");
  const auto errors = select(r, "oracle_error");
  if (order_rows.size() != 1 || errors.size() < 2) return {false, "missing convergence records"};
  const double order = order_rows.front()->value;
  const double reduction = errors.back()->value / errors.front()->value;
  const bool in_band = order >= 0.85 && order <= 1.15;
  const bool reduced = reduction < 1e-2;
  std::ostringstream detail;
  detail << "observed order " << num(order) << (in_band ? " (in band)" : " (out of band)") << "; error(2^-"
         << errors.back()->level << ")/error(2^-" << errors.front()->level << ") = " << num(reduction)
         << (reduced ? " < 1e-2" : " >= 1e-2");
  return {in_band && reduced, detail.str()};
}

// 6: product formula and Dyson series against the closed form.
Verdict closed_form() {
  auto cfg = default_config(StudyKind::kClosedForm);
  cfg.model = "covariant-hat";
  cfg.grid_size = 256;
  cfg.time = 1.0;
  cfg.level_min = 1;
  cfg.level_max = 8;
  cfg.dyson_order = 12;
  cfg.quadrature_nodes = 2048;
  const auto r = run_closed_form(cfg);
  const auto ratios = select(r, "distance_ratio");
  const auto dyson = select(r, "dyson_closed_form_distance");
  bool pass = ratios.size() >= 5 && dyson.size() == 1;
  std::ostringstream detail;
  detail << "ratios";
  for (const auto* row : ratios) {
    pass = pass && row->value >= 0.4 && row->value <= 0.65;
    detail << ' ' << num(row->value);
  }
  if (!dyson.empty()) {
    pass = pass && dyson.front()->value <= 1e-8;
    detail << "; dyson distance " << num(dyson.front()->value);
  }
  return {pass, detail.str()};
}

// 7: Dyson truncation error against its certified bound, scalar B = i I.
Verdict dyson_truncation() {
  const auto free = make_matrix_family(pauli_z(), CMatrix::Zero(2, 2), Modulation::zero(), 1.0);
  const auto b = MatrixPerturbation::scalar(2, kI);
  CVector y(2);
  y << 0.6, cplx(0.0, 0.8);
  const StateVector sy(y);
  const CVector exact = std::exp(kI) * (oracle::exp_i_hermitian_2x2(pauli_z(), 1.0) * y);
  bool pass = true;
  std::ostringstream detail;
  double prev_err = 0.0, prev_bound = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double err =
        (dyson_propagate(*free, *b, 1.0, 0.0, sy, DysonConfig{k, 2048, QuadratureRule::kCubic}).entries() - exact)
            .norm();
    const double bound = truncation_bound(1.0, 1.0, k, 0.0) * sy.norm();
    // Factorial decay: both scaled by (K+1)! stay in a fixed band.
    const double scaled = err * oracle::factorial(k + 1);
    pass = pass && err <= bound && scaled >= 0.5 && scaled <= std::exp(1.0);
    if (k > 1) pass = pass && err < prev_err / (k) && bound < prev_bound / (k);
    detail << "K=" << k << " " << num(err) << "<=" << num(bound) << (k < 8 ? "; " : "");
    prev_err = err;
    prev_bound = bound;
  }
  return {pass, detail.str()};
}

// 8: observed orders increase with the regularity.
Verdict regularity() {
  const auto r = run_regularity_sweep(default_config(StudyKind::kRegularitySweep));
  std::vector<std::pair<std::string, double>> orders;
  for (const auto* row : select(r, "observed_order")) {
    orders.emplace_back(row->provenance.substr(0, row->provenance.find(':')), row->value);
  }
  auto find = [&](const std::string& name) {
    for (const auto& [n, v] : orders) {
      if (n == name) return v;
    }
    return std::nan("");
  };
  const std::vector<double> seq{find("alpha=0.25"), find("alpha=0.5"), find("alpha=0.75"), find("lipschitz")};
  bool pass = true;
  for (double v : seq) pass = pass && std::isfinite(v);
  for (std::size_t i = 1; i < seq.size(); ++i) pass = pass && seq[i] > seq[i - 1];
  pass = pass && seq[3] >= 0.85 && seq[0] <= 0.6;
  std::ostringstream detail;
  detail << "orders alpha=0.25 " << num(seq[0]) << ", 0.5 " << num(seq[1]) << ", 0.75 " << num(seq[2])
         << ", lipschitz " << num(seq[3]);
  return {pass, detail.str()};
}

// 9: domain escape indicators.
Verdict domain_escape() {
  auto cfg = default_config(StudyKind::kDomainEscape);
  cfg.alpha = 1.0;
  cfg.time = 1.0;
  cfg.grid_exponents = {10, 11, 12, 13};
  const auto r = run_domain_escape(cfg);
  std::ostringstream detail;

  bool growth_ok = true;
  std::vector<double> growth;
  for (const auto* row : select(r, "energy_growth", "example2: ")) {
    growth.push_back(row->value);
    growth_ok = growth_ok && row->value >= 1.3;
  }
  growth_ok = growth_ok && growth.size() == 3;
  detail << "example2 growth";
  for (double g : growth) detail << ' ' << num(g);
  detail << (growth_ok ? " (>= 1.3)" : " (below 1.3)");

  double norm_defect = 0.0;
  for (const auto* row : select(r, "x_norm_defect", "example2")) norm_defect = std::max(norm_defect, row->value);
  const bool norm_ok = norm_defect <= 1e-10;
  detail << "; x-norm defect " << num(norm_defect);

  const auto cauchy = select(r, "x_cauchy_difference", "example2-product: ");
  bool cauchy_ok = cauchy.size() >= 2;
  for (std::size_t i = 1; i < cauchy.size(); ++i) cauchy_ok = cauchy_ok && cauchy[i]->value < cauchy[i - 1]->value;
  detail << "; successive X-distances " << (cauchy_ok ? "decreasing" : "not decreasing");

  std::vector<double> energy;
  for (const auto* row : select(r, "derivative_energy", "example1: ")) energy.push_back(row->value);
  const double spread = energy.empty() ? 1.0
                                       : *std::max_element(energy.begin(), energy.end()) /
                                                 *std::min_element(energy.begin(), energy.end()) -
                                             1.0;
  const bool energy_ok = energy.size() == 4 && spread < 0.1;
  detail << "; example1 energy spread " << num(spread);

  const auto limit_rows = select(r, "analytic_jump_limit", "example1: ");
  bool jump_ok = limit_rows.size() == 1;
  double worst_jump = 1e300;
  if (jump_ok) {
    for (const auto* row : select(r, "derivative_jump", "example1: ")) {
      worst_jump = std::min(worst_jump, row->value / limit_rows.front()->value);
    }
    jump_ok = worst_jump >= 0.5;
  }
  detail << ", min jump/limit " << num(worst_jump);
  return {growth_ok && norm_ok && cauchy_ok && energy_ok && jump_ok, detail.str()};
}

// 10: two CLI runs of the whole suite give identical CSV bytes.
Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / ("evopagator-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> dirs{base / "a", base / "b"};
  for (const auto& d : dirs) {
    std::ostringstream out, err;
    const int code = cli::run({"--output-dir", d.string(), "--no-timestamp", "all"}, out, err);
    if (code == cli::kConfigError) {
      fs::remove_all(base);
      return {false, "cli rejected the run: " + err.str()};
    }
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  bool pass = names.size() == 6;
  std::size_t bytes = 0;
  for (const auto& n : names) {
    const std::string a = slurp(dirs[0] / n);
    const std::string b = slurp(dirs[1] / n);
    pass = pass && !a.empty() && a == b;
    bytes += a.size();
  }
  pass = pass && slurp(dirs[0] / "summary.json") == slurp(dirs[1] / "summary.json");
  fs::remove_all(base);
  return {pass, std::to_string(names.size()) + " CSV files, " + std::to_string(bytes) + " bytes compared"};
}

const std::vector<std::function<Verdict()>> kCriteria{
    constant_exactness, quasi_contractivity, cocycle,     graph_norm_bounds, convergence,
    closed_form,        dyson_truncation,    regularity,  domain_escape,     determinism,
};

bool report(int n) {
  Verdict v;
  try {
    v = kCriteria.at(static_cast<std::size_t>(n - 1))();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " | " << v.detail << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (which.empty()) {
    for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) which.push_back(n);
  }
  bool all = true;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    all = report(n) && all;
  }
  return all ? 0 : 1;
}
