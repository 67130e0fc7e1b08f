#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evopagator/record.hpp"
#include "evopagator/state.hpp"

namespace evo {

enum class StudyKind { kInvariants, kConverge, kDysonCompare, kRegularitySweep, kDomainEscape, kClosedForm };

const char* to_string(StudyKind kind) noexcept;
std::optional<StudyKind> parse_study_kind(const std::string& name);

/// Parameters of one study. Field names double as configuration keys.
///
/// `model` selects the generator family:
///   invariants : suite | constant | lipschitz-2x2 | random-lipschitz | covariant-hat | covariant-weierstrass
///   converge   : lipschitz-2x2 | constant | random-lipschitz | covariant-hat | covariant-weierstrass
///                | covariant-constant
///   dyson      : suite | scalar | matrix | covariant-hat
///   closed-form: covariant-hat | covariant-weierstrass | covariant-constant
///   regularity : weierstrass-modulation
///   escape     : examples
/// The last two have fixed model shapes driven by alpha(s), amplitude,
/// series_depth and grid parameters.
struct StudyConfig {
  StudyKind study = StudyKind::kInvariants;

  std::string model = "suite";
  int dimension = 4;
  double horizon = 1.0;
  double time = 1.0;
  double start = 0.0;
  int grid_size = 256;
  double half_period = 2.0;
  double alpha = 1.0;
  std::vector<double> alphas{0.25, 0.5, 0.75};
  int series_depth = 20;
  double amplitude = 1.0;

  int level_min = 4;
  int level_max = 10;
  int reference_level = 18;
  std::vector<int> grid_exponents{8, 9, 10, 11, 12, 13};
  int samples = 100;
  int families = 20;
  int dyson_order = 12;
  int quadrature_nodes = 2048;
  std::string quadrature_rule = "cubic";

  double residual_tolerance = 1e-12;
  double ratio_slack = 1e-9;

  std::uint64_t seed = 20240601;
  std::string output;
};

/// Defaults tuned per study (see README for the resulting values).
StudyConfig default_config(StudyKind kind);

/// Throws ConstructionError for invalid combinations.
void validate(const StudyConfig& cfg);

struct StudyResult {
  StudyKind study = StudyKind::kInvariants;
  std::vector<ExperimentRecord> records;
  nlohmann::json summary;
  std::vector<std::size_t> violations;  // indices into records

  bool passed() const noexcept { return violations.empty(); }
};

StudyResult run_invariants(const StudyConfig& cfg);
StudyResult run_convergence(const StudyConfig& cfg);
StudyResult run_dyson_compare(const StudyConfig& cfg);
StudyResult run_regularity_sweep(const StudyConfig& cfg);
StudyResult run_domain_escape(const StudyConfig& cfg);
StudyResult run_closed_form(const StudyConfig& cfg);

StudyResult run_study(const StudyConfig& cfg);

/// Worker cap: EVOPAGATOR_THREADS when set and positive, else hardware concurrency.
int worker_threads();

// Domain-escape indicators on a periodic grid with spacing dx.

/// sqrt(dx sum |z_j|^2).
double grid_l2_norm(const CVector& z, double dx);
/// Grid L2 norm of the forward difference (z_{j+1} - z_j) / dx.
double derivative_energy(const CVector& z, double dx);
/// max_j |d_{j+1/2} - d_{j-1/2}| with d_{j+1/2} = (z_{j+1} - z_j) / dx.
double derivative_jump(const CVector& z, double dx);

}  // namespace evo
