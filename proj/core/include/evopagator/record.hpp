#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>

namespace evo {

/// One row of a study. `metric` names what `value` measures; `level` is the
/// refinement level or sample index and `mesh` the matching mesh or grid size.
struct ExperimentRecord {
  std::string study;
  int level = 0;
  double mesh = 0.0;
  std::string metric;
  double value = 0.0;
  std::string provenance;
  std::map<std::string, double> auxiliary;
};

inline constexpr const char* kCsvHeader = "study,level,mesh,metric,value,provenance";

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Throws ContractViolation for an empty study id or non-finite metrics.
void validate(const ExperimentRecord& record);

void write_csv(std::ostream& out, std::span<const ExperimentRecord> records);

}  // namespace evo
