#include "evopagator/record.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "evopagator/errors.hpp"

namespace evo {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void validate(const ExperimentRecord& record) {
  if (record.study.empty()) throw ContractViolation("experiment record without study id");
  if (!std::isfinite(record.value) || !std::isfinite(record.mesh)) {
    throw ContractViolation("non-finite metric in record " + record.study + "/" + record.metric);
  }
  for (const auto& [key, v] : record.auxiliary) {
    if (!std::isfinite(v)) throw ContractViolation("non-finite auxiliary value " + key);
  }
}

namespace {

// Quote only when needed; provenance strings may contain commas.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    validate(r);
    out << csv_field(r.study) << ',' << r.level << ',' << format_double(r.mesh) << ',' << csv_field(r.metric) << ','
        << format_double(r.value) << ',' << csv_field(r.provenance) << '\n';
  }
}

}  // namespace evo
