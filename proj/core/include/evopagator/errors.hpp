#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evo {

/// Argument outside the admissible range of an operation (t outside [0,T], non-positive mesh, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid parameters handed to a constructor or factory.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Programming error such as mixing vectors tagged with different norm kinds.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sampled-sup variation did not settle within the allowed number of doublings.
class RefinementError : public std::runtime_error {
 public:
  RefinementError(const std::string& what, double previous, double last)
      : std::runtime_error(what), previous_(previous), last_(last) {}

  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// Product-formula refinement did not reach the requested Cauchy tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> cauchy)
      : std::runtime_error(what), cauchy_(std::move(cauchy)) {}

  const std::vector<double>& cauchy_errors() const noexcept { return cauchy_; }

 private:
  std::vector<double> cauchy_;
};

}  // namespace evo
