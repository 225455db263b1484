#pragma once

#include <stdexcept>
#include <string>

namespace fdrexp {

/// Precondition violated by an argument (out-of-range probability, mean below 1, ...).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The mixing distribution is δ_1, so G = E and there is no finite crossing.
class DegenerateMixtureError : public DomainError {
public:
  explicit DegenerateMixtureError(const std::string& what) : DomainError(what) {}
};

/// Budget lies outside the range where the envelope formulas apply.
class OutOfRangeError : public std::out_of_range {
public:
  explicit OutOfRangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Bracketing or convergence failure inside a numerical routine.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file or field.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fdrexp
