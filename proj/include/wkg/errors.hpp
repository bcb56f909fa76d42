#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace wkg {

/// Rejected configuration or argument. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run hit a non-finite value or a broken numerical precondition.
/// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field carries mass too close to the periodic boundary for x-weights
/// (and hence xi-derivatives) to be meaningful.
class ContainmentError : public NumericalError {
 public:
  ContainmentError(const std::string& what, double boundary_mass)
      : NumericalError(message(what, boundary_mass)),
        boundary_mass_(boundary_mass) {}

  double boundary_mass() const noexcept { return boundary_mass_; }

 private:
  static std::string message(const std::string& what, double mass) {
    std::ostringstream os;
    os << what << " (relative boundary mass " << mass << ")";
    return os.str();
  }

  double boundary_mass_;
};

}  // namespace wkg
