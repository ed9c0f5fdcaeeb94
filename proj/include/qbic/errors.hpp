#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structural inconsistency in a computed result (wrong root count, duplicate states).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<std::complex<double>> best_iterates,
                   double residual)
      : Error(what), best_iterates_(std::move(best_iterates)), residual_(residual) {}

  const std::vector<std::complex<double>>& best_iterates() const { return best_iterates_; }
  double residual() const { return residual_; }

 private:
  std::vector<std::complex<double>> best_iterates_;
  double residual_;
};

/// A polynomial root that does not fit any Riemann sheet cleanly.
class ClassificationError : public Error {
 public:
  enum class Reason { spurious, on_cut };

  ClassificationError(const std::string& what, Reason reason, std::complex<double> energy,
                      std::array<double, 4> residuals)
      : Error(what), reason_(reason), energy_(energy), residuals_(residuals) {}

  Reason reason() const { return reason_; }
  std::complex<double> energy() const { return energy_; }
  /// Residuals of the four branch combinations, in sheet order I..IV.
  const std::array<double, 4>& residuals() const { return residuals_; }

 private:
  Reason reason_;
  std::complex<double> energy_;
  std::array<double, 4> residuals_;
};

/// Time integration lost unitarity beyond the configured bound.
class IntegratorError : public Error {
 public:
  IntegratorError(const std::string& what, double drift) : Error(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

}  // namespace qbic
