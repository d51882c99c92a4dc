#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heis {

/// Base of every error raised by the library. `kind()` lets the CLI map
/// failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  enum class Kind { Validation, Overflow, OutOfRange, Coverage, Resource, Convergence, Quadrature, Boundary, Internal };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(Kind::Validation, what) {}
};

class ArithmeticOverflow : public Error {
 public:
  explicit ArithmeticOverflow(const std::string& what) : Error(Kind::Overflow, what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what) : Error(Kind::OutOfRange, what) {}
};

/// The ball table backing a lattice function is too small for the
/// requested evaluation.
class DomainCoverageError : public Error {
 public:
  DomainCoverageError(const std::string& what, std::int64_t required_radius)
      : Error(Kind::Coverage, what + " (required radius " + std::to_string(required_radius) + ")"),
        required_radius_(required_radius) {}
  std::int64_t required_radius() const noexcept { return required_radius_; }

 private:
  std::int64_t required_radius_;
};

class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, double estimate_bytes)
      : Error(Kind::Resource, what), estimate_bytes_(estimate_bytes) {}
  double estimate_bytes() const noexcept { return estimate_bytes_; }

 private:
  double estimate_bytes_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double previous, double last)
      : Error(Kind::Convergence, what), previous_(previous), last_(last) {}
  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(Kind::Quadrature, what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class BoundaryContamination : public Error {
 public:
  explicit BoundaryContamination(const std::string& what) : Error(Kind::Boundary, what) {}
};

class InternalConsistencyError : public Error {
 public:
  explicit InternalConsistencyError(const std::string& what) : Error(Kind::Internal, what) {}
};

}  // namespace heis
