#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutoff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class EnvelopeViolation : public Error {
 public:
  EnvelopeViolation(const std::string& what, double radius, double ratio)
      : Error(what), radius_(radius), ratio_(ratio) {}
  double radius() const noexcept { return radius_; }
  double ratio() const noexcept { return ratio_; }

 private:
  double radius_;
  double ratio_;
};

class GridTooSmall : public Error {
 public:
  GridTooSmall(const std::string& what, double boundary_value)
      : Error(what), boundary_value_(boundary_value) {}
  double boundary_value() const noexcept { return boundary_value_; }

 private:
  double boundary_value_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::uint64_t seed, std::uint64_t path)
      : Error(what + " (seed " + std::to_string(seed) + ", path " + std::to_string(path) + ")"),
        seed_(seed),
        path_(path) {}
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path() const noexcept { return path_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double time, double step)
      : Error(what + " (t=" + std::to_string(time) + ", h=" + std::to_string(step) + ")"),
        time_(time),
        step_(step) {}
  double time() const noexcept { return time_; }
  double step() const noexcept { return step_; }

 private:
  double time_;
  double step_;
};

class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& what, std::vector<int> candidates)
      : Error(what), candidates_(std::move(candidates)) {}
  const std::vector<int>& candidates() const noexcept { return candidates_; }

 private:
  std::vector<int> candidates_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class AuditFailure : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace cutoff
