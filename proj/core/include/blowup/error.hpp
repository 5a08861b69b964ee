#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// F(s) reached sup B, so B^{-1}(F(s)) is undefined (finite-sup operators).
class DomainExceeded : public Error {
 public:
  using Error::Error;
};

// An improper integral that should converge was detected as divergent.
class Divergence : public Error {
 public:
  using Error::Error;
};

// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace blowup
