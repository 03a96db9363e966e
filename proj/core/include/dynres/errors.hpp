#pragma once

#include <stdexcept>
#include <string>

namespace dynres {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration or out-of-domain arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not meet its accuracy contract.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Sample spacing too coarse to resolve a phase unambiguously.
class SamplingError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Population leaked into the top of a truncated Fock basis.
class TruncationError : public NumericError {
 public:
  TruncationError(const std::string& what, double leakage, int suggested_cutoff)
      : NumericError(what), leakage_(leakage), suggested_cutoff_(suggested_cutoff) {}

  double leakage() const { return leakage_; }
  int suggested_cutoff() const { return suggested_cutoff_; }

 private:
  double leakage_;
  int suggested_cutoff_;
};

}  // namespace dynres
