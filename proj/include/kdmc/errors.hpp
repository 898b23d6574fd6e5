// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kdmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input, detected before any simulation work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidRateError : public Error {
 public:
  using Error::Error;
};

// Two fields (or a field and a background) live on different grids.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class StabilityError : public NumericalError {
 public:
  StabilityError(double requested, double admissible)
      : NumericalError("time step " + std::to_string(requested) +
                       " s exceeds the stability bound " +
                       std::to_string(admissible) + " s"),
        requested_(requested),
        admissible_(admissible) {}

  double requested() const noexcept { return requested_; }
  double admissible() const noexcept { return admissible_; }

 private:
  double requested_;
  double admissible_;
};

class UndefinedNormError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace kdmc
