// Copyright 2026 The POWR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace powr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument (out-of-range action, dimension mismatch, bad sizes).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A policy function returned something that is not a probability vector.
class PolicyError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for this object (e.g. exact dynamics of a
/// continuous environment).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure or non-finite values in a numerical routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised when gamma times the spectral radius of K_lambda^{-1} M reaches 1,
/// i.e. the Neumann inversion behind the action-value estimate is no longer
/// a contraction.
class ContractionViolation : public NumericalError {
 public:
  ContractionViolation(double radius, double gamma)
      : NumericalError("contraction violated: gamma * rho = " +
                       std::to_string(gamma * radius) + " (rho = " +
                       std::to_string(radius) + ")"),
        radius_(radius),
        gamma_(gamma) {}

  double radius() const noexcept { return radius_; }
  double gamma() const noexcept { return gamma_; }

 private:
  double radius_;
  double gamma_;
};

/// Malformed configuration or override.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace powr
