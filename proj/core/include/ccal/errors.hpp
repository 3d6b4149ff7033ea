// Copyright 2026 The ccal Authors.
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

#ifndef CCAL_ERRORS_HPP_
#define CCAL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccal {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (shapes, ranges, stale state).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Cholesky hit a non-positive pivot. `pivot()` is 1-based.
class DecompositionError : public Error {
 public:
  DecompositionError(std::size_t pivot, double value)
      : Error("cholesky: matrix not positive definite at pivot " +
              std::to_string(pivot) + " (value " + std::to_string(value) +
              ")"),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Two eigenvalues whose eigenvectors carry gradient are closer than the gap
/// threshold; indices are 0-based positions in the descending spectrum.
class DegenerateSpectrumError : public Error {
 public:
  DegenerateSpectrumError(std::size_t i, std::size_t j, double gap)
      : Error("degenerate spectrum: eigenvalues " + std::to_string(i) +
              " and " + std::to_string(j) + " differ by " +
              std::to_string(gap)),
        i_(i),
        j_(j) {}
  std::size_t first() const { return i_; }
  std::size_t second() const { return j_; }

 private:
  std::size_t i_, j_;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Cosine score requested for a zero-norm vector.
class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

class PoisonedGradientError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary or text file. `offset()` is the byte position where
/// parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace ccal

#endif  // CCAL_ERRORS_HPP_
