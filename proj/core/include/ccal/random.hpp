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

#ifndef CCAL_RANDOM_HPP_
#define CCAL_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ccal/matrix.hpp"

namespace ccal {

/// Seeded generator whose outputs are fixed by the seed alone on every
/// platform: std::mt19937_64 is fully specified, and the distributions below
/// avoid the implementation-defined std:: ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  std::vector<std::size_t> permutation(std::size_t n);

  Mat normal_matrix(std::size_t rows, std::size_t cols);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ccal

#endif  // CCAL_RANDOM_HPP_
