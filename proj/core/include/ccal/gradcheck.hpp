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

#ifndef CCAL_GRADCHECK_HPP_
#define CCAL_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ccal {

enum class GradTarget { kCcaLayer, kTno, kRanking, kMlp, kEndToEnd };

std::string_view target_name(GradTarget t);
std::optional<GradTarget> parse_target(std::string_view name);

struct GradCheckDims {
  std::size_t m = 64;
  std::size_t dx = 8;
  std::size_t dy = 8;
  std::size_t k = 4;
  double reg = 1e-3;
  double margin = 0.7;
  /// mlp target only: start from all-zero weights and biases.
  bool zero_weights = false;
};

struct GradCheckReport {
  GradTarget target = GradTarget::kCcaLayer;
  double max_rel_error = 0.0;
  bool pass = false;
  std::size_t probes = 0;          // coordinates compared
  std::size_t kinks_skipped = 0;   // coordinates whose stencil crossed a hinge
  std::size_t attempts = 1;        // data draws used (degenerate spectra redraw)
  std::string message;
};

/// Compares analytic adjoints against central differences with step h.
/// The error of one coordinate is |a - n| / max(|a|, |n|, 1e-3 * s) where s
/// is the largest finite-difference magnitude over all coordinates, so
/// entries far below the gradient's scale are judged on that scale.
GradCheckReport grad_check(GradTarget target, const GradCheckDims& dims,
                           std::uint64_t seed, double h, double tol);

}  // namespace ccal

#endif  // CCAL_GRADCHECK_HPP_
