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

#ifndef CCAL_LOSSES_HPP_
#define CCAL_LOSSES_HPP_

#include <cstddef>
#include <span>

#include "ccal/cca_core.hpp"
#include "ccal/matrix.hpp"

namespace ccal {

struct LossConfig {
  double margin = 0.5;
  /// Also sum hinges with y-rows as queries and x-rows as contrastive items.
  bool symmetric = false;
};

/// <x, y> / (|x| |y|). Throws UndefinedScoreError for a zero vector.
double cosine_score(std::span<const double> x, std::span<const double> y);

/// Pairwise hinge ranking loss over a batch of paired embeddings: for every
/// query row i and every mismatching row j, max(0, margin - s(x_i, y_i) +
/// s(x_i, y_j)). Returns the raw sum.
double ranking_loss(const Mat& x, const Mat& y, const LossConfig& cfg);

/// Gradient of the raw ranking-loss sum w.r.t. both embedding batches.
/// Hinges that are exactly zero contribute nothing.
BatchGradient ranking_loss_adjoint(const Mat& x, const Mat& y,
                                   const LossConfig& cfg);

struct LossWithGradient {
  double value = 0.0;
  BatchGradient grad;
};

/// Value and gradient in one pass.
LossWithGradient ranking_loss_with_gradient(const Mat& x, const Mat& y,
                                            const LossConfig& cfg);

/// Number of query terms (m, or 2m when symmetric); the reported loss is the
/// raw sum divided by this.
std::size_t ranking_query_count(std::size_t m, const LossConfig& cfg);

/// Negated trace norm of T, so minimizing it maximizes total correlation.
LossWithGradient tno_loss(const Mat& x, const Mat& y, double reg);

}  // namespace ccal

#endif  // CCAL_LOSSES_HPP_
