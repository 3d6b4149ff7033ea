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

#ifndef CCAL_CCA_LAYER_HPP_
#define CCAL_CCA_LAYER_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>

#include "ccal/cca_core.hpp"
#include "ccal/matrix.hpp"

namespace ccal {

class CcaLayer;

/// Intermediates of one training forward pass. Only valid for the layer
/// that produced it and only until that layer's next forward_train or
/// refit_statistics.
class LayerTape {
 public:
  const CcaSolution& solution() const { return solution_; }

 private:
  friend class CcaLayer;
  CcaSolution solution_;
  std::uint64_t layer_id_ = 0;
  std::uint64_t generation_ = 0;
};

/// Projects two views with the CCA solution of the current batch and is
/// differentiable end to end. At evaluation time the stored statistics are
/// applied as a fixed affine map.
class CcaLayer {
 public:
  CcaLayer(std::size_t k, double reg);

  struct TrainOutput {
    Mat x, y;
    LayerTape tape;
  };

  /// Fits on this batch (m >= k + 1), stores the statistics and returns the
  /// projected batch.
  TrainOutput forward_train(const Mat& x, const Mat& y);
  /// Same, with a one-off regularization override (state.reg records it).
  TrainOutput forward_train(const Mat& x, const Mat& y, double reg);

  /// Applies stored statistics; any m >= 1.
  std::pair<Mat, Mat> forward_eval(const Mat& x, const Mat& y) const;

  /// Adjoints w.r.t. the layer inputs given adjoints of its outputs.
  BatchGradient backward(const LayerTape& tape, const Mat& out_x_adj,
                         const Mat& out_y_adj) const;

  /// Recomputes statistics on a (typically larger) batch without a tape.
  void refit_statistics(const Mat& x, const Mat& y);
  void refit_statistics(const Mat& x, const Mat& y, double reg);

  const CcaState& state() const { return state_; }
  void set_state(CcaState state);
  std::size_t k() const { return k_; }
  double reg() const { return reg_; }

 private:
  CcaSolution solve(const Mat& x, const Mat& y, double reg);

  std::size_t k_;
  double reg_;
  CcaState state_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
};

}  // namespace ccal

#endif  // CCAL_CCA_LAYER_HPP_
