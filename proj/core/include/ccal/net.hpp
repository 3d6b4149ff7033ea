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

// Dense ELU towers, the Adam optimizer, and the two-tower model that carries
// one of the three training heads.

#ifndef CCAL_NET_HPP_
#define CCAL_NET_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccal/cca_layer.hpp"
#include "ccal/matrix.hpp"
#include "ccal/random.hpp"

namespace ccal {

/// Layer widths from input to output. Hidden layers use ELU, the last layer
/// is linear.
struct TowerSpec {
  std::vector<std::size_t> widths;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t num_layers() const { return widths.size() - 1; }
  friend bool operator==(const TowerSpec&, const TowerSpec&) = default;
};

double elu(double v);
double elu_derivative(double v);

class Tower;

/// Activations recorded by Tower::forward.
class TowerTape {
 private:
  friend class Tower;
  std::vector<Mat> inputs_;  // input of every layer
  std::vector<Mat> preactivations_;
  std::uint64_t tower_id_ = 0;
  std::uint64_t version_ = 0;
};

struct TowerGradient {
  std::vector<Mat> params;  // same layout as Tower::params()
  Mat input;
};

/// Parameters are stored as [W_0, b_0, W_1, b_1, ...] with W_l of shape
/// in x out and b_l of shape 1 x out.
class Tower {
 public:
  Tower() = default;
  explicit Tower(TowerSpec spec);  // zero weights

  /// Glorot-uniform weights, zero biases.
  static Tower glorot(TowerSpec spec, Rng& rng);

  const TowerSpec& spec() const { return spec_; }
  const std::vector<Mat>& params() const { return params_; }
  /// Mutable access; invalidates outstanding tapes.
  std::vector<Mat>& mutable_params();

  Mat forward(const Mat& input) const;
  std::pair<Mat, TowerTape> forward_with_tape(const Mat& input) const;
  TowerGradient backward(const TowerTape& tape, const Mat& output_adj) const;

  friend bool operator==(const Tower& a, const Tower& b) {
    return a.spec_ == b.spec_ && a.params_ == b.params_;
  }

 private:
  void validate_spec() const;

  TowerSpec spec_;
  std::vector<Mat> params_;
  std::uint64_t id_ = 0;
  std::uint64_t version_ = 0;
};

struct AdamState {
  std::vector<Mat> first_moment;
  std::vector<Mat> second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr = 1e-3;
};

AdamState make_adam(const std::vector<Mat>& params, double lr);

/// One Adam update with weight_decay * param added to each gradient.
/// Throws PoisonedGradientError on a non-finite gradient before touching
/// anything.
void adam_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
               AdamState& adam, double weight_decay);

enum class Head { kTno, kLearnedRank, kCcalRank };

std::string_view head_name(Head head);
/// Accepts "tno"/"dcca", "learned-rank"/"learned", "ccal-rank"/"ccal".
std::optional<Head> parse_head(std::string_view name);

/// Two towers plus a head. The CCA layer exists for the tno and ccal-rank
/// heads; for tno it stays unfitted until statistics are refit for
/// evaluation.
struct DualNet {
  Tower f, g;
  Head head = Head::kLearnedRank;
  std::optional<CcaLayer> cca;
  std::uint64_t seed = 0;

  std::size_t k() const { return f.spec().output_width(); }
  bool uses_cca() const { return head != Head::kLearnedRank; }
};

DualNet make_dual_net(TowerSpec spec_f, TowerSpec spec_g, Head head, double reg,
                      std::uint64_t seed);

/// Tower outputs for both views.
std::pair<Mat, Mat> tower_outputs(const DualNet& net, const Mat& a, const Mat& b);

/// Retrieval embeddings: tower outputs, projected by the stored CCA
/// statistics for the tno and ccal-rank heads. Throws ContractError when
/// those statistics are missing.
std::pair<Mat, Mat> embed(const DualNet& net, const Mat& a, const Mat& b);

/// Refits the CCA statistics from tower outputs on `a`, `b`.
void refit_cca(DualNet& net, const Mat& a, const Mat& b);

}  // namespace ccal

#endif  // CCAL_NET_HPP_
