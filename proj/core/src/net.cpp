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

#include "ccal/net.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "ccal/errors.hpp"

namespace ccal {

namespace {

std::uint64_t next_tower_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

double elu(double v) { return v > 0.0 ? v : std::expm1(v); }
double elu_derivative(double v) { return v > 0.0 ? 1.0 : std::exp(v); }

Tower::Tower(TowerSpec spec) : spec_(std::move(spec)), id_(next_tower_id()) {
  validate_spec();
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    params_.emplace_back(spec_.widths[l], spec_.widths[l + 1]);
    params_.emplace_back(1, spec_.widths[l + 1]);
  }
}

Tower Tower::glorot(TowerSpec spec, Rng& rng) {
  Tower t(std::move(spec));
  for (std::size_t l = 0; l < t.spec_.num_layers(); ++l) {
    const double fan_in = static_cast<double>(t.spec_.widths[l]);
    const double fan_out = static_cast<double>(t.spec_.widths[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : t.params_[2 * l].data()) w = rng.uniform(-limit, limit);
  }
  return t;
}

void Tower::validate_spec() const {
  if (spec_.widths.size() < 2)
    throw ContractError("TowerSpec: need an input width and at least one layer");
  for (std::size_t w : spec_.widths)
    if (w == 0) throw ContractError("TowerSpec: widths must be >= 1");
}

std::vector<Mat>& Tower::mutable_params() {
  ++version_;
  return params_;
}

Mat Tower::forward(const Mat& input) const { return forward_with_tape(input).first; }

std::pair<Mat, TowerTape> Tower::forward_with_tape(const Mat& input) const {
  if (input.cols() != spec_.input_width())
    throw ContractError("Tower: input width " + std::to_string(input.cols()) +
                        " != " + std::to_string(spec_.input_width()));
  TowerTape tape;
  tape.tower_id_ = id_;
  tape.version_ = version_;
  Mat h = input;
  const std::size_t layers = spec_.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    tape.inputs_.push_back(h);
    Mat z = matmul(h, params_[2 * l]);
    const auto bias = params_[2 * l + 1].row(0);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
    }
    if (l + 1 == layers) {
      h = std::move(z);
    } else {
      tape.preactivations_.push_back(z);
      for (double& v : z.data()) v = elu(v);
      h = std::move(z);
    }
  }
  return {std::move(h), std::move(tape)};
}

TowerGradient Tower::backward(const TowerTape& tape, const Mat& output_adj) const {
  if (tape.tower_id_ != id_ || tape.version_ != version_)
    throw ContractError("Tower: stale tape (parameters changed since forward)");
  const std::size_t layers = spec_.num_layers();
  if (output_adj.cols() != spec_.output_width() ||
      output_adj.rows() != tape.inputs_.front().rows())
    throw ContractError("Tower: output adjoint shape mismatch");

  TowerGradient g;
  g.params.resize(params_.size());
  Mat adj = output_adj;
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers) {
      const Mat& z = tape.preactivations_[l];
      auto a = adj.data();
      auto zd = z.data();
      for (std::size_t i = 0; i < a.size(); ++i) a[i] *= elu_derivative(zd[i]);
    }
    g.params[2 * l] = matmul_tn(tape.inputs_[l], adj);
    Mat bias(1, adj.cols());
    const Vec sums = col_sums(adj);
    std::copy(sums.begin(), sums.end(), bias.row(0).begin());
    g.params[2 * l + 1] = std::move(bias);
    adj = matmul_nt(adj, params_[2 * l]);
  }
  g.input = std::move(adj);
  return g;
}

AdamState make_adam(const std::vector<Mat>& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Mat& p : params) {
    s.first_moment.emplace_back(p.rows(), p.cols());
    s.second_moment.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
               AdamState& adam, double weight_decay) {
  if (params.size() != grads.size() || params.size() != adam.first_moment.size())
    throw ContractError("adam_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols() ||
        params[i].rows() != adam.first_moment[i].rows() ||
        params[i].cols() != adam.first_moment[i].cols())
      throw ContractError("adam_step: shape mismatch at tensor " + std::to_string(i));
    if (!grads[i].all_finite())
      throw PoisonedGradientError("adam_step: non-finite gradient in tensor " +
                                  std::to_string(i) + " at step " +
                                  std::to_string(adam.step + 1));
  }

  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = adam.first_moment[i].data();
    auto v = adam.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] + weight_decay * p[j];
      m[j] = adam.beta1 * m[j] + (1.0 - adam.beta1) * gj;
      v[j] = adam.beta2 * v[j] + (1.0 - adam.beta2) * gj * gj;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= adam.lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
    }
  }
}

std::string_view head_name(Head head) {
  switch (head) {
    case Head::kTno:
      return "tno";
    case Head::kLearnedRank:
      return "learned-rank";
    case Head::kCcalRank:
      return "ccal-rank";
  }
  return "unknown";
}

std::optional<Head> parse_head(std::string_view name) {
  if (name == "tno" || name == "dcca") return Head::kTno;
  if (name == "learned-rank" || name == "learned") return Head::kLearnedRank;
  if (name == "ccal-rank" || name == "ccal") return Head::kCcalRank;
  return std::nullopt;
}

DualNet make_dual_net(TowerSpec spec_f, TowerSpec spec_g, Head head, double reg,
                      std::uint64_t seed) {
  if (spec_f.widths.empty() || spec_g.widths.empty() ||
      spec_f.output_width() != spec_g.output_width())
    throw ContractError("DualNet: both towers must end in the same width k");
  Rng rng(seed);
  DualNet net;
  net.f = Tower::glorot(std::move(spec_f), rng);
  net.g = Tower::glorot(std::move(spec_g), rng);
  net.head = head;
  net.seed = seed;
  if (net.uses_cca()) net.cca.emplace(net.k(), reg);
  return net;
}

std::pair<Mat, Mat> tower_outputs(const DualNet& net, const Mat& a, const Mat& b) {
  return {net.f.forward(a), net.g.forward(b)};
}

std::pair<Mat, Mat> embed(const DualNet& net, const Mat& a, const Mat& b) {
  auto [x, y] = tower_outputs(net, a, b);
  if (!net.uses_cca()) return {std::move(x), std::move(y)};
  if (!net.cca || !net.cca->state().fitted())
    throw ContractError(std::string("embed: ") + std::string(head_name(net.head)) +
                        " model has no fitted CCA statistics; refit first");
  return net.cca->forward_eval(x, y);
}

void refit_cca(DualNet& net, const Mat& a, const Mat& b) {
  if (!net.uses_cca()) return;
  auto [x, y] = tower_outputs(net, a, b);
  net.cca->refit_statistics(x, y);
}

}  // namespace ccal
