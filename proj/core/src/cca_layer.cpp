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

#include "ccal/cca_layer.hpp"

#include <atomic>
#include <string>

#include "ccal/errors.hpp"

namespace ccal {

namespace {

std::uint64_t next_layer_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

CcaLayer::CcaLayer(std::size_t k, double reg) : k_(k), reg_(reg), id_(next_layer_id()) {
  if (k < 1) throw ContractError("CcaLayer: k must be >= 1");
  if (!(reg >= 0.0)) throw ContractError("CcaLayer: r must be >= 0");
  state_.k = k;
  state_.reg = reg;
}

CcaSolution CcaLayer::solve(const Mat& x, const Mat& y, double reg) {
  if (x.rows() < k_ + 1)
    throw InsufficientSamplesError("CcaLayer: batch of " + std::to_string(x.rows()) +
                                   " samples, need at least k + 1 = " +
                                   std::to_string(k_ + 1));
  CcaSolution sol = solve_cca(x, y, reg, k_);
  state_ = sol.state;
  ++generation_;
  return sol;
}

CcaLayer::TrainOutput CcaLayer::forward_train(const Mat& x, const Mat& y) {
  return forward_train(x, y, reg_);
}

CcaLayer::TrainOutput CcaLayer::forward_train(const Mat& x, const Mat& y,
                                              double reg) {
  TrainOutput out;
  out.tape.solution_ = solve(x, y, reg);
  out.tape.layer_id_ = id_;
  out.tape.generation_ = generation_;
  const CcaSolution& sol = out.tape.solution_;
  out.x = matmul(sol.cov.xc, state_.proj_x);
  out.y = matmul(sol.cov.yc, state_.proj_y);
  return out;
}

std::pair<Mat, Mat> CcaLayer::forward_eval(const Mat& x, const Mat& y) const {
  if (!state_.fitted()) throw ContractError("CcaLayer: forward_eval before any fit");
  return project(state_, x, y);
}

BatchGradient CcaLayer::backward(const LayerTape& tape, const Mat& out_x_adj,
                                 const Mat& out_y_adj) const {
  if (tape.layer_id_ != id_ || tape.generation_ != generation_)
    throw ContractError("CcaLayer: stale tape (layer ran forward since)");
  const CcaSolution& sol = tape.solution_;
  const CcaState& st = sol.state;
  const Mat& xc = sol.cov.xc;
  const Mat& yc = sol.cov.yc;
  if (out_x_adj.rows() != xc.rows() || out_x_adj.cols() != k_ ||
      out_y_adj.rows() != yc.rows() || out_y_adj.cols() != k_)
    throw ContractError("CcaLayer: output adjoint shape mismatch");

  // X* = Xc A, Y* = Yc B
  Mat xc_adj = matmul_nt(out_x_adj, st.proj_x);
  Mat yc_adj = matmul_nt(out_y_adj, st.proj_y);
  const Mat a_adj = matmul_tn(xc, out_x_adj);
  const Mat b_adj = matmul_tn(yc, out_y_adj);

  // A = Cx' U_k diag(signs), B = Cy' V_k
  const Mat uk = scale_cols(sol.left.vectors.leading_cols(k_), sol.signs);
  const Mat vk = sol.right.vectors.leading_cols(k_);
  Mat cx_adj = matmul_nt(uk, a_adj);
  Mat cy_adj = matmul_nt(vk, b_adj);
  const Mat uk_adj = scale_cols(matmul(sol.cx, a_adj), sol.signs);
  const Mat vk_adj = matmul(sol.cy, b_adj);

  const std::size_t dx = xc.cols(), dy = yc.cols();
  Mat u_adj(dx, dx), v_adj(dy, dy);
  for (std::size_t r = 0; r < dx; ++r)
    for (std::size_t c = 0; c < k_; ++c) u_adj(r, c) = uk_adj(r, c);
  for (std::size_t r = 0; r < dy; ++r)
    for (std::size_t c = 0; c < k_; ++c) v_adj(r, c) = vk_adj(r, c);

  const Mat tt_adj = eig_sym_adjoint(sol.left, {}, u_adj);
  const Mat ttt_adj = eig_sym_adjoint(sol.right, {}, v_adj);
  const Mat t_adj = (matmul(tt_adj, sol.t) + matmul(sol.t, ttt_adj)) * 2.0;

  return whitening_adjoint(sol, t_adj, std::move(cx_adj), std::move(cy_adj),
                           std::move(xc_adj), std::move(yc_adj));
}

void CcaLayer::refit_statistics(const Mat& x, const Mat& y) {
  refit_statistics(x, y, reg_);
}

void CcaLayer::refit_statistics(const Mat& x, const Mat& y, double reg) {
  solve(x, y, reg);
}

void CcaLayer::set_state(CcaState state) {
  if (state.fitted() && (state.k != k_ || state.proj_x.cols() != k_ ||
                         state.proj_y.cols() != k_ || state.corr.size() != k_))
    throw ContractError("CcaLayer: state has wrong k");
  state_ = std::move(state);
  ++generation_;
}

}  // namespace ccal
