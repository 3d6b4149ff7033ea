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

#include "ccal/cca_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccal/errors.hpp"

namespace ccal {

namespace {

// Eigenvalues of T T' are squared correlations; round-off below zero is
// tolerated down to this bound and clamped.
constexpr double kNegativeEigenTolerance = 1e-10;

double clamp_eigenvalue(double e) {
  if (e < -kNegativeEigenTolerance)
    throw Error("cca: T T' has negative eigenvalue " + std::to_string(e));
  return std::max(e, 0.0);
}

void check_k(std::size_t k, std::size_t dx, std::size_t dy) {
  if (k < 1 || k > std::min(dx, dy))
    throw ContractError("cca: k = " + std::to_string(k) +
                        " must lie in [1, min(d_x, d_y) = " +
                        std::to_string(std::min(dx, dy)) + "]");
}

}  // namespace

Covariances estimate_covariances(const Mat& x, const Mat& y, double reg) {
  if (x.rows() != y.rows())
    throw ContractError("estimate_covariances: X and Y row counts differ");
  if (x.rows() < 2)
    throw InsufficientSamplesError(
        "estimate_covariances: need at least 2 samples, got " +
        std::to_string(x.rows()));
  if (!(reg >= 0.0)) throw ContractError("estimate_covariances: r must be >= 0");

  Covariances c;
  c.mean_x = col_means(x);
  c.mean_y = col_means(y);
  c.xc = subtract_row(x, c.mean_x);
  c.yc = subtract_row(y, c.mean_y);
  const double norm = 1.0 / static_cast<double>(x.rows() - 1);
  c.sxx = matmul_tn(c.xc, c.xc) * norm;
  c.syy = matmul_tn(c.yc, c.yc) * norm;
  c.sxy = matmul_tn(c.xc, c.yc) * norm;
  for (std::size_t i = 0; i < c.sxx.rows(); ++i) c.sxx(i, i) += reg;
  for (std::size_t i = 0; i < c.syy.rows(); ++i) c.syy(i, i) += reg;
  return c;
}

Mat compute_t(const Mat& sxx, const Mat& syy, const Mat& sxy) {
  const Mat cx = invert_lower(cholesky_lower(sxx));
  const Mat cy = invert_lower(cholesky_lower(syy));
  return matmul_nt(matmul(cx, sxy), cy);
}

CcaSolution solve_cca(const Mat& x, const Mat& y, double reg, std::size_t k) {
  check_k(k, x.cols(), y.cols());
  CcaSolution s;
  s.cov = estimate_covariances(x, y, reg);
  s.lx = cholesky_lower(s.cov.sxx);
  s.ly = cholesky_lower(s.cov.syy);
  s.cx = invert_lower(s.lx);
  s.cy = invert_lower(s.ly);
  s.t = matmul_nt(matmul(s.cx, s.cov.sxy), s.cy);
  s.left = eig_sym(matmul_nt(s.t, s.t));
  s.right = eig_sym(matmul_tn(s.t, s.t));

  CcaState& st = s.state;
  st.mean_x = s.cov.mean_x;
  st.mean_y = s.cov.mean_y;
  st.reg = reg;
  st.k = k;
  // A = Lx^-T U_k and B = Ly^-T V_k satisfy A' Sxx A = I and A' Sxy B = U'TV.
  st.proj_x = matmul_tn(s.cx, s.left.vectors.leading_cols(k));
  st.proj_y = matmul_tn(s.cy, s.right.vectors.leading_cols(k));

  const Mat cross = matmul_tn(st.proj_x, matmul(s.cov.sxy, st.proj_y));
  s.signs.assign(k, 1.0);
  for (std::size_t i = 0; i < k; ++i)
    if (cross(i, i) < 0.0) s.signs[i] = -1.0;
  st.proj_x = scale_cols(st.proj_x, s.signs);

  st.corr.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    st.corr[i] = std::min(std::sqrt(clamp_eigenvalue(s.left.values[i])), 1.0);
  return s;
}

CcaState cca_fit(const Mat& x, const Mat& y, double reg, std::size_t k) {
  return solve_cca(x, y, reg, k).state;
}

std::pair<Mat, Mat> project(const CcaState& state, const Mat& x, const Mat& y) {
  if (!state.fitted()) throw ContractError("project: CCA state not fitted");
  if (x.cols() != state.mean_x.size() || y.cols() != state.mean_y.size())
    throw ContractError("project: input widths do not match fitted state");
  return {matmul(subtract_row(x, state.mean_x), state.proj_x),
          matmul(subtract_row(y, state.mean_y), state.proj_y)};
}

Vec canonical_correlations(const Mat& sxx, const Mat& syy, const Mat& sxy) {
  const Mat t = compute_t(sxx, syy, sxy);
  const EigSym eig = eig_sym(matmul_nt(t, t));
  const std::size_t k = std::min(sxy.rows(), sxy.cols());
  Vec corr(k);
  for (std::size_t i = 0; i < k; ++i)
    corr[i] = std::min(std::sqrt(clamp_eigenvalue(eig.values[i])), 1.0);
  return corr;
}

double tno_value(const Mat& x, const Mat& y, double reg) {
  const CcaState st = cca_fit(x, y, reg, std::min(x.cols(), y.cols()));
  double total = 0.0;
  for (double c : st.corr) total += c;
  return total;
}

BatchGradient tno_gradient(const Mat& x, const Mat& y, double reg) {
  const std::size_t k = std::min(x.cols(), y.cols());
  const CcaSolution sol = solve_cca(x, y, reg, k);
  const Vec& e = sol.left.values;

  Vec e_adj(e.size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double next = i + 1 < k ? e[i + 1] : 0.0;
    if (e[i] - next < kEigenGap)
      throw DegenerateSpectrumError(i, i + 1, e[i] - next);
    e_adj[i] = 0.5 / std::sqrt(e[i]);
  }
  const Mat tt_adj = eig_sym_adjoint(sol.left, e_adj, Mat{});
  const Mat t_adj = matmul(tt_adj, sol.t) * 2.0;
  return whitening_adjoint(sol, t_adj, Mat{}, Mat{}, Mat{}, Mat{});
}

BatchGradient whitening_adjoint(const CcaSolution& sol, const Mat& t_adj,
                                Mat cx_adj, Mat cy_adj, Mat xc_adj,
                                Mat yc_adj) {
  const Covariances& c = sol.cov;
  const std::size_t m = c.xc.rows();
  if (cx_adj.empty()) cx_adj = Mat(sol.cx.rows(), sol.cx.cols());
  if (cy_adj.empty()) cy_adj = Mat(sol.cy.rows(), sol.cy.cols());
  if (xc_adj.empty()) xc_adj = Mat(c.xc.rows(), c.xc.cols());
  if (yc_adj.empty()) yc_adj = Mat(c.yc.rows(), c.yc.cols());

  // T = Cx Sxy Cy'
  cx_adj += matmul_nt(t_adj, matmul_nt(c.sxy, sol.cy));
  cy_adj += matmul_tn(t_adj, matmul(sol.cx, c.sxy));
  const Mat sxy_adj = matmul_tn(sol.cx, matmul(t_adj, sol.cy));

  const Mat sxx_adj = cholesky_adjoint(sol.lx, invert_lower_adjoint(sol.cx, cx_adj));
  const Mat syy_adj = cholesky_adjoint(sol.ly, invert_lower_adjoint(sol.cy, cy_adj));

  const double norm = 1.0 / static_cast<double>(m - 1);
  xc_adj += matmul(c.xc, sxx_adj) * (2.0 * norm);
  xc_adj += matmul_nt(c.yc, sxy_adj) * norm;
  yc_adj += matmul(c.yc, syy_adj) * (2.0 * norm);
  yc_adj += matmul(c.xc, sxy_adj) * norm;

  // Centering: d/dX of X - 1 mean(X)' removes the column mean of the adjoint.
  return {subtract_row(xc_adj, col_means(xc_adj)),
          subtract_row(yc_adj, col_means(yc_adj))};
}

}  // namespace ccal
