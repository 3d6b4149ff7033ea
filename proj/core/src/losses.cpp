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

#include "ccal/losses.hpp"

#include <cmath>
#include <string>

#include "ccal/errors.hpp"

namespace ccal {

namespace {

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

struct Normalized {
  Mat unit;
  Vec norms;
};

Normalized normalize_rows(const Mat& a, const char* which) {
  Normalized out{a, Vec(a.rows())};
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double n = norm_of(a.row(r));
    if (!(n > 0.0))
      throw UndefinedScoreError(std::string("ranking loss: zero-norm ") + which +
                                " row " + std::to_string(r));
    out.norms[r] = n;
    for (double& v : out.unit.row(r)) v /= n;
  }
  return out;
}

// Chain through x_hat = x / |x|.
Mat unnormalize_adjoint(const Normalized& n, const Mat& unit_adj) {
  Mat out = unit_adj;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto u = n.unit.row(r);
    auto g = out.row(r);
    double proj = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) proj += g[c] * u[c];
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = (g[c] - proj * u[c]) / n.norms[r];
  }
  return out;
}

void check_pair(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ContractError("ranking loss: X* and Y* must have identical shape");
  if (x.rows() < 2) throw ContractError("ranking loss: need at least 2 pairs");
}

}  // namespace

double cosine_score(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("cosine_score: length mismatch");
  const double nx = norm_of(x), ny = norm_of(y);
  if (!(nx > 0.0) || !(ny > 0.0))
    throw UndefinedScoreError("cosine_score: zero-norm vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return dot / (nx * ny);
}

LossWithGradient ranking_loss_with_gradient(const Mat& x, const Mat& y,
                                            const LossConfig& cfg) {
  check_pair(x, y);
  if (!(cfg.margin > 0.0)) throw ContractError("ranking loss: margin must be > 0");
  const Normalized nx = normalize_rows(x, "x");
  const Normalized ny = normalize_rows(y, "y");
  const Mat scores = matmul_nt(nx.unit, ny.unit);
  const std::size_t m = x.rows();

  Mat score_adj(m, m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double base = cfg.margin - scores(i, i);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double h = base + scores(i, j);
      if (h > 0.0) {
        total += h;
        score_adj(i, j) += 1.0;
        score_adj(i, i) -= 1.0;
      }
    }
    if (!cfg.symmetric) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double h = base + scores(j, i);
      if (h > 0.0) {
        total += h;
        score_adj(j, i) += 1.0;
        score_adj(i, i) -= 1.0;
      }
    }
  }

  LossWithGradient out;
  out.value = total;
  out.grad.x = unnormalize_adjoint(nx, matmul(score_adj, ny.unit));
  out.grad.y = unnormalize_adjoint(ny, matmul_tn(score_adj, nx.unit));
  return out;
}

double ranking_loss(const Mat& x, const Mat& y, const LossConfig& cfg) {
  return ranking_loss_with_gradient(x, y, cfg).value;
}

BatchGradient ranking_loss_adjoint(const Mat& x, const Mat& y,
                                   const LossConfig& cfg) {
  return ranking_loss_with_gradient(x, y, cfg).grad;
}

std::size_t ranking_query_count(std::size_t m, const LossConfig& cfg) {
  return cfg.symmetric ? 2 * m : m;
}

LossWithGradient tno_loss(const Mat& x, const Mat& y, double reg) {
  BatchGradient g = tno_gradient(x, y, reg);
  g.x *= -1.0;
  g.y *= -1.0;
  return {-tno_value(x, y, reg), std::move(g)};
}

}  // namespace ccal
