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

// Test-only oracles: finite differences and a power-iteration SVD that share
// no code path with the library's decompositions.

#ifndef CCAL_TESTS_SUPPORT_ORACLES_HPP_
#define CCAL_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ccal/matrix.hpp"
#include "ccal/random.hpp"

namespace ccal::testing {

/// Central differences of f w.r.t. every entry of `at` (restored afterwards).
inline Mat numeric_gradient(const std::function<double()>& f, Mat& at, double h = 1e-5) {
  Mat g(at.rows(), at.cols());
  auto d = at.data();
  auto gd = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double saved = d[i];
    d[i] = saved + h;
    const double plus = f();
    d[i] = saved - h;
    const double minus = f();
    d[i] = saved;
    gd[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

/// d/dt f(at + t dir) at t = 0 by central differences.
inline double directional_derivative(const std::function<double(const Mat&)>& f,
                                     const Mat& at, const Mat& dir, double h = 1e-5) {
  return (f(at + dir * h) - f(at - dir * h)) / (2.0 * h);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

/// max_i |a_i - n_i| / max(|n|_inf, tiny)
inline double max_rel_error(const Mat& analytic, const Mat& numeric) {
  return max_abs(analytic - numeric) / std::max(max_abs(numeric), 1e-12);
}

inline Mat random_symmetric(std::size_t n, Rng& rng) {
  Mat a = rng.normal_matrix(n, n);
  return symmetrize(a);
}

inline Mat random_spd(std::size_t n, Rng& rng) {
  Mat a = rng.normal_matrix(n, n);
  Mat s = matmul_tn(a, a);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += static_cast<double>(n);
  return s;
}

inline Mat random_orthogonal(std::size_t n, Rng& rng) {
  Mat q = rng.normal_matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += q(r, c) * q(r, p);
        for (std::size_t r = 0; r < n; ++r) q(r, c) -= dot * q(r, p);
      }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += q(r, c) * q(r, c);
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
  }
  return q;
}

/// Singular values of t (descending, min(rows, cols) of them) by power
/// iteration with deflation on t' t, refined by Rayleigh quotients.
inline std::vector<double> power_singular_values(const Mat& t) {
  const std::size_t n = t.cols();
  const std::size_t count = std::min(t.rows(), t.cols());
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < t.rows(); ++r) b[i][j] += t(r, i) * t(r, j);

  std::vector<double> out;
  Rng rng(12345);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    double lambda = 0.0;
    for (int it = 0; it < 500000; ++it) {
      std::vector<double> w(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i] += b[i][j] * v[j];
      double norm = 0.0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        lambda = 0.0;
        break;
      }
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] /= norm;
        change = std::max(change, std::abs(w[i] - v[i]));
      }
      v = w;
      double rq = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rq += v[i] * b[i][j] * v[j];
      lambda = rq;
      if (change < 1e-14) break;
    }
    out.push_back(std::sqrt(std::max(lambda, 0.0)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b[i][j] -= lambda * v[i] * v[j];
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

}  // namespace ccal::testing

#endif  // CCAL_TESTS_SUPPORT_ORACLES_HPP_
