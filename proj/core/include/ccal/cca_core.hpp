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

// Classic two-view CCA on samples-as-rows batches, and the trace-norm
// objective (sum of canonical correlations) with its gradient.
//
// Orientation: X is m x d_x with one sample per row. Covariances are
// X_c' X_c / (m - 1) and projections act as X_c * A.

#ifndef CCAL_CCA_CORE_HPP_
#define CCAL_CCA_CORE_HPP_

#include <cstddef>
#include <utility>

#include "ccal/matrix.hpp"

namespace ccal {

inline constexpr double kDefaultReg = 1e-3;

struct Covariances {
  Vec mean_x, mean_y;
  Mat xc, yc;  // centered batches
  Mat sxx, syy, sxy;
};

/// Means, centered data, and regularized covariance estimates. Throws
/// InsufficientSamplesError for m < 2 and ContractError for r < 0 or a row
/// count mismatch.
Covariances estimate_covariances(const Mat& x, const Mat& y, double reg);

/// Whitened cross-covariance T = Lx^-1 Sxy Ly^-T with Sxx = Lx Lx'.
Mat compute_t(const Mat& sxx, const Mat& syy, const Mat& sxy);

/// Fitted CCA statistics. `proj_x` is d_x x k, `proj_y` is d_y x k.
struct CcaState {
  Vec mean_x, mean_y;
  Mat proj_x, proj_y;
  Vec corr;
  double reg = kDefaultReg;
  std::size_t k = 0;

  bool fitted() const { return !proj_x.empty(); }
  friend bool operator==(const CcaState&, const CcaState&) = default;
};

/// Every intermediate of the CCA solve, kept for reverse mode.
struct CcaSolution {
  Covariances cov;
  Mat lx, ly;  // Cholesky factors
  Mat cx, cy;  // their inverses
  Mat t;
  EigSym left;   // of T T'
  EigSym right;  // of T' T
  Vec signs;     // +-1 applied to the columns of proj_x
  CcaState state;
};

/// Runs the full solve: covariances, Cholesky whitening, the two symmetric
/// eigendecompositions, projection assembly and sign alignment.
CcaSolution solve_cca(const Mat& x, const Mat& y, double reg, std::size_t k);

CcaState cca_fit(const Mat& x, const Mat& y, double reg, std::size_t k);

/// (X - mean_x) * proj_x and (Y - mean_y) * proj_y.
std::pair<Mat, Mat> project(const CcaState& state, const Mat& x, const Mat& y);

/// Canonical correlations implied by exact covariance blocks, descending,
/// min(d_x, d_y) of them.
Vec canonical_correlations(const Mat& sxx, const Mat& syy, const Mat& sxy);

/// Sum of all min(d_x, d_y) canonical correlations (the trace norm of T).
double tno_value(const Mat& x, const Mat& y, double reg);

struct BatchGradient {
  Mat x, y;
};

/// d tno_value / d(X, Y). Throws DegenerateSpectrumError when two of the
/// leading eigenvalues of T T' (or the smallest of them and zero) are closer
/// than kEigenGap.
BatchGradient tno_gradient(const Mat& x, const Mat& y, double reg);

/// Reverse chain from adjoints of T, of the Cholesky inverses and of the
/// centered batches back to the raw batches X and Y. Empty matrices stand in
/// for zero adjoints.
BatchGradient whitening_adjoint(const CcaSolution& sol, const Mat& t_adj,
                                Mat cx_adj, Mat cy_adj, Mat xc_adj, Mat yc_adj);

}  // namespace ccal

#endif  // CCAL_CCA_CORE_HPP_
