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

// Dense double-precision matrices and the decompositions the CCA layer is
// built from, each paired with its reverse-mode (adjoint) rule.

#ifndef CCAL_MATRIX_HPP_
#define CCAL_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ccal {

using Vec = std::vector<double>;

/// Row-major dense matrix. Sized constructors require rows, cols >= 1; a
/// default-constructed Mat is an empty placeholder.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data` (row-major). Throws ContractError on a size
  /// mismatch or a non-finite entry.
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  Mat transpose() const;
  /// The first `count` columns.
  Mat leading_cols(std::size_t count) const;
  Mat select_rows(std::span<const std::size_t> indices) const;

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s);

  bool all_finite() const;

  friend bool operator==(const Mat& a, const Mat& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);

/// A * B.
Mat matmul(const Mat& a, const Mat& b);
/// A' * B.
Mat matmul_tn(const Mat& a, const Mat& b);
/// A * B'.
Mat matmul_nt(const Mat& a, const Mat& b);

Mat hadamard(const Mat& a, const Mat& b);
double frobenius_norm(const Mat& a);
double max_abs(const Mat& a);
/// Sum of elementwise products.
double inner(const Mat& a, const Mat& b);
/// (A + A') / 2.
Mat symmetrize(const Mat& a);
/// Lower triangle including the diagonal; strict upper part zeroed.
Mat lower_triangle(const Mat& a);
bool is_lower_triangular(const Mat& a);
Vec col_means(const Mat& a);
Vec col_sums(const Mat& a);
/// Subtracts `v` from every row.
Mat subtract_row(const Mat& a, std::span<const double> v);
/// Scales column j by s[j].
Mat scale_cols(const Mat& a, std::span<const double> s);
/// ||A - B||_F / max(||B||_F, tiny).
double relative_frobenius_error(const Mat& a, const Mat& b);

// ---------------------------------------------------------------------------
// Decompositions
// ---------------------------------------------------------------------------

/// Symmetric eigendecomposition S = U diag(values) U'.
/// `values` are descending; in every column of `vectors` the entry of largest
/// magnitude is positive (ties resolved towards the lowest row index).
struct EigSym {
  Vec values;
  Mat vectors;
};

/// Lower-triangular L with S = L L'. Throws ContractError for a non-square or
/// asymmetric (> 1e-10 relative) input and DecompositionError on a
/// non-positive pivot.
Mat cholesky_lower(const Mat& s);

/// Inverse of a lower-triangular matrix by forward substitution. Throws
/// SingularMatrixError when a diagonal entry is not strictly positive.
Mat invert_lower(const Mat& l);

/// Cyclic Jacobi. Input is symmetrized first; converges when the
/// off-diagonal Frobenius mass drops below 1e-12 * ||S||_F.
EigSym eig_sym(const Mat& s);

inline constexpr double kEigenGap = 1e-8;
inline constexpr int kJacobiMaxSweeps = 100;

/// Adjoint of eig_sym. `value_adjoints` may be empty (treated as zero);
/// `vector_adjoints` may be empty or n x n, where columns that are entirely
/// zero carry no gradient. Throws DegenerateSpectrumError when two
/// eigenvalues closer than `gap` meet a nonzero vector adjoint.
Mat eig_sym_adjoint(const EigSym& decomp, std::span<const double> value_adjoints,
                    const Mat& vector_adjoints, double gap = kEigenGap);

/// Adjoint of invert_lower: given C = L^-1 and dF/dC, returns the lower
/// triangle of -C' (dF/dC) C'.
Mat invert_lower_adjoint(const Mat& inverse, const Mat& inverse_adjoint);

/// Adjoint of cholesky_lower: given L and dF/dL, returns the symmetric dF/dS.
Mat cholesky_adjoint(const Mat& l, const Mat& l_adjoint);

}  // namespace ccal

#endif  // CCAL_MATRIX_HPP_
