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

#include "ccal/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ccal/errors.hpp"

namespace ccal {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(what) + ": shape mismatch (" +
                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  require(rows >= 1 && cols >= 1, "Mat: dimensions must be >= 1");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(rows >= 1 && cols >= 1, "Mat: dimensions must be >= 1");
  require(data_.size() == rows * cols, "Mat: data length != rows * cols");
  require(all_finite(), "Mat: non-finite entry");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  require(rows_ >= 1 && cols_ >= 1, "Mat: dimensions must be >= 1");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require(all_finite(), "Mat: non-finite entry");
}

Mat Mat::identity(std::size_t n) {
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Mat Mat::diagonal(std::span<const double> values) {
  Mat out(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
  return out;
}

Mat Mat::transpose() const {
  Mat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

Mat Mat::leading_cols(std::size_t count) const {
  require(count >= 1 && count <= cols_, "Mat::leading_cols: count out of range");
  Mat out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    std::copy_n(row(r).begin(), count, out.row(r).begin());
  return out;
}

Mat Mat::select_rows(std::span<const std::size_t> indices) const {
  require(!indices.empty(), "Mat::select_rows: no rows selected");
  Mat out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < rows_, "Mat::select_rows: index out of range");
    std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Mat& Mat::operator+=(const Mat& other) {
  require_same_shape(*this, other, "Mat::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& other) {
  require_same_shape(*this, other, "Mat::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Mat out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* br = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Mat out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k).data();
    const double* br = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aki * br[j];
    }
  }
  return out;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  Mat out(a.rows(), b.rows());
  const std::size_t inner_dim = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < inner_dim; ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "hadamard");
  Mat out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  return out;
}

double frobenius_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double inner(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "inner");
  double s = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) s += ad[i] * bd[i];
  return s;
}

Mat symmetrize(const Mat& a) {
  require(a.square(), "symmetrize: matrix not square");
  Mat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(i, j) = 0.5 * (a(i, j) + a(j, i));
  return out;
}

Mat lower_triangle(const Mat& a) {
  Mat out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) out(i, j) = 0.0;
  return out;
}

bool is_lower_triangular(const Mat& a) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

Vec col_sums(const Mat& a) {
  Vec s(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) s[c] += row[c];
  }
  return s;
}

Vec col_means(const Mat& a) {
  Vec s = col_sums(a);
  for (double& v : s) v /= static_cast<double>(a.rows());
  return s;
}

Mat subtract_row(const Mat& a, std::span<const double> v) {
  require(v.size() == a.cols(), "subtract_row: length mismatch");
  Mat out = a;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) row[c] -= v[c];
  }
  return out;
}

Mat scale_cols(const Mat& a, std::span<const double> s) {
  require(s.size() == a.cols(), "scale_cols: length mismatch");
  Mat out = a;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) row[c] *= s[c];
  }
  return out;
}

double relative_frobenius_error(const Mat& a, const Mat& b) {
  return frobenius_norm(a - b) /
         std::max(frobenius_norm(b), std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------

Mat cholesky_lower(const Mat& s) {
  require(s.square(), "cholesky_lower: matrix not square");
  const std::size_t n = s.rows();
  const double scale = std::max(max_abs(s), 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale)
        throw ContractError("cholesky_lower: matrix not symmetric");

  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw DecompositionError(j + 1, d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

Mat invert_lower(const Mat& l) {
  require(l.square(), "invert_lower: matrix not square");
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i)
    if (!(l(i, i) > 0.0))
      throw SingularMatrixError("invert_lower: non-positive diagonal at " +
                                std::to_string(i));
  Mat inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    inv(c, c) = 1.0 / l(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      double v = 0.0;
      for (std::size_t k = c; k < i; ++k) v -= l(i, k) * inv(k, c);
      inv(i, c) = v / l(i, i);
    }
  }
  return inv;
}

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigSym eig_sym(const Mat& s) {
  require(s.square(), "eig_sym: matrix not square");
  const std::size_t n = s.rows();
  Mat a = symmetrize(s);
  Mat v = Mat::identity(n);
  const double threshold = 1e-12 * frobenius_norm(a);

  bool converged = false;
  for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= threshold) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = a(k, p), y = a(k, q);
          a(k, p) = c * x - sn * y;
          a(k, q) = sn * x + c * y;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double x = a(p, k), y = a(q, k);
          a(p, k) = c * x - sn * y;
          a(q, k) = sn * x + c * y;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = v(k, p), y = v(k, q);
          v(k, p) = c * x - sn * y;
          v(k, q) = sn * x + c * y;
        }
      }
    }
  }
  if (!converged)
    throw ConvergenceError("eig_sym: Jacobi did not converge",
                           off_diagonal_norm(a));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigSym out{Vec(n), Mat(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = a(src, src);
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v(r, src)) > std::abs(v(pivot, src))) pivot = r;
    const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(r, src);
  }
  return out;
}

Mat eig_sym_adjoint(const EigSym& decomp, std::span<const double> value_adjoints,
                    const Mat& vector_adjoints, double gap) {
  const std::size_t n = decomp.values.size();
  require(decomp.vectors.rows() == n && decomp.vectors.cols() == n,
          "eig_sym_adjoint: malformed decomposition");
  require(value_adjoints.empty() || value_adjoints.size() == n,
          "eig_sym_adjoint: value adjoint length mismatch");
  require(vector_adjoints.empty() ||
              (vector_adjoints.rows() == n && vector_adjoints.cols() == n),
          "eig_sym_adjoint: vector adjoint shape mismatch");

  const Mat& u = decomp.vectors;
  const Vec& e = decomp.values;
  Mat core(n, n);
  for (std::size_t i = 0; i < value_adjoints.size(); ++i)
    core(i, i) = value_adjoints[i];

  if (!vector_adjoints.empty()) {
    std::vector<bool> active(n, false);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (vector_adjoints(r, c) != 0.0) active[c] = true;

    const Mat w = matmul_tn(u, vector_adjoints);
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        const double diff = e[j] - e[i];
        if (std::abs(diff) < gap)
          throw DegenerateSpectrumError(std::min(i, j), std::max(i, j),
                                        std::abs(diff));
        core(i, j) += w(i, j) / diff;
      }
    }
  }
  return symmetrize(matmul_nt(matmul(u, core), u));
}

Mat invert_lower_adjoint(const Mat& inverse, const Mat& inverse_adjoint) {
  require(inverse.square(), "invert_lower_adjoint: inverse not square");
  require_same_shape(inverse, inverse_adjoint, "invert_lower_adjoint");
  const Mat ct = inverse.transpose();
  return lower_triangle(matmul(matmul(ct, inverse_adjoint), ct) * -1.0);
}

Mat cholesky_adjoint(const Mat& l, const Mat& l_adjoint) {
  require(l.square(), "cholesky_adjoint: factor not square");
  require_same_shape(l, l_adjoint, "cholesky_adjoint");
  const std::size_t n = l.rows();
  Mat phi = lower_triangle(matmul_tn(l, lower_triangle(l_adjoint)));
  for (std::size_t i = 0; i < n; ++i) phi(i, i) *= 0.5;
  const Mat inv = invert_lower(l);
  return symmetrize(matmul(matmul_tn(inv, phi), inv));
}

}  // namespace ccal
