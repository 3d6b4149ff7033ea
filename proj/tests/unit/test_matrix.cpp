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

#include <cmath>

#include "ccal/errors.hpp"
#include "ccal/matrix.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace ccal;
using ccal::testing::numeric_gradient;

namespace {

void check_eig_invariants(const Mat& s, const EigSym& eig) {
  const std::size_t n = s.rows();
  CHECK(max_abs(matmul_tn(eig.vectors, eig.vectors) - Mat::identity(n)) < 1e-10);
  for (std::size_t i = 0; i + 1 < n; ++i) CHECK(eig.values[i] >= eig.values[i + 1]);
  const Mat rec = matmul_nt(matmul(eig.vectors, Mat::diagonal(eig.values)), eig.vectors);
  if (frobenius_norm(s) > 0) CHECK(relative_frobenius_error(rec, symmetrize(s)) < 1e-9);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(pivot, c))) pivot = r;
    CHECK(eig.vectors(pivot, c) > 0.0);
  }
}

}  // namespace

TEST_SUITE("matrix") {
  TEST_CASE("construction rejects bad shapes and non-finite data") {
    CHECK_THROWS_AS(Mat(0, 3), ContractError);
    CHECK_THROWS_AS(Mat(2, 2, std::vector<double>{1, 2, 3}), ContractError);
    CHECK_THROWS_AS(Mat(1, 2, std::vector<double>{1, NAN}), ContractError);
    CHECK_THROWS_AS((Mat{{1, 2}, {3}}), ContractError);
    const Mat a{{1, 2}, {3, 4}};
    CHECK(a(1, 0) == 3);
    CHECK(matmul(a, Mat::identity(2)) == a);
    CHECK(matmul_tn(a, a) == matmul(a.transpose(), a));
    CHECK(matmul_nt(a, a) == matmul(a, a.transpose()));
  }

  TEST_CASE("cholesky_lower") {
    CHECK(cholesky_lower(Mat::identity(3)) == Mat::identity(3));
    const Mat l = cholesky_lower(Mat{{4, 2}, {2, 5}});
    CHECK(l == Mat{{2, 0}, {1, 2}});

    try {
      cholesky_lower(Mat{{1, 2}, {2, 1}});
      FAIL("expected DecompositionError");
    } catch (const DecompositionError& e) {
      CHECK(e.pivot() == 2);
    }
    CHECK_THROWS_AS(cholesky_lower(Mat{{1, 0.5}, {0.4, 1}}), ContractError);

    Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
      const Mat s = testing::random_spd(2 + rng.below(7), rng);
      const Mat f = cholesky_lower(s);
      CHECK(is_lower_triangular(f));
      CHECK(relative_frobenius_error(matmul_nt(f, f), s) < 1e-10);
    }
  }

  TEST_CASE("invert_lower") {
    CHECK(invert_lower(Mat::identity(4)) == Mat::identity(4));
    CHECK(invert_lower(Mat{{2, 0}, {1, 2}}) == Mat{{0.5, 0}, {-0.25, 0.5}});
    CHECK_THROWS_AS(invert_lower(Mat{{1, 0}, {1, 0}}), SingularMatrixError);
    CHECK_THROWS_AS(invert_lower(Mat{{1, 0}, {1, -2}}), SingularMatrixError);
  }

  TEST_CASE("cholesky then inverse whitens") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
      const Mat s = testing::random_spd(2 + rng.below(8), rng);
      const Mat c = invert_lower(cholesky_lower(s));
      CHECK(is_lower_triangular(c));
      CHECK(max_abs(matmul_nt(matmul(c, s), c) - Mat::identity(s.rows())) < 1e-9);
    }
  }

  TEST_CASE("eig_sym examples") {
    const EigSym d = eig_sym(Mat{{3, 0}, {0, 1}});
    CHECK(d.values == Vec{3, 1});
    CHECK(d.vectors == Mat::identity(2));

    const EigSym swap = eig_sym(Mat{{0, 1}, {1, 0}});
    CHECK(swap.values[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(swap.values[1] == doctest::Approx(-1.0).epsilon(1e-14));
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(max_abs(swap.vectors - Mat{{h, h}, {h, -h}}) < 1e-14);

    const EigSym id = eig_sym(Mat::identity(5));
    for (double e : id.values) CHECK(e == 1.0);
    check_eig_invariants(Mat::identity(5), id);

    const EigSym zero = eig_sym(Mat(3, 3));
    for (double e : zero.values) CHECK(e == 0.0);
  }

  TEST_CASE("eig_sym recovers a planted spectrum") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + rng.below(9);
      const Mat q = testing::random_orthogonal(n, rng);
      Vec e(n);
      for (std::size_t i = 0; i < n; ++i) e[i] = static_cast<double>(n - i) + 0.3 * rng.uniform();
      const Mat s = matmul_nt(matmul(q, Mat::diagonal(e)), q);
      const EigSym eig = eig_sym(s);
      check_eig_invariants(s, eig);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(eig.values[i] - e[i]) < 1e-9);
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += eig.vectors(r, i) * q(r, i);
        CHECK(std::abs(std::abs(dot) - 1.0) < 1e-9);
      }
    }
  }

  TEST_CASE("eig_sym invariants on random symmetric input") {
    Rng rng(4);
    for (int trial = 0; trial < 25; ++trial) {
      const Mat s = testing::random_symmetric(1 + rng.below(12), rng);
      check_eig_invariants(s, eig_sym(s));
    }
  }

  TEST_CASE("eig_sym_adjoint examples") {
    const EigSym d = eig_sym(Mat{{3, 0}, {0, 1}});
    CHECK(eig_sym_adjoint(d, Vec{0, 0}, Mat(2, 2)) == Mat(2, 2));
    CHECK(max_abs(eig_sym_adjoint(d, Vec{1, 0}, Mat{}) - Mat{{1, 0}, {0, 0}}) < 1e-15);
  }

  TEST_CASE("eig_sym_adjoint matches finite differences") {
    Rng rng(5);
    Mat s = testing::random_symmetric(6, rng);
    const Mat w = rng.normal_matrix(6, 6);
    Vec we(6);
    for (double& v : we) v = rng.normal();
    auto f = [&](const Mat& at) {
      const EigSym e = eig_sym(at);
      double total = inner(w, e.vectors);
      for (std::size_t i = 0; i < 6; ++i) total += we[i] * e.values[i];
      return total;
    };
    const EigSym base = eig_sym(s);
    const Mat adj = eig_sym_adjoint(base, we, w);
    CHECK(adj == adj.transpose());
    const Mat num = numeric_gradient([&] { return f(s); }, s);
    CHECK(testing::max_rel_error(adj, num) < 1e-5);

    for (int dir = 0; dir < 10; ++dir) {
      const Mat delta = testing::random_symmetric(6, rng);
      const double dd = testing::directional_derivative(f, s, delta);
      CHECK(testing::relative_error(inner(adj, delta), dd) < 1e-5);
    }
  }

  TEST_CASE("eig_sym_adjoint refuses degenerate pairs that carry gradient") {
    const EigSym d = eig_sym(Mat::identity(3));
    Mat u_adj(3, 3);
    u_adj(0, 0) = 1.0;
    try {
      eig_sym_adjoint(d, {}, u_adj);
      FAIL("expected DegenerateSpectrumError");
    } catch (const DegenerateSpectrumError& e) {
      CHECK(e.first() == 0);
      CHECK(e.second() == 1);
    }
    // Eigenvalue-only adjoints are fine on a repeated spectrum.
    CHECK_NOTHROW(eig_sym_adjoint(d, Vec{1, 1, 1}, Mat{}));
  }

  TEST_CASE("invert_lower_adjoint") {
    const Mat id = Mat::identity(3);
    CHECK(invert_lower_adjoint(id, Mat(3, 3)) == Mat(3, 3));
    Rng rng(6);
    const Mat abar = rng.normal_matrix(3, 3);
    CHECK(max_abs(invert_lower_adjoint(id, abar) + lower_triangle(abar)) < 1e-15);
    CHECK_THROWS_AS(invert_lower_adjoint(id, Mat(2, 2)), ContractError);

    Mat l = lower_triangle(rng.normal_matrix(5, 5));
    for (std::size_t i = 0; i < 5; ++i) l(i, i) = 2.0 + rng.uniform();
    const Mat w = rng.normal_matrix(5, 5);
    const Mat inv = invert_lower(l);
    const Mat adj = invert_lower_adjoint(inv, w);
    const Mat num = lower_triangle(numeric_gradient([&] { return inner(w, invert_lower(l)); }, l));
    CHECK(testing::max_rel_error(adj, num) < 1e-5);

    auto f = [&](const Mat& at) { return inner(w, invert_lower(at)); };
    for (int dir = 0; dir < 10; ++dir) {
      const Mat delta = lower_triangle(rng.normal_matrix(5, 5));
      CHECK(testing::relative_error(inner(adj, delta),
                                    testing::directional_derivative(f, l, delta)) < 1e-5);
    }
  }

  TEST_CASE("cholesky_adjoint") {
    CHECK(cholesky_adjoint(Mat{{2}}, Mat{{0}}) == Mat{{0}});
    CHECK(cholesky_adjoint(Mat{{2}}, Mat{{1.0}})(0, 0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(cholesky_adjoint(Mat::identity(2), Mat(3, 3)), ContractError);

    Rng rng(7);
    Mat s = testing::random_spd(6, rng);
    const Mat w = rng.normal_matrix(6, 6);
    auto f = [&](const Mat& at) { return inner(w, cholesky_lower(at)); };
    const Mat adj = cholesky_adjoint(cholesky_lower(s), w);
    CHECK(adj == adj.transpose());

    // Symmetric probes: perturb (i, j) and (j, i) together.
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        Mat e(6, 6);
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        const double num = testing::directional_derivative(f, s, e);
        const double ana = inner(adj, e);
        worst = std::max(worst, std::abs(num - ana));
        scale = std::max(scale, std::abs(num));
      }
    CHECK(worst / scale < 1e-5);

    for (int dir = 0; dir < 10; ++dir) {
      const Mat delta = testing::random_symmetric(6, rng);
      CHECK(testing::relative_error(inner(adj, delta),
                                    testing::directional_derivative(f, s, delta)) < 1e-5);
    }
  }
}
