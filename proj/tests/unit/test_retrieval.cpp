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
#include <numbers>

#include "ccal/errors.hpp"
#include "ccal/net.hpp"
#include "ccal/random.hpp"
#include "ccal/retrieval.hpp"
#include "doctest.h"

using namespace ccal;

namespace {

Mat on_circle(const std::vector<double>& angles) {
  Mat m(angles.size(), 2);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    m(i, 0) = std::cos(angles[i]);
    m(i, 1) = std::sin(angles[i]);
  }
  return m;
}

std::vector<std::uint64_t> iota_ids(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("build_index") {
    const RetrievalIndex one = build_index(Mat{{3, 4}}, {42});
    CHECK(one.size() == 1);
    CHECK(one.embeddings()(0, 0) == doctest::Approx(0.6));
    CHECK(one.position(42) == 0);
    CHECK(!one.position(7));
    CHECK_THROWS_AS(build_index(Mat{{1, 0}, {0, 1}}, {5, 5}), ContractError);
    CHECK_THROWS_AS(build_index(Mat{{1, 0}, {0, 0}}, {1, 2}), UndefinedScoreError);

    Rng rng(50);
    const Mat unit = on_circle({0.1, 1.3, 2.9, -0.4});
    const RetrievalIndex idx = build_index(unit, iota_ids(4));
    CHECK(max_abs(idx.embeddings() - unit) < 1e-12);
    const RetrievalIndex big = build_index(rng.normal_matrix(30, 5), iota_ids(30));
    for (std::size_t r = 0; r < 30; ++r) {
      double n = 0.0;
      for (double v : big.embeddings().row(r)) n += v * v;
      CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-10);
    }
  }

  TEST_CASE("rank_of") {
    const RetrievalIndex idx = build_index(Mat{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {10, 11, 12});
    CHECK(rank_of(idx, Vec{0, 1, 0}, 11) == 1);
    // Target orthogonal to the query, candidate 12 closer.
    CHECK(rank_of(idx, Vec{0, 0.1, 1}, 10) == 3);
    const RetrievalIndex two = build_index(Mat{{1, 0}, {0.8, 0.6}}, {0, 1});
    CHECK(rank_of(two, Vec{0, 1}, 0) == 2);

    const RetrievalIndex same = build_index(Mat(5, 2, 1.0), iota_ids(5));
    for (std::uint64_t id = 0; id < 5; ++id) CHECK(rank_of(same, Vec{1, 0}, id) == id + 1);
    CHECK_THROWS_AS(rank_of(same, Vec{1, 0}, 9), ContractError);

    Rng rng(51);
    const Mat cands = rng.normal_matrix(20, 4);
    const Mat queries = rng.normal_matrix(20, 4);
    const RetrievalIndex base = build_index(cands, iota_ids(20));
    Mat scaled = cands;
    for (std::size_t r = 0; r < 20; ++r) {
      const double c = 0.1 + 5.0 * rng.uniform();
      for (double& v : scaled.row(r)) v *= c;
    }
    const RetrievalIndex rescaled = build_index(scaled, iota_ids(20));
    const std::vector<std::size_t> paired = paired_ranks(queries, cands);
    for (std::size_t q = 0; q < 20; ++q) {
      Vec qv(queries.row(q).begin(), queries.row(q).end());
      const std::size_t r = rank_of(base, qv, q);
      CHECK(r == paired[q]);
      for (double& v : qv) v *= 7.5;
      CHECK(rank_of(rescaled, qv, q) == r);
    }
  }

  TEST_CASE("report_from_ranks") {
    const std::vector<std::size_t> ranks{1, 3, 12};
    const RetrievalReport r = report_from_ranks(ranks, Direction::kXToY);
    CHECK(r.recall_at_1 == doctest::Approx(33.33).epsilon(1e-4));
    CHECK(r.recall_at_5 == doctest::Approx(66.67).epsilon(1e-4));
    CHECK(r.recall_at_10 == doctest::Approx(66.67).epsilon(1e-4));
    CHECK(r.median_rank == 3);
    CHECK(r.mrr == doctest::Approx(47.22).epsilon(1e-4));
    CHECK(r.n_queries == 3);
    CHECK(format_report("ccal", r) == "ccal,x2y,33.33,66.67,66.67,3,47.22");
    CHECK(report_header() == "model,direction,R@1,R@5,R@10,MR,MRR");

    const std::vector<std::size_t> even{4, 1, 2, 3};
    CHECK(report_from_ranks(even, Direction::kYToX).median_rank == 2);
    const std::vector<std::size_t> ones{1, 1, 1};
    CHECK(report_from_ranks(ones, Direction::kXToY).mrr == 100.0);
    CHECK_THROWS_AS(report_from_ranks(std::vector<std::size_t>{}, Direction::kXToY), ContractError);
  }

  TEST_CASE("report invariants on random embeddings") {
    Rng rng(52);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 5 + rng.below(40);
      const Mat a = rng.normal_matrix(n, 3), b = rng.normal_matrix(n, 3);
      const RetrievalReport r = evaluate_embeddings(a, b, Direction::kXToY);
      CHECK(r.n_queries == n);
      CHECK(r.recall_at_1 <= r.recall_at_5);
      CHECK(r.recall_at_5 <= r.recall_at_10);
      CHECK(r.recall_at_10 <= 100.0);
      CHECK(r.median_rank >= 1);
      CHECK(r.median_rank <= n);
      CHECK(r.mrr > 0.0);
      CHECK((r.mrr == 100.0) == (r.recall_at_1 == 100.0));
      const auto ranks = paired_ranks(a, b);
      for (std::size_t rank : ranks) CHECK(rank <= n);
    }
  }

  TEST_CASE("random embeddings give harmonic MRR") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(600 + seed);
      total += evaluate_embeddings(rng.normal_matrix(1000, 16), rng.normal_matrix(1000, 16),
                                   Direction::kXToY)
                   .mrr;
    }
    double harmonic = 0.0;
    for (int i = 1; i <= 1000; ++i) harmonic += 1.0 / i;
    const double expected = 100.0 * harmonic / 1000.0;
    CHECK(expected == doctest::Approx(0.75).epsilon(0.01));
    CHECK(std::abs(total / 10.0 - expected) < 0.3);
  }

  TEST_CASE("evaluate") {
    Rng rng(53);
    DualNet identity = make_dual_net({{4, 4}}, {{4, 4}}, Head::kLearnedRank, 1e-3, 1);
    identity.f.mutable_params()[0] = Mat::identity(4);
    identity.g.mutable_params()[0] = Mat::identity(4);
    identity.f.mutable_params()[1] = Mat(1, 4);
    identity.g.mutable_params()[1] = Mat(1, 4);
    PairedDataset same;
    same.x = rng.normal_matrix(50, 4);
    same.y = same.x;
    for (Direction d : {Direction::kXToY, Direction::kYToX}) {
      const RetrievalReport r = evaluate(identity, same, d);
      CHECK(r.recall_at_1 == 100.0);
      CHECK(r.median_rank == 1);
      CHECK(r.mrr == 100.0);
    }
    const DualNet unfitted = make_dual_net({{4, 4}}, {{4, 4}}, Head::kCcalRank, 1e-3, 1);
    CHECK_THROWS_AS(evaluate(unfitted, same, Direction::kXToY), ContractError);
  }

  TEST_CASE("ap_at_50 fixtures") {
    // Class 0 clustered near angle 0, class 1 near angle pi/2.
    std::vector<double> angles;
    std::vector<std::uint32_t> labels;
    for (int i = 0; i < 50; ++i) {
      angles.push_back(0.001 * i);
      labels.push_back(0);
    }
    for (int i = 0; i < 50; ++i) {
      angles.push_back(std::numbers::pi / 2 + 0.001 * i);
      labels.push_back(1);
    }
    const Mat cands = on_circle(angles);
    const Mat queries = on_circle({0.0, std::numbers::pi / 2});
    const std::vector<std::uint32_t> qlabels{0, 1};
    CHECK(ap_at_50(queries, qlabels, cands, labels) == 100.0);

    // Alternating classes along one arc: every top 50 holds 25 of each.
    std::vector<double> arc;
    std::vector<std::uint32_t> alternating;
    for (int i = 0; i < 100; ++i) {
      arc.push_back(0.01 * i);
      alternating.push_back(i % 2);
    }
    const Mat q0 = on_circle({0.0, 0.0});
    CHECK(ap_at_50(q0, qlabels, on_circle(arc), alternating) == 50.0);

    const std::vector<std::uint32_t> all_zero(100, 0);
    const std::vector<std::uint32_t> zero_q{0, 0};
    CHECK(ap_at_50(q0, zero_q, on_circle(arc), all_zero) == 100.0);

    // The only class-1 candidate sits at the far end of the list.
    std::vector<std::uint32_t> lonely(100, 0);
    lonely[99] = 1;
    const std::vector<std::uint32_t> one_q{1};
    CHECK(ap_at_50(on_circle({0.0}), one_q, on_circle(arc), lonely) == 0.0);

    CHECK_THROWS_AS(ap_at_50(queries, qlabels, on_circle({0.0, 1.0}), std::vector<std::uint32_t>{0, 1}),
                    ContractError);
    CHECK_THROWS_AS(ap_at_50(on_circle({0.0}), std::vector<std::uint32_t>{7}, cands, labels),
                    ContractError);
  }

  TEST_CASE("correlation_profile") {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(700 + seed);
      const DualNet net = make_dual_net({{8, 16, 8}}, {{8, 16, 8}}, Head::kLearnedRank, 1e-3, seed);
      const Vec c = correlation_profile(net, rng.normal_matrix(10000, 8), rng.normal_matrix(10000, 8), 1e-3);
      CHECK(c.size() == 8);
      worst = std::max(worst, c.front());
    }
    CHECK(worst < 0.2);

    Rng rng(54);
    DualNet twin = make_dual_net({{6, 12, 5}}, {{6, 12, 5}}, Head::kLearnedRank, 1e-3, 5);
    twin.g = twin.f;
    const Mat a = rng.normal_matrix(200, 6);
    for (double c : correlation_profile(twin, a, a, 0.0)) CHECK(std::abs(c - 1.0) < 1e-6);
    CHECK_THROWS_AS(correlation_profile(twin, a.leading_cols(6).select_rows(std::vector<std::size_t>{0, 1, 2}),
                                        a.select_rows(std::vector<std::size_t>{0, 1, 2}), 0.0),
                    InsufficientSamplesError);
  }
}
