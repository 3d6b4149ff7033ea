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

#include <benchmark/benchmark.h>

#include "ccal/cca_core.hpp"
#include "ccal/cca_layer.hpp"
#include "ccal/losses.hpp"
#include "ccal/matrix.hpp"
#include "ccal/random.hpp"

namespace {

using ccal::Mat;

Mat spd(std::size_t n, std::uint64_t seed) {
  ccal::Rng rng(seed);
  const Mat a = rng.normal_matrix(2 * n, n);
  return ccal::matmul_tn(a, a) + Mat::identity(n);
}

// Correlated pair of views, m x d each.
std::pair<Mat, Mat> views(std::size_t m, std::size_t d, std::uint64_t seed) {
  ccal::Rng rng(seed);
  const Mat z = rng.normal_matrix(m, d);
  return {z + rng.normal_matrix(m, d), z + rng.normal_matrix(m, d)};
}

void BM_EigSym(benchmark::State& state) {
  const Mat s = spd(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(ccal::eig_sym(s));
}
BENCHMARK(BM_EigSym)->RangeMultiplier(2)->Range(8, 64);

void BM_Cholesky(benchmark::State& state) {
  const Mat s = spd(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ccal::cholesky_lower(s));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(8, 64);

void BM_LayerForward(benchmark::State& state) {
  const auto [x, y] = views(static_cast<std::size_t>(state.range(0)), 16, 3);
  ccal::CcaLayer layer(16, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward_train(x, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LayerForward)->Arg(128)->Arg(512)->Arg(2048);

void BM_LayerBackward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto [x, y] = views(m, 16, 4);
  ccal::CcaLayer layer(16, 1e-3);
  const auto out = layer.forward_train(x, y);
  const auto loss = ccal::ranking_loss_with_gradient(out.x, out.y, {});
  for (auto _ : state)
    benchmark::DoNotOptimize(layer.backward(out.tape, loss.grad.x, loss.grad.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LayerBackward)->Arg(128)->Arg(512)->Arg(2048);

// Quadratic in the batch size: every row is scored against every other.
void BM_RankingLoss(benchmark::State& state) {
  const auto [x, y] = views(static_cast<std::size_t>(state.range(0)), 16, 5);
  const ccal::LossConfig cfg{0.5, state.range(1) != 0};
  for (auto _ : state) benchmark::DoNotOptimize(ccal::ranking_loss_with_gradient(x, y, cfg));
}
BENCHMARK(BM_RankingLoss)->ArgsProduct({{64, 256, 1024}, {0, 1}});

void BM_TnoLoss(benchmark::State& state) {
  const auto [x, y] = views(static_cast<std::size_t>(state.range(0)), 16, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ccal::tno_loss(x, y, 1e-3));
}
BENCHMARK(BM_TnoLoss)->Arg(256)->Arg(1024);

}  // namespace
BENCHMARK_MAIN();
