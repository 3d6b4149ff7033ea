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

#include "ccal/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "ccal/cca_layer.hpp"
#include "ccal/errors.hpp"
#include "ccal/losses.hpp"
#include "ccal/net.hpp"
#include "ccal/random.hpp"

namespace ccal {

namespace {

struct Evaluation {
  double value = 0.0;
  std::vector<char> hinges;  // active-hinge pattern, empty when smooth
};

struct Problem {
  std::vector<double*> coords;
  std::vector<double> analytic;
  std::function<Evaluation()> evaluate;
  std::shared_ptr<void> storage;
};

void add_coords(Problem& p, Mat& m, const Mat& grad) {
  auto d = m.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    p.coords.push_back(&d[i]);
    p.analytic.push_back(g[i]);
  }
}

std::vector<char> hinge_pattern(const Mat& x, const Mat& y, double margin) {
  const std::size_t m = x.rows();
  std::vector<char> active;
  active.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = cosine_score(x.row(i), y.row(i));
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) active.push_back(margin - pos + cosine_score(x.row(i), y.row(j)) > 0.0);
  }
  return active;
}

// Two views sharing part of their signal so that canonical correlations are
// spread out.
std::pair<Mat, Mat> correlated_views(std::size_t m, std::size_t dx, std::size_t dy,
                                     Rng& rng) {
  Mat x = rng.normal_matrix(m, dx);
  Mat mix = rng.normal_matrix(dx, dy) * 0.3;
  Mat y = matmul(x, mix) + rng.normal_matrix(m, dy);
  return {std::move(x), std::move(y)};
}

Problem cca_layer_problem(const GradCheckDims& d, Rng& rng) {
  struct Store {
    Mat x, y, wx, wy;
  };
  auto s = std::make_shared<Store>();
  std::tie(s->x, s->y) = correlated_views(d.m, d.dx, d.dy, rng);
  s->wx = rng.normal_matrix(d.m, d.k);
  s->wy = rng.normal_matrix(d.m, d.k);

  CcaLayer layer(d.k, d.reg);
  auto out = layer.forward_train(s->x, s->y);
  const BatchGradient g = layer.backward(out.tape, s->wx, s->wy);

  Problem p;
  add_coords(p, s->x, g.x);
  add_coords(p, s->y, g.y);
  p.evaluate = [s, k = d.k, reg = d.reg] {
    CcaLayer fresh(k, reg);
    auto o = fresh.forward_train(s->x, s->y);
    return Evaluation{inner(s->wx, o.x) + inner(s->wy, o.y), {}};
  };
  p.storage = s;
  return p;
}

Problem tno_problem(const GradCheckDims& d, Rng& rng) {
  struct Store {
    Mat x, y;
  };
  auto s = std::make_shared<Store>();
  std::tie(s->x, s->y) = correlated_views(d.m, d.dx, d.dy, rng);
  const BatchGradient g = tno_gradient(s->x, s->y, d.reg);
  Problem p;
  add_coords(p, s->x, g.x);
  add_coords(p, s->y, g.y);
  p.evaluate = [s, reg = d.reg] { return Evaluation{tno_value(s->x, s->y, reg), {}}; };
  p.storage = s;
  return p;
}

Problem ranking_problem(const GradCheckDims& d, Rng& rng) {
  struct Store {
    Mat x, y;
  };
  auto s = std::make_shared<Store>();
  s->x = rng.normal_matrix(d.m, d.k);
  s->y = s->x + rng.normal_matrix(d.m, d.k) * 0.7;
  const LossConfig cfg{d.margin, false};
  const BatchGradient g = ranking_loss_adjoint(s->x, s->y, cfg);
  Problem p;
  add_coords(p, s->x, g.x);
  add_coords(p, s->y, g.y);
  p.evaluate = [s, cfg] {
    return Evaluation{ranking_loss(s->x, s->y, cfg), hinge_pattern(s->x, s->y, cfg.margin)};
  };
  p.storage = s;
  return p;
}

Problem mlp_problem(const GradCheckDims& d, Rng& rng) {
  struct Store {
    Tower tower;
    Mat input, weights;
  };
  auto s = std::make_shared<Store>();
  TowerSpec spec{{d.dx, 16, 16, d.k}};
  s->tower = d.zero_weights ? Tower(spec) : Tower::glorot(spec, rng);
  if (!d.zero_weights)
    for (std::size_t l = 0; l < spec.num_layers(); ++l)
      for (double& b : s->tower.mutable_params()[2 * l + 1].data()) b = 0.1 * rng.normal();
  s->input = rng.normal_matrix(d.m, d.dx);
  s->weights = rng.normal_matrix(d.m, d.k);

  auto [out, tape] = s->tower.forward_with_tape(s->input);
  const TowerGradient g = s->tower.backward(tape, s->weights);

  Problem p;
  auto& params = s->tower.mutable_params();
  for (std::size_t i = 0; i < params.size(); ++i) add_coords(p, params[i], g.params[i]);
  add_coords(p, s->input, g.input);
  p.evaluate = [s] { return Evaluation{inner(s->weights, s->tower.forward(s->input)), {}}; };
  p.storage = s;
  return p;
}

Problem end_to_end_problem(const GradCheckDims& d, Rng& rng) {
  struct Store {
    Tower f, g;
    Mat a, b;
  };
  auto s = std::make_shared<Store>();
  std::tie(s->a, s->b) = correlated_views(d.m, d.dx, d.dy, rng);
  s->f = Tower::glorot(TowerSpec{{d.dx, 12, d.dx}}, rng);
  s->g = Tower::glorot(TowerSpec{{d.dy, 12, d.dy}}, rng);
  const LossConfig cfg{d.margin, false};

  auto [hx, tape_f] = s->f.forward_with_tape(s->a);
  auto [hy, tape_g] = s->g.forward_with_tape(s->b);
  CcaLayer layer(d.k, d.reg);
  auto out = layer.forward_train(hx, hy);
  const BatchGradient lg = ranking_loss_adjoint(out.x, out.y, cfg);
  const BatchGradient cg = layer.backward(out.tape, lg.x, lg.y);
  const TowerGradient gf = s->f.backward(tape_f, cg.x);
  const TowerGradient gg = s->g.backward(tape_g, cg.y);

  Problem p;
  auto& pf = s->f.mutable_params();
  for (std::size_t i = 0; i < pf.size(); ++i) add_coords(p, pf[i], gf.params[i]);
  auto& pg = s->g.mutable_params();
  for (std::size_t i = 0; i < pg.size(); ++i) add_coords(p, pg[i], gg.params[i]);
  p.evaluate = [s, cfg, k = d.k, reg = d.reg] {
    CcaLayer fresh(k, reg);
    auto o = fresh.forward_train(s->f.forward(s->a), s->g.forward(s->b));
    return Evaluation{ranking_loss(o.x, o.y, cfg), hinge_pattern(o.x, o.y, cfg.margin)};
  };
  p.storage = s;
  return p;
}

Problem build(GradTarget target, const GradCheckDims& d, Rng& rng) {
  switch (target) {
    case GradTarget::kCcaLayer:
      return cca_layer_problem(d, rng);
    case GradTarget::kTno:
      return tno_problem(d, rng);
    case GradTarget::kRanking:
      return ranking_problem(d, rng);
    case GradTarget::kMlp:
      return mlp_problem(d, rng);
    case GradTarget::kEndToEnd:
      return end_to_end_problem(d, rng);
  }
  throw ContractError("grad_check: unknown target");
}

}  // namespace

std::string_view target_name(GradTarget t) {
  switch (t) {
    case GradTarget::kCcaLayer:
      return "cca-layer";
    case GradTarget::kTno:
      return "tno";
    case GradTarget::kRanking:
      return "ranking";
    case GradTarget::kMlp:
      return "mlp";
    case GradTarget::kEndToEnd:
      return "end-to-end";
  }
  return "unknown";
}

std::optional<GradTarget> parse_target(std::string_view name) {
  for (GradTarget t : {GradTarget::kCcaLayer, GradTarget::kTno, GradTarget::kRanking,
                       GradTarget::kMlp, GradTarget::kEndToEnd})
    if (target_name(t) == name) return t;
  return std::nullopt;
}

GradCheckReport grad_check(GradTarget target, const GradCheckDims& dims,
                           std::uint64_t seed, double h, double tol) {
  constexpr std::size_t kMaxAttempts = 6;  // first draw plus 5 redraws
  constexpr std::size_t kMaxProbes = 2000;
  if (!(h > 0.0)) throw ContractError("grad_check: h must be > 0");

  GradCheckReport report;
  report.target = target;
  std::optional<Problem> problem;
  for (std::size_t attempt = 0; attempt < kMaxAttempts && !problem; ++attempt) {
    Rng rng(seed + 1000003ULL * attempt);
    report.attempts = attempt + 1;
    try {
      problem = build(target, dims, rng);
    } catch (const DegenerateSpectrumError& e) {
      report.message = e.what();
    }
  }
  if (!problem) {
    report.message = "degenerate spectrum on every draw: " + report.message;
    return report;
  }
  if (problem->coords.size() > kMaxProbes)
    throw ContractError("grad_check: " + std::to_string(problem->coords.size()) +
                        " scalars exceeds the probe budget of " +
                        std::to_string(kMaxProbes));

  const Evaluation base = problem->evaluate();
  std::vector<double> numeric(problem->coords.size());
  std::vector<char> skipped(problem->coords.size(), 0);
  for (std::size_t i = 0; i < problem->coords.size(); ++i) {
    double* c = problem->coords[i];
    const double saved = *c;
    *c = saved + h;
    const Evaluation plus = problem->evaluate();
    *c = saved - h;
    const Evaluation minus = problem->evaluate();
    *c = saved;
    if (plus.hinges != base.hinges || minus.hinges != base.hinges) {
      skipped[i] = 1;
      ++report.kinks_skipped;
      continue;
    }
    numeric[i] = (plus.value - minus.value) / (2.0 * h);
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    if (!skipped[i]) scale = std::max(scale, std::abs(numeric[i]));
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    if (skipped[i]) continue;
    ++report.probes;
    const double a = problem->analytic[i], n = numeric[i];
    const double den = std::max({std::abs(a), std::abs(n), 1e-3 * scale});
    const double err = den > 0.0 ? std::abs(a - n) / den : 0.0;
    report.max_rel_error = std::max(report.max_rel_error, err);
  }
  report.pass = report.probes > 0 && report.max_rel_error < tol;
  if (report.message.empty() || report.attempts == 1)
    report.message = report.pass ? "ok" : "max relative error above tolerance";
  else
    report.message = (report.pass ? "ok after redraw: " : "failed after redraw: ") +
                     report.message;
  return report;
}

}  // namespace ccal
