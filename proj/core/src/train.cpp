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

#include "ccal/train.hpp"

#include <cstdio>
#include <limits>
#include <optional>

#include "ccal/errors.hpp"
#include "ccal/losses.hpp"
#include "ccal/retrieval.hpp"

namespace ccal {

namespace {

struct StepResult {
  double loss = 0.0;
  Mat adj_x, adj_y;  // w.r.t. tower outputs
  Mat proj_x, proj_y;
  Vec corr;
};

// Loss and tower-output adjoints of one minibatch for the given head.
StepResult head_step(DualNet& model, const Mat& hx, const Mat& hy,
                     const TrainConfig& cfg, double reg) {
  StepResult s;
  switch (model.head) {
    case Head::kTno: {
      LossWithGradient l = tno_loss(hx, hy, reg);
      s.loss = l.value;
      s.adj_x = std::move(l.grad.x);
      s.adj_y = std::move(l.grad.y);
      break;
    }
    case Head::kLearnedRank:
    case Head::kCcalRank: {
      const LossConfig lc{cfg.margin, cfg.symmetric};
      const double q = static_cast<double>(ranking_query_count(hx.rows(), lc));
      if (model.head == Head::kLearnedRank) {
        LossWithGradient l = ranking_loss_with_gradient(hx, hy, lc);
        s.loss = l.value / q;
        s.adj_x = l.grad.x * (1.0 / q);
        s.adj_y = l.grad.y * (1.0 / q);
      } else {
        CcaLayer::TrainOutput out = model.cca->forward_train(hx, hy, reg);
        LossWithGradient l = ranking_loss_with_gradient(out.x, out.y, lc);
        s.loss = l.value / q;
        BatchGradient g =
            model.cca->backward(out.tape, l.grad.x * (1.0 / q), l.grad.y * (1.0 / q));
        s.adj_x = std::move(g.x);
        s.adj_y = std::move(g.y);
        s.corr = out.tape.solution().state.corr;
        s.proj_x = std::move(out.x);
        s.proj_y = std::move(out.y);
      }
      break;
    }
  }
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("TrainConfig: " + what); };
  if (!(lr >= 0.0)) fail("lr must be >= 0");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (patience < 1 || reduced_patience < 1) fail("patience must be >= 1");
  if (!(lr_divisor > 0.0)) fail("lr_divisor must be > 0");
  if (!(margin > 0.0)) fail("margin must be > 0");
  if (!(reg >= 0.0)) fail("reg must be >= 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (k < 1) fail("k must be >= 1");
}

std::string EpochRecord::format() const {
  std::string events;
  auto add = [&](const std::string& e) { events += (events.empty() ? "" : ";") + e; };
  if (retries) add("retry=" + std::to_string(retries));
  if (skipped) add("skip=" + std::to_string(skipped));
  if (lr_reduced) add("lr_drop");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu %.6f %.4f %.3g ", epoch, loss, val_mrr, lr);
  return buf + (events.empty() ? std::string("-") : events);
}

double validation_mrr(DualNet& model, const PairedDataset& train,
                      const PairedDataset& val) {
  if (model.uses_cca()) refit_cca(model, train.x, train.y);
  const auto [ex, ey] = embed(model, val.x, val.y);
  return 0.5 * (evaluate_embeddings(ex, ey, Direction::kXToY).mrr +
                evaluate_embeddings(ex, ey, Direction::kYToX).mrr);
}

TrainResult train(DualNet model, const PairedDataset& train_set,
                  const PairedDataset& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch,
                  const std::function<void(const BatchTrace&)>& on_batch) {
  cfg.validate();
  train_set.validate();
  val_set.validate();
  if (train_set.x.cols() != model.f.spec().input_width() ||
      train_set.y.cols() != model.g.spec().input_width())
    throw ContractError("train: dataset widths do not match the towers");
  if (model.k() != cfg.k) throw ContractError("train: tower output width != k");
  const bool full_batches_only = model.head != Head::kLearnedRank;
  if (full_batches_only && cfg.batch_size < cfg.k + 1)
    throw ContractError("train: batch_size must be >= k + 1 for CCA-based heads");
  if (full_batches_only && train_set.size() < cfg.batch_size)
    throw ContractError("train: training set smaller than one batch");

  AdamState adam_f = make_adam(model.f.params(), cfg.lr);
  AdamState adam_g = make_adam(model.g.params(), cfg.lr);
  Rng shuffle_rng(cfg.seed ^ 0x5eed5eed5eedULL);

  TrainResult result;
  TrainLog& log = result.log;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Mat> best_f = model.f.params(), best_g = model.g.params();
  std::size_t patience = cfg.patience;
  std::size_t stall = 0;
  double lr = cfg.lr;

  const std::size_t m = train_set.size();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    adam_f.lr = adam_g.lr = lr;

    const auto perm = shuffle_rng.permutation(m);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < m; start += cfg.batch_size) {
      const std::size_t end = std::min(m, start + cfg.batch_size);
      if (end - start < cfg.batch_size && (full_batches_only || end - start < 2)) break;
      const std::vector<std::size_t> idx(perm.begin() + start, perm.begin() + end);
      const Mat a = train_set.x.select_rows(idx);
      const Mat b = train_set.y.select_rows(idx);

      auto [hx, tape_f] = model.f.forward_with_tape(a);
      auto [hy, tape_g] = model.g.forward_with_tape(b);

      std::optional<StepResult> step;
      double reg = cfg.reg;
      try {
        step = head_step(model, hx, hy, cfg, reg);
      } catch (const DegenerateSpectrumError&) {
        ++rec.retries;
        reg = cfg.reg * 10.0;
        try {
          step = head_step(model, hx, hy, cfg, reg);
        } catch (const DegenerateSpectrumError&) {
          ++rec.skipped;
          continue;
        }
      }

      if (on_batch)
        on_batch(BatchTrace{epoch, batches, reg, hx, hy, std::move(step->proj_x),
                            std::move(step->proj_y), std::move(step->corr)});

      TowerGradient gf = model.f.backward(tape_f, step->adj_x);
      TowerGradient gg = model.g.backward(tape_g, step->adj_y);
      adam_step(model.f.mutable_params(), gf.params, adam_f, cfg.weight_decay);
      adam_step(model.g.mutable_params(), gg.params, adam_g, cfg.weight_decay);
      loss_sum += step->loss;
      ++batches;
    }
    rec.loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    rec.val_mrr = validation_mrr(model, train_set, val_set);

    bool stop = false;
    if (rec.val_mrr > best) {
      best = rec.val_mrr;
      best_f = model.f.params();
      best_g = model.g.params();
      log.best_epoch = epoch;
      log.best_val_mrr = best;
      stall = 0;
    } else if (++stall >= patience) {
      if (log.reductions < cfg.reductions) {
        lr /= cfg.lr_divisor;
        ++log.reductions;
        patience = cfg.reduced_patience;
        stall = 0;
        rec.lr_reduced = true;
      } else {
        stop = true;
      }
    }
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (stop) break;
  }

  model.f.mutable_params() = std::move(best_f);
  model.g.mutable_params() = std::move(best_g);
  if (model.head == Head::kCcalRank) {
    refit_cca(model, train_set.x, train_set.y);
  } else if (model.head == Head::kTno) {
    model.cca->set_state(CcaState{});
  }
  result.model = std::move(model);
  return result;
}

}  // namespace ccal
