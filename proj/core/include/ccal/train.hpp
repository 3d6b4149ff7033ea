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

#ifndef CCAL_TRAIN_HPP_
#define CCAL_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccal/data.hpp"
#include "ccal/net.hpp"

namespace ccal {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  /// Epochs without validation improvement before the learning rate drops.
  std::size_t patience = 50;
  /// Patience used after the first drop.
  std::size_t reduced_patience = 10;
  double lr_divisor = 10.0;
  /// Number of drops before training stops on the next stall.
  std::size_t reductions = 3;
  double margin = 0.5;
  bool symmetric = false;
  double reg = 1e-3;
  double weight_decay = 1e-4;
  std::size_t k = 16;
  std::uint64_t seed = 0;

  /// Throws ContractError on out-of-range values.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;     // mean normalized batch loss
  double val_mrr = 0.0;  // percent, mean of both directions
  double lr = 0.0;       // learning rate used during this epoch
  std::size_t retries = 0;
  std::size_t skipped = 0;
  bool lr_reduced = false;  // a reduction was triggered after this epoch

  /// "epoch loss val_mrr lr events"
  std::string format() const;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mrr = 0.0;
  std::size_t reductions = 0;
  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// One optimizer step as seen by the head, after any retry.
struct BatchTrace {
  std::size_t epoch = 0;
  std::size_t index = 0;  // within the epoch
  double reg = 0.0;       // regularization actually used
  Mat tower_x, tower_y;
  Mat proj_x, proj_y;     // CCA layer outputs; empty for other heads
  Vec corr;               // layer correlations; empty for other heads
};

struct TrainResult {
  DualNet model;
  TrainLog log;
};

/// Mean MRR (percent) over both retrieval directions on `val`. CCA heads are
/// refit on `train` first.
double validation_mrr(DualNet& model, const PairedDataset& train,
                      const PairedDataset& val);

/// Minibatch Adam training with plateau learning-rate drops; returns the
/// parameters with the best validation MRR. The ccal-rank model comes back
/// with CCA statistics refit on the whole training set; the tno model comes
/// back without statistics.
TrainResult train(DualNet model, const PairedDataset& train_set,
                  const PairedDataset& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {},
                  const std::function<void(const BatchTrace&)>& on_batch = {});

}  // namespace ccal

#endif  // CCAL_TRAIN_HPP_
