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

#ifndef CCAL_TOOLS_COMPARE_HPP_
#define CCAL_TOOLS_COMPARE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ccal/data.hpp"
#include "ccal/net.hpp"
#include "ccal/retrieval.hpp"
#include "ccal/train.hpp"

namespace ccal::tools {

struct CompareOptions {
  std::vector<Head> heads{Head::kTno, Head::kLearnedRank, Head::kCcalRank};
  std::size_t seeds = 3;
  std::uint64_t first_seed = 0;
  /// Fraction of the training split kept (fixed subset, drawn with split_seed).
  double train_fraction = 1.0;
  std::size_t val_size = 0;   // 0: 10% of the data
  std::size_t test_size = 0;  // 0: 10% of the data
  std::uint64_t split_seed = 0;
  std::vector<std::size_t> hidden{64};
  TrainConfig train;  // seed is overridden per replica
  std::size_t jobs = 1;
};

struct ReplicaResult {
  Head head = Head::kLearnedRank;
  std::uint64_t seed = 0;
  RetrievalReport x2y, y2x;
  Vec profile;  // canonical correlations of tower outputs on the test split
  TrainLog log;

  double mean_mrr() const { return 0.5 * (x2y.mrr + y2x.mrr); }
  double profile_sum() const;
};

struct CompareResult {
  std::size_t train_size = 0, val_size = 0, test_size = 0;
  /// Seed-major, heads in option order; independent of `jobs`.
  std::vector<ReplicaResult> replicas;

  std::vector<const ReplicaResult*> for_head(Head head) const;
};

/// Splits `data`, trains every head for every seed and evaluates on the test
/// split. CCA heads are refit on the (sub-sampled) training split first.
CompareResult run_compare(const PairedDataset& data, const CompareOptions& opts);

/// Mean±sd tables over seeds plus the correlation profile block.
std::string format_compare(const CompareResult& result, const CompareOptions& opts);

}  // namespace ccal::tools

#endif  // CCAL_TOOLS_COMPARE_HPP_
