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

// Cosine nearest-neighbour retrieval and its evaluation measures.

#ifndef CCAL_RETRIEVAL_HPP_
#define CCAL_RETRIEVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccal/data.hpp"
#include "ccal/matrix.hpp"
#include "ccal/net.hpp"

namespace ccal {

/// Unit-normalized candidate embeddings with unique ids.
class RetrievalIndex {
 public:
  const Mat& embeddings() const { return embeddings_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  /// Row of `id`, or nullopt.
  std::optional<std::size_t> position(std::uint64_t id) const;

 private:
  friend RetrievalIndex build_index(const Mat& embeddings,
                                    std::vector<std::uint64_t> ids);
  Mat embeddings_;
  std::vector<std::uint64_t> ids_;
};

/// Throws UndefinedScoreError (naming the id) for a zero row and
/// ContractError for duplicate ids or a length mismatch.
RetrievalIndex build_index(const Mat& embeddings, std::vector<std::uint64_t> ids);

/// 1-based position of `target_id` when candidates are ordered by descending
/// cosine score; equal scores keep candidate insertion order.
std::size_t rank_of(const RetrievalIndex& index, std::span<const double> query,
                    std::uint64_t target_id);

/// Rank of candidate i for query i, for every row (both matrices n x k).
std::vector<std::size_t> paired_ranks(const Mat& queries, const Mat& candidates);

enum class Direction { kXToY, kYToX };
std::string_view direction_name(Direction d);  // "x2y" / "y2x"

struct RetrievalReport {
  Direction direction = Direction::kXToY;
  double recall_at_1 = 0.0;   // percent
  double recall_at_5 = 0.0;
  double recall_at_10 = 0.0;
  std::size_t median_rank = 0;  // lower median
  double mrr = 0.0;             // percent
  std::size_t n_queries = 0;
};

RetrievalReport report_from_ranks(std::span<const std::size_t> ranks,
                                  Direction direction);

/// Retrieval between paired embeddings: x rows query y rows (x2y) or the
/// reverse.
RetrievalReport evaluate_embeddings(const Mat& ex, const Mat& ey,
                                    Direction direction);

/// Embeds the test set with the model and evaluates one direction. CCA-based
/// heads need fitted statistics (ContractError otherwise).
RetrievalReport evaluate(const DualNet& model, const PairedDataset& test,
                         Direction direction);

/// Mean over query classes of the mean fraction (percent) of same-class items
/// among each query's top 50 candidates.
double ap_at_50(const Mat& queries, std::span<const std::uint32_t> query_labels,
                const Mat& candidates,
                std::span<const std::uint32_t> candidate_labels);

/// Canonical correlations (descending, k of them) between the two towers'
/// outputs on a batch.
Vec correlation_profile(const DualNet& model, const Mat& a, const Mat& b,
                        double reg);

/// Comma-separated: model,direction,R@1,R@5,R@10,MR,MRR
std::string report_header();
std::string format_report(std::string_view model, const RetrievalReport& report);

}  // namespace ccal

#endif  // CCAL_RETRIEVAL_HPP_
