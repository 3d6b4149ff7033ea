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

#include "ccal/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_set>

#include "ccal/cca_core.hpp"
#include "ccal/errors.hpp"

namespace ccal {

namespace {

double row_norm(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

Mat normalized_rows(const Mat& a, const char* what) {
  Mat out = a;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double n = row_norm(a.row(r));
    if (!(n > 0.0))
      throw UndefinedScoreError(std::string(what) + ": zero-norm row " + std::to_string(r));
    for (double& v : out.row(r)) v /= n;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// 1 + #{better} + #{equal and earlier}
std::size_t rank_in_row(std::span<const double> scores, std::size_t target) {
  const double ts = scores[target];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores[j] > ts || (scores[j] == ts && j < target)) ++rank;
  return rank;
}

}  // namespace

std::optional<std::size_t> RetrievalIndex::position(std::uint64_t id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

RetrievalIndex build_index(const Mat& embeddings, std::vector<std::uint64_t> ids) {
  if (embeddings.rows() != ids.size())
    throw ContractError("build_index: one id per embedding row required");
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t id : ids)
    if (!seen.insert(id).second)
      throw ContractError("build_index: duplicate id " + std::to_string(id));
  RetrievalIndex index;
  index.embeddings_ = embeddings;
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    const double n = row_norm(embeddings.row(r));
    if (!(n > 0.0))
      throw UndefinedScoreError("build_index: zero-norm embedding for id " +
                                std::to_string(ids[r]));
    for (double& v : index.embeddings_.row(r)) v /= n;
  }
  index.ids_ = std::move(ids);
  return index;
}

std::size_t rank_of(const RetrievalIndex& index, std::span<const double> query,
                    std::uint64_t target_id) {
  const auto target = index.position(target_id);
  if (!target) throw ContractError("rank_of: id " + std::to_string(target_id) + " not in index");
  if (query.size() != index.embeddings().cols())
    throw ContractError("rank_of: query width mismatch");
  const double qn = row_norm(query);
  if (!(qn > 0.0)) throw UndefinedScoreError("rank_of: zero-norm query");
  Vec q(query.begin(), query.end());
  for (double& v : q) v /= qn;
  Vec scores(index.size());
  for (std::size_t j = 0; j < index.size(); ++j) scores[j] = dot(q, index.embeddings().row(j));
  return rank_in_row(scores, *target);
}

std::vector<std::size_t> paired_ranks(const Mat& queries, const Mat& candidates) {
  if (queries.rows() != candidates.rows() || queries.cols() != candidates.cols())
    throw ContractError("paired_ranks: queries and candidates must be paired");
  const Mat scores = matmul_nt(normalized_rows(queries, "queries"),
                               normalized_rows(candidates, "candidates"));
  std::vector<std::size_t> ranks(queries.rows());
  for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = rank_in_row(scores.row(i), i);
  return ranks;
}

std::string_view direction_name(Direction d) {
  return d == Direction::kXToY ? "x2y" : "y2x";
}

RetrievalReport report_from_ranks(std::span<const std::size_t> ranks, Direction direction) {
  if (ranks.empty()) throw ContractError("report_from_ranks: no queries");
  RetrievalReport r;
  r.direction = direction;
  r.n_queries = ranks.size();
  std::size_t hit1 = 0, hit5 = 0, hit10 = 0;
  double rr = 0.0;
  for (std::size_t rank : ranks) {
    if (rank < 1) throw ContractError("report_from_ranks: ranks are 1-based");
    hit1 += rank <= 1;
    hit5 += rank <= 5;
    hit10 += rank <= 10;
    rr += 1.0 / static_cast<double>(rank);
  }
  const double n = static_cast<double>(ranks.size());
  r.recall_at_1 = 100.0 * static_cast<double>(hit1) / n;
  r.recall_at_5 = 100.0 * static_cast<double>(hit5) / n;
  r.recall_at_10 = 100.0 * static_cast<double>(hit10) / n;
  r.mrr = 100.0 * rr / n;
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  r.median_rank = sorted[(sorted.size() - 1) / 2];
  return r;
}

RetrievalReport evaluate_embeddings(const Mat& ex, const Mat& ey, Direction direction) {
  const auto ranks = direction == Direction::kXToY ? paired_ranks(ex, ey) : paired_ranks(ey, ex);
  return report_from_ranks(ranks, direction);
}

RetrievalReport evaluate(const DualNet& model, const PairedDataset& test, Direction direction) {
  const auto [ex, ey] = embed(model, test.x, test.y);
  return evaluate_embeddings(ex, ey, direction);
}

double ap_at_50(const Mat& queries, std::span<const std::uint32_t> query_labels,
                const Mat& candidates, std::span<const std::uint32_t> candidate_labels) {
  constexpr std::size_t kTop = 50;
  if (candidates.rows() < kTop)
    throw ContractError("ap_at_50: need at least 50 candidates, got " +
                        std::to_string(candidates.rows()));
  if (query_labels.size() != queries.rows() || candidate_labels.size() != candidates.rows())
    throw ContractError("ap_at_50: one label per row required");
  if (queries.cols() != candidates.cols()) throw ContractError("ap_at_50: width mismatch");
  const std::unordered_set<std::uint32_t> candidate_classes(candidate_labels.begin(),
                                                            candidate_labels.end());
  for (std::uint32_t c : query_labels)
    if (!candidate_classes.count(c))
      throw ContractError("ap_at_50: query class " + std::to_string(c) +
                          " has no candidates");

  const Mat scores = matmul_nt(normalized_rows(queries, "queries"),
                               normalized_rows(candidates, "candidates"));
  std::map<std::uint32_t, std::pair<double, std::size_t>> per_class;
  std::vector<std::size_t> order(candidates.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    std::iota(order.begin(), order.end(), 0);
    const auto row = scores.row(q);
    std::partial_sort(order.begin(), order.begin() + kTop, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] > row[b] || (row[a] == row[b] && a < b);
                      });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < kTop; ++i) hits += candidate_labels[order[i]] == query_labels[q];
    auto& acc = per_class[query_labels[q]];
    acc.first += static_cast<double>(hits) / kTop;
    acc.second += 1;
  }
  double total = 0.0;
  for (const auto& [label, acc] : per_class) total += acc.first / static_cast<double>(acc.second);
  return 100.0 * total / static_cast<double>(per_class.size());
}

Vec correlation_profile(const DualNet& model, const Mat& a, const Mat& b, double reg) {
  const auto [x, y] = tower_outputs(model, a, b);
  if (x.rows() < model.k() + 1)
    throw InsufficientSamplesError("correlation_profile: need at least k + 1 samples");
  return cca_fit(x, y, reg, model.k()).corr;
}

std::string report_header() { return "model,direction,R@1,R@5,R@10,MR,MRR"; }

std::string format_report(std::string_view model, const RetrievalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ",%s,%.2f,%.2f,%.2f,%zu,%.2f",
                std::string(direction_name(r.direction)).c_str(), r.recall_at_1,
                r.recall_at_5, r.recall_at_10, r.median_rank, r.mrr);
  return std::string(model) + buf;
}

}  // namespace ccal
