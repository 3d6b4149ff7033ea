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

#include "ccal_tools/compare.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "ccal/errors.hpp"

namespace ccal::tools {

namespace {

struct Split3 {
  PairedDataset train, val, test;
};

Split3 protocol_split(const PairedDataset& data, const CompareOptions& opts) {
  const double m = static_cast<double>(data.size());
  const double val = opts.val_size ? static_cast<double>(opts.val_size) : std::round(0.1 * m);
  const double test = opts.test_size ? static_cast<double>(opts.test_size) : std::round(0.1 * m);
  if (val + test >= m) throw ContractError("compare: validation and test sets leave no training data");
  Split parts = split(data, {(m - val - test) / m, val / m, test / m}, opts.split_seed);
  if (opts.train_fraction < 1.0)
    parts.train = subsample(parts.train, opts.train_fraction, opts.split_seed + 1);
  return {std::move(parts.train), std::move(parts.val), std::move(parts.test)};
}

ReplicaResult run_replica(const Split3& s, const CompareOptions& opts, Head head,
                          std::uint64_t seed) {
  TowerSpec spec_f{{s.train.x.cols()}}, spec_g{{s.train.y.cols()}};
  for (std::size_t w : opts.hidden) {
    spec_f.widths.push_back(w);
    spec_g.widths.push_back(w);
  }
  spec_f.widths.push_back(opts.train.k);
  spec_g.widths.push_back(opts.train.k);

  TrainConfig cfg = opts.train;
  cfg.seed = seed;
  TrainResult trained =
      train(make_dual_net(spec_f, spec_g, head, cfg.reg, seed), s.train, s.val, cfg);
  DualNet& model = trained.model;
  if (model.uses_cca()) refit_cca(model, s.train.x, s.train.y);

  ReplicaResult r;
  r.head = head;
  r.seed = seed;
  r.x2y = evaluate(model, s.test, Direction::kXToY);
  r.y2x = evaluate(model, s.test, Direction::kYToX);
  // A fixed ridge, so heads trained with different r are measured alike.
  r.profile = correlation_profile(model, s.test.x, s.test.y, kDefaultReg);
  r.log = std::move(trained.log);
  return r;
}

struct Stat {
  double mean = 0.0, sd = 0.0;
};

Stat stat(const std::vector<double>& v) {
  Stat s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string fmt(Stat s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", s.mean, s.sd);
  return buf;
}

}  // namespace

double ReplicaResult::profile_sum() const {
  return std::accumulate(profile.begin(), profile.end(), 0.0);
}

std::vector<const ReplicaResult*> CompareResult::for_head(Head head) const {
  std::vector<const ReplicaResult*> out;
  for (const ReplicaResult& r : replicas)
    if (r.head == head) out.push_back(&r);
  return out;
}

CompareResult run_compare(const PairedDataset& data, const CompareOptions& opts) {
  if (opts.heads.empty()) throw ContractError("compare: no models selected");
  if (opts.seeds == 0) throw ContractError("compare: need at least one seed");
  if (!(opts.train_fraction > 0.0) || opts.train_fraction > 1.0)
    throw ContractError("compare: train fraction must be in (0, 1]");
  opts.train.validate();
  const Split3 s = protocol_split(data, opts);

  CompareResult result;
  result.train_size = s.train.size();
  result.val_size = s.val.size();
  result.test_size = s.test.size();
  const std::size_t total = opts.seeds * opts.heads.size();
  result.replicas.resize(total);

  // Replicas are independent; slots keep the output order fixed.
  std::size_t next = 0;
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next == total || failure) return;
        i = next++;
      }
      try {
        result.replicas[i] = run_replica(s, opts, opts.heads[i % opts.heads.size()],
                                         opts.first_seed + i / opts.heads.size());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, total));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::string format_compare(const CompareResult& result, const CompareOptions& opts) {
  std::ostringstream out;
  out << "# compare seeds=" << opts.seeds << " first_seed=" << opts.first_seed
      << " train_fraction=" << opts.train_fraction << " train=" << result.train_size
      << " val=" << result.val_size << " test=" << result.test_size << "\n";
  out << report_header() << "\n";
  for (Head head : opts.heads) {
    const auto runs = result.for_head(head);
    for (Direction d : {Direction::kXToY, Direction::kYToX}) {
      std::vector<double> r1, r5, r10, mr, mrr;
      for (const ReplicaResult* r : runs) {
        const RetrievalReport& rep = d == Direction::kXToY ? r->x2y : r->y2x;
        r1.push_back(rep.recall_at_1);
        r5.push_back(rep.recall_at_5);
        r10.push_back(rep.recall_at_10);
        mr.push_back(static_cast<double>(rep.median_rank));
        mrr.push_back(rep.mrr);
      }
      out << head_name(head) << "," << direction_name(d) << "," << fmt(stat(r1)) << ","
          << fmt(stat(r5)) << "," << fmt(stat(r10)) << "," << fmt(stat(mr)) << ","
          << fmt(stat(mrr)) << "\n";
    }
  }
  out << "# correlation profile (test split, mean over seeds)\n";
  out << "model,sum";
  for (std::size_t i = 0; i < opts.train.k; ++i) out << ",c" << i + 1;
  out << "\n";
  for (Head head : opts.heads) {
    const auto runs = result.for_head(head);
    std::vector<double> sums;
    for (const ReplicaResult* r : runs) sums.push_back(r->profile_sum());
    out << head_name(head) << "," << fmt(stat(sums));
    for (std::size_t i = 0; i < opts.train.k; ++i) {
      double acc = 0.0;
      for (const ReplicaResult* r : runs) acc += r->profile[i];
      char buf[32];
      std::snprintf(buf, sizeof buf, ",%.3f", acc / static_cast<double>(runs.size()));
      out << buf;
    }
    out << "\n";
  }
  out << "# per seed: model,seed,mrr_x2y,mrr_y2x,corr_sum,best_epoch,epochs\n";
  for (const ReplicaResult& r : result.replicas) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%llu,%.2f,%.2f,%.3f,%zu,%zu\n",
                  std::string(head_name(r.head)).c_str(),
                  static_cast<unsigned long long>(r.seed), r.x2y.mrr, r.y2x.mrr,
                  r.profile_sum(), r.log.best_epoch, r.log.epochs.size());
    out << buf;
  }
  return out.str();
}

}  // namespace ccal::tools
