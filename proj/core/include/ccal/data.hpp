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

#ifndef CCAL_DATA_HPP_
#define CCAL_DATA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccal/matrix.hpp"

namespace ccal {

/// Row i of `x` and row i of `y` describe the same entity.
struct PairedDataset {
  Mat x, y;
  std::vector<std::uint32_t> labels;  // empty, or one per row
  std::string provenance;

  std::size_t size() const { return x.rows(); }
  bool has_labels() const { return !labels.empty(); }
  /// Throws ContractError on mismatched row counts or label length.
  void validate() const;
  PairedDataset select(const std::vector<std::size_t>& rows) const;

  friend bool operator==(const PairedDataset& a, const PairedDataset& b) {
    return a.x == b.x && a.y == b.y && a.labels == b.labels;
  }
};

enum class Mixing { kLinear, kTanh };

struct SynthSpec {
  std::size_t latent = 2;
  std::size_t dx = 8;
  std::size_t dy = 8;
  std::size_t samples = 1000;
  Mixing mixing = Mixing::kLinear;
  double noise_x = 1.0;
  double noise_y = 1.0;
  std::uint64_t seed = 0;
  /// Standard deviation of each latent component; empty means all 1.
  Vec latent_scales;

  void validate() const;
};

struct SynthResult {
  PairedDataset data;
  /// Present for linear mixing: canonical correlations of the exact
  /// covariance blocks, min(dx, dy) of them, descending.
  std::optional<Vec> population_corr;
};

/// Shared latent z ~ N(0, diag(scales^2)); x = mix(P z) + noise_x * e_x and
/// y = mix(Q z) + noise_y * e_y with P, Q seeded and orthonormal-column.
/// Tanh mixing applies a seeded random rotation and a gain of 2 to P z
/// before tanh so that no linear map recovers the latent.
SynthResult generate(const SynthSpec& spec);

/// CCAPAIRS binary format (little-endian): "CCAPAIRS", u32 version = 1,
/// u32 d_x, u32 d_y, u64 m, u8 has_labels, then per row d_x f64, d_y f64 and
/// an optional u32 label.
void save_dataset(const PairedDataset& data, const std::string& path);
PairedDataset load_dataset(const std::string& path);
std::string encode_dataset(const PairedDataset& data);
PairedDataset decode_dataset(const std::string& bytes);

/// CSV with header x0..x{dx-1},y0..y{dy-1}[,label].
PairedDataset load_csv(const std::string& path);
PairedDataset parse_csv(const std::string& text);

struct Split {
  PairedDataset train, val, test;
};

/// Seeded permutation, then contiguous train/val/test slices of sizes
/// round(f_train m), round(f_val m) and the remainder.
Split split(const PairedDataset& data, const std::array<double, 3>& fractions,
            std::uint64_t seed);

/// round(fraction m) rows drawn without replacement.
PairedDataset subsample(const PairedDataset& data, double fraction,
                        std::uint64_t seed);

}  // namespace ccal

#endif  // CCAL_DATA_HPP_
