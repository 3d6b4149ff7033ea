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

#include "ccal/data.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "binary_io.hpp"
#include "ccal/cca_core.hpp"
#include "ccal/errors.hpp"
#include "ccal/random.hpp"

namespace ccal {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace detail

namespace {

constexpr std::string_view kDatasetMagic = "CCAPAIRS";
constexpr std::uint32_t kDatasetVersion = 1;

// Gram-Schmidt on a Gaussian draw; columns orthonormal.
Mat random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat m = rng.normal_matrix(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t r = 0; r < rows; ++r) dot += m(r, c) * m(r, p);
        for (std::size_t r = 0; r < rows; ++r) m(r, c) -= dot * m(r, p);
      }
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += m(r, c) * m(r, c);
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < rows; ++r) m(r, c) /= norm;
  }
  return m;
}

}  // namespace

void PairedDataset::validate() const {
  if (x.empty() || y.empty()) throw ContractError("PairedDataset: empty view");
  if (x.rows() != y.rows())
    throw ContractError("PairedDataset: X has " + std::to_string(x.rows()) +
                        " rows, Y has " + std::to_string(y.rows()));
  if (!labels.empty() && labels.size() != x.rows())
    throw ContractError("PairedDataset: label count != row count");
}

PairedDataset PairedDataset::select(const std::vector<std::size_t>& rows) const {
  PairedDataset out;
  out.x = x.select_rows(rows);
  out.y = y.select_rows(rows);
  if (has_labels()) {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
  }
  out.provenance = provenance;
  return out;
}

void SynthSpec::validate() const {
  if (latent < 1) throw ContractError("SynthSpec: latent dimension must be >= 1");
  if (latent > std::min(dx, dy))
    throw ContractError("SynthSpec: latent dimension " + std::to_string(latent) +
                        " exceeds min(dx, dy) = " + std::to_string(std::min(dx, dy)));
  if (samples < 1) throw ContractError("SynthSpec: samples must be >= 1");
  if (!(noise_x >= 0.0) || !(noise_y >= 0.0))
    throw ContractError("SynthSpec: noise levels must be >= 0");
  if (!latent_scales.empty() && latent_scales.size() != latent)
    throw ContractError("SynthSpec: latent_scales length != latent dimension");
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Mat p = random_orthonormal(spec.dx, spec.latent, rng);
  const Mat q = random_orthonormal(spec.dy, spec.latent, rng);
  Vec scales = spec.latent_scales;
  if (scales.empty()) scales.assign(spec.latent, 1.0);

  Mat rot_x, rot_y;
  if (spec.mixing == Mixing::kTanh) {
    rot_x = random_orthonormal(spec.dx, spec.dx, rng);
    rot_y = random_orthonormal(spec.dy, spec.dy, rng);
  }

  Mat z = rng.normal_matrix(spec.samples, spec.latent);
  z = scale_cols(z, scales);
  Mat x = matmul_nt(z, p);
  Mat y = matmul_nt(z, q);
  if (spec.mixing == Mixing::kTanh) {
    x = matmul_nt(x, rot_x);
    y = matmul_nt(y, rot_y);
    for (double& v : x.data()) v = std::tanh(2.0 * v);
    for (double& v : y.data()) v = std::tanh(2.0 * v);
  }
  for (double& v : x.data()) v += spec.noise_x * rng.normal();
  for (double& v : y.data()) v += spec.noise_y * rng.normal();

  SynthResult out;
  out.data.x = std::move(x);
  out.data.y = std::move(y);
  std::ostringstream prov;
  prov << "synthetic(latent=" << spec.latent << ", dx=" << spec.dx
       << ", dy=" << spec.dy << ", m=" << spec.samples << ", mixing="
       << (spec.mixing == Mixing::kLinear ? "linear" : "tanh")
       << ", noise_x=" << spec.noise_x << ", noise_y=" << spec.noise_y
       << ", seed=" << spec.seed << ")";
  out.data.provenance = prov.str();

  if (spec.mixing == Mixing::kLinear) {
    Vec var(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i) var[i] = scales[i] * scales[i];
    const Mat pv = scale_cols(p, var);
    Mat sxx = matmul_nt(pv, p);
    Mat syy = matmul_nt(scale_cols(q, var), q);
    const Mat sxy = matmul_nt(pv, q);
    // A noiseless view with latent < d has a singular covariance; the ridge
    // only resolves the null directions.
    const double ridge_x = spec.noise_x > 0.0 ? 0.0 : 1e-12;
    const double ridge_y = spec.noise_y > 0.0 ? 0.0 : 1e-12;
    for (std::size_t i = 0; i < spec.dx; ++i)
      sxx(i, i) += spec.noise_x * spec.noise_x + ridge_x;
    for (std::size_t i = 0; i < spec.dy; ++i)
      syy(i, i) += spec.noise_y * spec.noise_y + ridge_y;
    out.population_corr = canonical_correlations(sxx, syy, sxy);
  }
  return out;
}

std::string encode_dataset(const PairedDataset& data) {
  data.validate();
  detail::ByteWriter w;
  w.bytes(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(data.x.cols()));
  w.u32(static_cast<std::uint32_t>(data.y.cols()));
  w.u64(data.size());
  w.u8(data.has_labels() ? 1 : 0);
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.x.row(r)) w.f64(v);
    for (double v : data.y.row(r)) w.f64(v);
    if (data.has_labels()) w.u32(data.labels[r]);
  }
  return w.str();
}

PairedDataset decode_dataset(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < kDatasetMagic.size() || r.bytes(kDatasetMagic.size()) != kDatasetMagic)
    throw FormatError("bad magic (expected CCAPAIRS)", 0);
  const std::size_t version_at = r.offset();
  if (r.u32() != kDatasetVersion)
    throw FormatError("unsupported CCAPAIRS version", version_at);
  const std::uint32_t dx = r.u32();
  const std::uint32_t dy = r.u32();
  const std::size_t m_at = r.offset();
  const std::uint64_t m = r.u64();
  const std::size_t labels_at = r.offset();
  const std::uint8_t has_labels = r.u8();
  if (dx == 0 || dy == 0 || m == 0) throw FormatError("zero dimension in header", m_at);
  if (has_labels > 1) throw FormatError("has_labels must be 0 or 1", labels_at);

  const std::uint64_t record = 8ull * (dx + dy) + (has_labels ? 4u : 0u);
  if (r.remaining() / record < m || r.remaining() != m * record)
    throw FormatError(r.remaining() < m * record ? "truncated file" : "trailing bytes",
                      r.remaining() < m * record ? bytes.size() : r.offset() + m * record);

  PairedDataset out;
  std::vector<double> xd(m * dx), yd(m * dy);
  for (std::uint64_t i = 0; i < m; ++i) {
    for (std::uint32_t c = 0; c < dx; ++c) {
      const std::size_t at = r.offset();
      const double v = r.f64();
      if (!std::isfinite(v)) throw FormatError("non-finite value", at);
      xd[i * dx + c] = v;
    }
    for (std::uint32_t c = 0; c < dy; ++c) {
      const std::size_t at = r.offset();
      const double v = r.f64();
      if (!std::isfinite(v)) throw FormatError("non-finite value", at);
      yd[i * dy + c] = v;
    }
    if (has_labels) out.labels.push_back(r.u32());
  }
  out.x = Mat(m, dx, std::move(xd));
  out.y = Mat(m, dy, std::move(yd));
  return out;
}

void save_dataset(const PairedDataset& data, const std::string& path) {
  detail::write_file(path, encode_dataset(data));
}

PairedDataset load_dataset(const std::string& path) {
  PairedDataset out = decode_dataset(detail::read_file(path));
  out.provenance = path;
  return out;
}

PairedDataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw FormatError("empty CSV", 0);
  auto split_line = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };

  const auto header = split_line(line);
  std::size_t dx = 0, dy = 0;
  while (dx < header.size() && header[dx] == "x" + std::to_string(dx)) ++dx;
  while (dx + dy < header.size() && header[dx + dy] == "y" + std::to_string(dy)) ++dy;
  bool has_label = false;
  if (dx + dy < header.size()) {
    if (dx + dy + 1 == header.size() && header.back() == "label")
      has_label = true;
    else
      throw FormatError("unexpected CSV header column '" + header[dx + dy] + "'", 0);
  }
  if (dx == 0 || dy == 0) throw FormatError("CSV header needs x0.. and y0.. columns", 0);
  offset += line.size() + 1;

  std::vector<double> xd, yd;
  std::vector<std::uint32_t> labels;
  std::size_t m = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      offset += line.size() + 1;
      continue;
    }
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw FormatError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()),
                        offset);
    for (std::size_t c = 0; c < dx + dy; ++c) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("junk");
      } catch (const std::exception&) {
        throw FormatError("CSV cell '" + cells[c] + "' is not a number", offset);
      }
      if (!std::isfinite(v)) throw FormatError("non-finite CSV value", offset);
      (c < dx ? xd : yd).push_back(v);
    }
    if (has_label) {
      try {
        labels.push_back(static_cast<std::uint32_t>(std::stoul(cells.back())));
      } catch (const std::exception&) {
        throw FormatError("CSV label '" + cells.back() + "' is not an integer", offset);
      }
    }
    ++m;
    offset += line.size() + 1;
  }
  if (m == 0) throw FormatError("CSV has no data rows", offset);
  PairedDataset out;
  out.x = Mat(m, dx, std::move(xd));
  out.y = Mat(m, dy, std::move(yd));
  out.labels = std::move(labels);
  return out;
}

PairedDataset load_csv(const std::string& path) {
  PairedDataset out = parse_csv(detail::read_file(path));
  out.provenance = path;
  return out;
}

Split split(const PairedDataset& data, const std::array<double, 3>& fractions,
            std::uint64_t seed) {
  data.validate();
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ContractError("split: fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("split: fractions must sum to 1");

  const std::size_t m = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * m));
  const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * m));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= m)
    throw ContractError("split: a part would be empty (m = " + std::to_string(m) + ")");

  Rng rng(seed);
  const auto perm = rng.permutation(m);
  auto slice = [&](std::size_t from, std::size_t to) {
    return data.select(std::vector<std::size_t>(perm.begin() + from, perm.begin() + to));
  };
  return {slice(0, n_train), slice(n_train, n_train + n_val), slice(n_train + n_val, m)};
}

PairedDataset subsample(const PairedDataset& data, double fraction, std::uint64_t seed) {
  data.validate();
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ContractError("subsample: fraction must be in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(fraction * data.size()));
  if (n == 0) throw ContractError("subsample: result would be empty");
  Rng rng(seed);
  auto perm = rng.permutation(data.size());
  perm.resize(n);
  return data.select(perm);
}

}  // namespace ccal
