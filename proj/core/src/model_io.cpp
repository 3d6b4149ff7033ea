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

#include "ccal/model_io.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "ccal/errors.hpp"

namespace ccal {

namespace {

constexpr std::string_view kModelMagic = "CCALNET1";
constexpr std::uint32_t kModelVersion = 1;

void put_vec(detail::ByteWriter& w, const Vec& v) {
  for (double x : v) w.f64(x);
}

void put_mat(detail::ByteWriter& w, const Mat& m) {
  for (double x : m.data()) w.f64(x);
}

void put_tower(detail::ByteWriter& w, const Tower& t) {
  const auto& widths = t.spec().widths;
  w.u32(static_cast<std::uint32_t>(widths.size()));
  for (std::size_t v : widths) w.u32(static_cast<std::uint32_t>(v));
  for (const Mat& p : t.params()) put_mat(w, p);
}

double get_finite(detail::ByteReader& r) {
  const std::size_t at = r.offset();
  const double v = r.f64();
  if (!std::isfinite(v)) throw FormatError("non-finite value", at);
  return v;
}

Vec get_vec(detail::ByteReader& r, std::size_t n) {
  Vec v(n);
  for (double& x : v) x = get_finite(r);
  return v;
}

Mat get_mat(detail::ByteReader& r, std::size_t rows, std::size_t cols) {
  return Mat(rows, cols, get_vec(r, rows * cols));
}

std::uint32_t get_dim(detail::ByteReader& r, const char* what) {
  const std::size_t at = r.offset();
  const std::uint32_t v = r.u32();
  if (v == 0 || v > (1u << 24)) throw FormatError(std::string("bad ") + what, at);
  return v;
}

Tower get_tower(detail::ByteReader& r) {
  const std::size_t at = r.offset();
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw FormatError("bad tower depth", at);
  TowerSpec spec;
  for (std::uint32_t i = 0; i < n; ++i) spec.widths.push_back(get_dim(r, "tower width"));
  Tower t(spec);
  auto& params = t.mutable_params();
  for (Mat& p : params) p = get_mat(r, p.rows(), p.cols());
  return t;
}

}  // namespace

std::string encode_model(const DualNet& net, const TrainConfig& c) {
  detail::ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(net.head));
  w.u64(net.seed);
  put_tower(w, net.f);
  put_tower(w, net.g);

  if (net.uses_cca()) {
    if (!net.cca) throw ContractError("encode_model: CCA head without layer");
    w.f64(net.cca->reg());
    const CcaState& s = net.cca->state();
    w.u8(s.fitted() ? 1 : 0);
    if (s.fitted()) {
      w.u32(static_cast<std::uint32_t>(s.mean_x.size()));
      w.u32(static_cast<std::uint32_t>(s.mean_y.size()));
      w.u32(static_cast<std::uint32_t>(s.k));
      w.f64(s.reg);
      put_vec(w, s.mean_x);
      put_vec(w, s.mean_y);
      put_mat(w, s.proj_x);
      put_mat(w, s.proj_y);
      put_vec(w, s.corr);
    }
  }

  w.f64(c.lr);
  w.u64(c.batch_size);
  w.u64(c.max_epochs);
  w.u64(c.patience);
  w.u64(c.reduced_patience);
  w.f64(c.lr_divisor);
  w.u64(c.reductions);
  w.f64(c.margin);
  w.u8(c.symmetric ? 1 : 0);
  w.f64(c.reg);
  w.f64(c.weight_decay);
  w.u64(c.k);
  w.u64(c.seed);
  return w.str();
}

ModelFile decode_model(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < kModelMagic.size() || r.bytes(kModelMagic.size()) != kModelMagic)
    throw FormatError("bad magic (expected CCALNET1)", 0);
  std::size_t at = r.offset();
  if (r.u32() != kModelVersion) throw FormatError("unsupported CCALNET1 version", at);

  ModelFile mf;
  DualNet& net = mf.net;
  at = r.offset();
  const std::uint8_t head = r.u8();
  if (head > 2) throw FormatError("unknown head", at);
  net.head = static_cast<Head>(head);
  net.seed = r.u64();
  net.f = get_tower(r);
  net.g = get_tower(r);
  if (net.f.spec().output_width() != net.g.spec().output_width())
    throw FormatError("tower output widths differ", r.offset());

  if (net.uses_cca()) {
    at = r.offset();
    const double layer_reg = r.f64();
    if (!(layer_reg >= 0.0) || !std::isfinite(layer_reg))
      throw FormatError("bad layer regularization", at);
    net.cca.emplace(net.k(), layer_reg);
    at = r.offset();
    const std::uint8_t has_state = r.u8();
    if (has_state > 1) throw FormatError("has_state must be 0 or 1", at);
    if (has_state) {
      CcaState s;
      const std::uint32_t dx = get_dim(r, "state d_x");
      const std::uint32_t dy = get_dim(r, "state d_y");
      at = r.offset();
      s.k = get_dim(r, "state k");
      if (dx != net.k() || dy != net.k() || s.k != net.k())
        throw FormatError("CCA state dimensions do not match towers", at);
      s.reg = get_finite(r);
      s.mean_x = get_vec(r, dx);
      s.mean_y = get_vec(r, dy);
      s.proj_x = get_mat(r, dx, s.k);
      s.proj_y = get_mat(r, dy, s.k);
      s.corr = get_vec(r, s.k);
      net.cca->set_state(std::move(s));
    }
  }

  TrainConfig& c = mf.config;
  c.lr = r.f64();
  c.batch_size = r.u64();
  c.max_epochs = r.u64();
  c.patience = r.u64();
  c.reduced_patience = r.u64();
  c.lr_divisor = r.f64();
  c.reductions = r.u64();
  c.margin = r.f64();
  c.symmetric = r.u8() != 0;
  c.reg = r.f64();
  c.weight_decay = r.f64();
  c.k = r.u64();
  c.seed = r.u64();
  if (!r.at_end()) throw FormatError("trailing bytes", r.offset());
  return mf;
}

void save_model(const DualNet& net, const TrainConfig& config, const std::string& path) {
  detail::write_file(path, encode_model(net, config));
}

ModelFile load_model(const std::string& path) {
  return decode_model(detail::read_file(path));
}

}  // namespace ccal
