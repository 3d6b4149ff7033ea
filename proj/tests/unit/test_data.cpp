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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ccal/cca_core.hpp"
#include "ccal/data.hpp"
#include "ccal/errors.hpp"
#include "doctest.h"

using namespace ccal;

namespace {

// Dataset whose labels record the original row index.
PairedDataset indexed(std::size_t m) {
  SynthSpec spec;
  spec.samples = m;
  spec.dx = 3;
  spec.dy = 2;
  spec.latent = 1;
  spec.seed = 1;
  PairedDataset d = generate(spec).data;
  d.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i) d.labels[i] = static_cast<std::uint32_t>(i);
  return d;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ccal_test_" + name);
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("spec validation") {
    SynthSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.latent = 9;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = {};
    spec.noise_x = -1.0;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = {};
    spec.samples = 0;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = {};
    spec.latent_scales = {1.0};
    CHECK_THROWS_AS(spec.validate(), ContractError);
  }

  TEST_CASE("generator population correlations") {
    SynthSpec clean;
    clean.latent = clean.dx = clean.dy = 3;
    clean.noise_x = clean.noise_y = 0.0;
    const SynthResult c = generate(clean);
    REQUIRE(c.population_corr);
    for (double v : *c.population_corr) CHECK(std::abs(v - 1.0) < 1e-9);

    SynthSpec noisy;
    noisy.latent = 2;
    const SynthResult n = generate(noisy);
    REQUIRE(n.population_corr);
    CHECK(n.population_corr->size() == 8);
    CHECK((*n.population_corr)[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK((*n.population_corr)[1] == doctest::Approx(0.5).epsilon(1e-9));
    // A zero correlation surfaces as the square root of a round-off eigenvalue.
    CHECK(std::abs((*n.population_corr)[2]) < 1e-7);

    SynthSpec tanh_spec;
    tanh_spec.mixing = Mixing::kTanh;
    CHECK(!generate(tanh_spec).population_corr);
  }

  TEST_CASE("generator determinism") {
    SynthSpec spec;
    spec.mixing = Mixing::kTanh;
    spec.seed = 77;
    const PairedDataset a = generate(spec).data, b = generate(spec).data;
    CHECK(a == b);
    CHECK(encode_dataset(a) == encode_dataset(b));
    spec.seed = 78;
    CHECK(!(generate(spec).data == a));
    CHECK(a.provenance.find("tanh") != std::string::npos);
  }

  TEST_CASE("cca_fit recovers generator correlations at m = 100 d") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SynthSpec spec;
      spec.latent = 2;
      spec.dx = spec.dy = 8;
      spec.samples = 800;
      spec.latent_scales = {2.0, 1.0};
      spec.noise_x = spec.noise_y = 0.5;
      spec.seed = seed;
      const SynthResult g = generate(spec);
      const CcaState s = cca_fit(g.data.x, g.data.y, 1e-6, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        MESSAGE("seed " << seed << " corr " << i << ": " << s.corr[i] << " vs "
                        << (*g.population_corr)[i]);
        CHECK(std::abs(s.corr[i] - (*g.population_corr)[i]) < 0.03);
      }
    }
  }

  TEST_CASE("binary round trip") {
    const PairedDataset d = indexed(37);
    const std::string bytes = encode_dataset(d);
    CHECK(bytes.substr(0, 8) == "CCAPAIRS");
    CHECK(bytes.size() == 8 + 4 + 4 + 4 + 8 + 1 + 37 * (5 * 8 + 4));
    CHECK(decode_dataset(bytes) == d);
    CHECK(encode_dataset(decode_dataset(bytes)) == bytes);

    PairedDataset unlabeled = d;
    unlabeled.labels.clear();
    CHECK(decode_dataset(encode_dataset(unlabeled)) == unlabeled);

    const auto path = temp_path("roundtrip.ccapairs");
    save_dataset(d, path.string());
    const PairedDataset loaded = load_dataset(path.string());
    CHECK(loaded == d);
    CHECK(loaded.provenance == path.string());
    std::filesystem::remove(path);
  }

  TEST_CASE("binary format errors") {
    const std::string bytes = encode_dataset(indexed(5));
    try {
      decode_dataset(bytes.substr(0, bytes.size() - 3));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == bytes.size() - 3);
    }
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad_magic), FormatError);
    std::string bad_version = bytes;
    bad_version[8] = 2;
    CHECK_THROWS_AS(decode_dataset(bad_version), FormatError);
    CHECK_THROWS_AS(decode_dataset(bytes + "x"), FormatError);
    CHECK_THROWS_AS(decode_dataset(""), FormatError);
    CHECK_THROWS_AS(load_dataset("/nonexistent/dir/file"), Error);
  }

  TEST_CASE("csv import") {
    const PairedDataset d = parse_csv("x0,y0\n1.5,-2\n3,4e1\n");
    CHECK(d.x == Mat{{1.5}, {3}});
    CHECK(d.y == Mat{{-2}, {40}});
    CHECK(!d.has_labels());

    const PairedDataset l = parse_csv("x0,x1,y0,label\r\n1,2,3,7\r\n4,5,6,9\r\n");
    CHECK(l.x == Mat{{1, 2}, {4, 5}});
    CHECK(l.y == Mat{{3}, {6}});
    CHECK(l.labels == std::vector<std::uint32_t>{7, 9});

    CHECK_THROWS_AS(parse_csv("x0,z0\n1,2\n"), FormatError);
    CHECK_THROWS_AS(parse_csv("x0,y0\n1\n"), FormatError);
    CHECK_THROWS_AS(parse_csv("x0,y0\n1,abc\n"), FormatError);
    CHECK_THROWS_AS(parse_csv("x0,y0\n"), FormatError);

    const auto path = temp_path("toy.csv");
    std::ofstream(path) << "x0,y0\n0,1\n2,3\n";
    CHECK(load_csv(path.string()).x == Mat{{0}, {2}});
    std::filesystem::remove(path);
  }

  TEST_CASE("split") {
    const PairedDataset d = indexed(100);
    const Split s = split(d, {0.8, 0.1, 0.1}, 3);
    CHECK(s.train.size() == 80);
    CHECK(s.val.size() == 10);
    CHECK(s.test.size() == 10);
    const Split again = split(d, {0.8, 0.1, 0.1}, 3);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);

    std::vector<std::uint32_t> all;
    for (const PairedDataset* part : {&s.train, &s.val, &s.test})
      for (std::size_t r = 0; r < part->size(); ++r) {
        const std::uint32_t id = part->labels[r];
        all.push_back(id);
        CHECK(part->x.row(r)[0] == d.x.row(id)[0]);
        CHECK(part->y.row(r)[1] == d.y.row(id)[1]);
      }
    std::sort(all.begin(), all.end());
    for (std::uint32_t i = 0; i < 100; ++i) CHECK(all[i] == i);

    CHECK_THROWS_AS(split(d, {0.8, 0.1, 0.2}, 0), ContractError);
    CHECK_THROWS_AS(split(d, {1.0, 0.0, 0.0}, 0), ContractError);
    CHECK_THROWS_AS(split(indexed(5), {0.8, 0.1, 0.1}, 0), ContractError);
  }

  TEST_CASE("subsample") {
    const PairedDataset d = indexed(50);
    const PairedDataset full = subsample(d, 1.0, 4);
    CHECK(full.size() == 50);
    std::vector<std::uint32_t> ids = full.labels;
    std::sort(ids.begin(), ids.end());
    for (std::uint32_t i = 0; i < 50; ++i) CHECK(ids[i] == i);

    const PairedDataset tenth = subsample(d, 0.1, 4);
    CHECK(tenth.size() == 5);
    CHECK(subsample(d, 0.1, 4) == tenth);
    std::vector<std::uint32_t> picked = tenth.labels;
    std::sort(picked.begin(), picked.end());
    CHECK(std::adjacent_find(picked.begin(), picked.end()) == picked.end());

    CHECK(subsample(indexed(27000), 0.1, 1).size() == 2700);
    CHECK_THROWS_AS(subsample(d, 0.001, 4), ContractError);
    CHECK_THROWS_AS(subsample(d, 1.5, 4), ContractError);
  }

  TEST_CASE("dataset validation") {
    PairedDataset d = indexed(4);
    d.labels.pop_back();
    CHECK_THROWS_AS(d.validate(), ContractError);
    CHECK_THROWS_AS(encode_dataset(d), ContractError);
  }
}
