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

#include "ccal/gradcheck.hpp"
#include "doctest.h"

using namespace ccal;

TEST_SUITE("gradcheck") {
  TEST_CASE("target names") {
    for (GradTarget t : {GradTarget::kCcaLayer, GradTarget::kTno, GradTarget::kRanking,
                         GradTarget::kMlp, GradTarget::kEndToEnd})
      CHECK(parse_target(target_name(t)) == t);
    CHECK(target_name(GradTarget::kEndToEnd) == "end-to-end");
    CHECK(!parse_target("everything"));
  }

  TEST_CASE("every target passes at the default dimensions") {
    for (GradTarget t : {GradTarget::kCcaLayer, GradTarget::kTno, GradTarget::kRanking,
                         GradTarget::kMlp, GradTarget::kEndToEnd}) {
      const GradCheckReport r = grad_check(t, GradCheckDims{}, 0, 1e-5, 1e-4);
      INFO(target_name(t), ": ", r.max_rel_error, " ", r.message);
      CHECK(r.pass);
      CHECK(r.probes > 0);
      CHECK(r.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("zero-weight mlp has identically zero error") {
    GradCheckDims dims;
    dims.zero_weights = true;
    const GradCheckReport r = grad_check(GradTarget::kMlp, dims, 3, 1e-5, 1e-4);
    CHECK(r.pass);
    // Everything but the output bias has zero gradient; the network is affine
    // in that bias, so the difference quotient is exact up to round-off.
    CHECK(r.max_rel_error < 1e-12);
  }

  TEST_CASE("coarse step fails the tolerance") {
    const GradCheckReport r = grad_check(GradTarget::kCcaLayer, GradCheckDims{}, 0, 1e-1, 1e-4);
    CHECK(!r.pass);
  }

  TEST_CASE("barely enough samples") {
    GradCheckDims dims;
    dims.m = 8;
    dims.k = 4;
    const GradCheckReport r = grad_check(GradTarget::kCcaLayer, dims, 0, 1e-5, 1e-4);
    MESSAGE("m=8 k=4: pass=" << r.pass << " attempts=" << r.attempts << " err=" << r.max_rel_error);
    CHECK(r.attempts >= 1);
    CHECK(r.attempts <= 5);
    CHECK((r.pass || !r.message.empty()));
  }

  TEST_CASE("probe budget") {
    GradCheckDims dims;
    dims.m = 400;
    CHECK_THROWS(grad_check(GradTarget::kCcaLayer, dims, 0, 1e-5, 1e-4));
  }
}
