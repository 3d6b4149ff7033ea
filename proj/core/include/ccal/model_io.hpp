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

// CCALNET1 model files. Layout is documented in docs/FORMATS.md.

#ifndef CCAL_MODEL_IO_HPP_
#define CCAL_MODEL_IO_HPP_

#include <string>

#include "ccal/net.hpp"
#include "ccal/train.hpp"

namespace ccal {

struct ModelFile {
  DualNet net;
  TrainConfig config;
};

std::string encode_model(const DualNet& net, const TrainConfig& config);
ModelFile decode_model(const std::string& bytes);

void save_model(const DualNet& net, const TrainConfig& config, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace ccal

#endif  // CCAL_MODEL_IO_HPP_
