// Copyright 2026 rsjam contributors
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

#pragma once

#include "rsjam/types.hpp"

#include <initializer_list>
#include <random>
#include <string_view>

namespace rsjam {

// Seeded stream with deterministic named children. A child depends only on the
// parent key, the name and the indices, never on how much the parent was used.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  RandomStream sub(std::string_view name, std::initializer_list<std::uint64_t> idx = {}) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t next_u64() { return engine_(); }

  double uniform();  // [0,1)
  double normal();   // N(0,1)
  cd cnormal();      // CN(0,1)
  CVec cnormal_vector(int n);
  CMat cnormal_matrix(int rows, int cols);

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rsjam
