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

#include "rsjam/rng.hpp"

#include <cmath>

namespace rsjam {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : key_(splitmix64(seed)), engine_(key_) {}

RandomStream RandomStream::sub(std::string_view name, std::initializer_list<std::uint64_t> idx) const {
  // FNV-1a over the name, then mixed with the parent key and each index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t k = splitmix64(key_ ^ h);
  for (auto i : idx) k = splitmix64(k ^ splitmix64(i + 0x632be59bd9b4e019ULL));
  RandomStream out(0);
  out.key_ = k;
  out.engine_.seed(k);
  return out;
}

double RandomStream::uniform() { return uniform_(engine_); }

double RandomStream::normal() { return normal_(engine_); }

cd RandomStream::cnormal() {
  static const double s = std::sqrt(0.5);
  double re = normal_(engine_);
  double im = normal_(engine_);
  return {s * re, s * im};
}

CVec RandomStream::cnormal_vector(int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cnormal();
  return v;
}

CMat RandomStream::cnormal_matrix(int rows, int cols) {
  CMat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = cnormal();
  return m;
}

}  // namespace rsjam
