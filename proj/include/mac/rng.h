// Copyright 2026 The MAC Authors.
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

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "mac/hashing.h"

namespace mac {

// Seeded random source with a fully specified algorithm (SplitMix64 plus
// rejection sampling for bounded draws). std:: distributions are avoided
// because their output differs between standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t Next() { return SplitMix64(state_); }

  // Uniform integer in [0, n).
  size_t UniformIndex(size_t n) {
    if (n == 0) throw std::invalid_argument("UniformIndex: empty range");
    const uint64_t bound = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return static_cast<size_t>(x % bound);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double UniformUnit() {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

}  // namespace mac
