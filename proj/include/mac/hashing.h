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

#include <cstdint>
#include <string>
#include <string_view>

namespace mac {

// 64-bit FNV-1a over the raw bytes.
constexpr uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One SplitMix64 step: advances `state` and returns the mixed output.
constexpr uint64_t SplitMix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a parent seed and a label.
// All per-pair and per-candidate randomness flows through this so that
// worker scheduling never changes results.
inline uint64_t DeriveSeed(uint64_t parent, std::string_view label) {
  uint64_t state = parent ^ Fnv1a64(label);
  return SplitMix64(state);
}

inline uint64_t DeriveSeed(uint64_t parent, std::string_view label,
                           uint64_t index) {
  uint64_t state = DeriveSeed(parent, label) + index * 0xd1b54a32d192ed03ULL;
  return SplitMix64(state);
}

// Lowercase hex SHA-256 digest.
std::string Sha256Hex(std::string_view bytes);

}  // namespace mac
