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

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

namespace mac {

struct CacheKey {
  std::string role;
  std::string backend;      // ProviderSpec::Identity()
  std::string operation;    // "embed", "nli", ...
  std::string input_digest; // Sha256Hex of the canonical request JSON

  static CacheKey For(std::string role, std::string backend, std::string operation,
                      const nlohmann::json& canonical_input);
  std::string Digest() const;
  nlohmann::json ToJson() const;
};

// Content-addressed, write-once response store. Layout:
//   <dir>/<digest>.json   {"key": {...}, "value": ...}
//   <dir>/index.jsonl     one {"digest","role","operation"} line per stored key
// Records are published with link(2), so concurrent writers of one key (in
// or across processes) leave exactly one stored value.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  // A corrupt or mismatched record is moved aside, logged, and reported as a
  // miss.
  std::optional<nlohmann::json> Get(const CacheKey& key);

  // Returns the stored value: `value` if this call published it, otherwise
  // the value that was already there.
  nlohmann::json Put(const CacheKey& key, const nlohmann::json& value);

  const std::filesystem::path& dir() const { return dir_; }
  uint64_t hits() const { return hits_.load(); }
  uint64_t misses() const { return misses_.load(); }

 private:
  std::filesystem::path RecordPath(const std::string& digest) const;

  std::filesystem::path dir_;
  std::mutex index_mu_;
  std::atomic<uint64_t> hits_{0};
  std::atomic<uint64_t> misses_{0};
  std::atomic<uint64_t> tmp_counter_{0};
};

}  // namespace mac
