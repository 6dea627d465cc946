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

#include "mac/cache.h"

#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mac/hashing.h"

namespace mac {

using nlohmann::json;

CacheKey CacheKey::For(std::string role, std::string backend, std::string operation,
                       const json& canonical_input) {
  return {std::move(role), std::move(backend), std::move(operation),
          Sha256Hex(canonical_input.dump())};
}

std::string CacheKey::Digest() const {
  return Sha256Hex(role + '\n' + backend + '\n' + operation + '\n' + input_digest);
}

json CacheKey::ToJson() const {
  return {{"role", role}, {"backend", backend}, {"operation", operation}, {"input", input_digest}};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::RecordPath(const std::string& digest) const {
  return dir_ / (digest + ".json");
}

std::optional<json> ResponseCache::Get(const CacheKey& key) {
  const std::string digest = key.Digest();
  const auto path = RecordPath(digest);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    misses_.fetch_add(1);
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  in.close();
  try {
    json record = json::parse(ss.str());
    if (record.at("key") != key.ToJson()) throw std::runtime_error("key mismatch");
    hits_.fetch_add(1);
    return record.at("value");
  } catch (const std::exception& e) {
    std::cerr << "warning: corrupt cache record " << path << " (" << e.what()
              << "); treating as miss\n";
    std::error_code ec;
    std::filesystem::rename(path, dir_ / (digest + ".corrupt"), ec);
    misses_.fetch_add(1);
    return std::nullopt;
  }
}

json ResponseCache::Put(const CacheKey& key, const json& value) {
  const std::string digest = key.Digest();
  const auto final_path = RecordPath(digest);
  std::ostringstream tmp_name;
  tmp_name << ".tmp-" << digest << "-" << ::getpid() << "-"
           << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "-"
           << tmp_counter_.fetch_add(1);
  const auto tmp_path = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << json{{"key", key.ToJson()}, {"value", value}}.dump();
    if (!out) throw std::runtime_error("cache: cannot write " + tmp_path.string());
  }
  const bool published = ::link(tmp_path.c_str(), final_path.c_str()) == 0;
  const int err = errno;
  std::error_code ec;
  std::filesystem::remove(tmp_path, ec);
  if (published) {
    std::lock_guard<std::mutex> lock(index_mu_);
    std::ofstream index(dir_ / "index.jsonl", std::ios::app | std::ios::binary);
    index << json{{"digest", digest}, {"role", key.role}, {"operation", key.operation}}.dump()
          << '\n';
    return value;
  }
  if (err != EEXIST) {
    throw std::runtime_error("cache: cannot publish " + final_path.string());
  }
  if (auto existing = Get(key)) return *existing;
  return value;
}

}  // namespace mac
