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

// One attack campaign's recipe, loaded from a single JSON document. The
// schema is documented in README.md; every field has a default so that
// "{}" plus a corpus path is a valid mock campaign.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mac/corpus.h"
#include "mac/criteria.h"
#include "mac/prompts.h"
#include "mac/providers.h"

namespace mac {

enum class SelectionStrategy { kBestOfN, kGibbs };

std::string_view ToString(SelectionStrategy s);
SelectionStrategy ParseSelectionStrategy(std::string_view s);

// Which scorer decides the crossmodal criterion.
enum class CrossmodalBackend { kEmbedding, kItm };

std::string_view ToString(CrossmodalBackend b);
CrossmodalBackend ParseCrossmodalBackend(std::string_view s);

struct SelectionConfig {
  SelectionStrategy strategy = SelectionStrategy::kBestOfN;
  size_t k = 3;
  std::string objective = "entropy";  // or "distinct1"
};

struct TransferTarget {
  std::string name;
  CrossmodalBackend kind = CrossmodalBackend::kEmbedding;
  ProviderSpec spec;
};

struct CampaignConfig {
  std::string name = "campaign";
  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::kAuto;
  // nullopt attacks every pair regardless of split.
  std::optional<Split> split = Split::kTest;

  ProviderSpec embedding = ProviderSpec::ForRole(ProviderRole::kEmbedding);
  ProviderSpec nli = ProviderSpec::ForRole(ProviderRole::kNli);
  ProviderSpec generation = ProviderSpec::ForRole(ProviderRole::kGeneration);
  ProviderSpec annotation = ProviderSpec::ForRole(ProviderRole::kAnnotation);
  std::optional<ProviderSpec> itm;
  CrossmodalBackend crossmodal = CrossmodalBackend::kEmbedding;

  PromptKind prompt;
  size_t n = 4;
  size_t large_n = 64;
  uint64_t seed = 0;
  size_t round = 0;
  double top_p = 0.95;
  double temperature = 0.7;
  int max_tokens = 96;

  CriteriaConfig criteria;
  SelectionConfig selection;
  size_t workers = 4;
  double max_exclusion_rate = 0.10;
  std::optional<std::filesystem::path> cache_dir;

  // Generation endpoints of fine-tuned models, by round (round >= 1).
  std::map<size_t, ProviderSpec> round_generators;
  std::vector<TransferTarget> transfer_targets;

  // Throws ConfigError.
  void Validate() const;

  // Generation endpoint for `r`: the base generator for round 0, else the
  // registered fine-tuned endpoint. Throws ConfigError when unregistered.
  ProviderSpec GenerationFor(size_t r) const;

  // Relative paths resolve against `base_dir`.
  static CampaignConfig FromJson(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {});
  nlohmann::json ToJson() const;
};

// Applies "a.b.c=value". The value is parsed as JSON when it parses,
// otherwise taken as a string. Intermediate objects are created. Throws
// ConfigError on a malformed override.
void ApplyOverride(nlohmann::json& doc, std::string_view assignment);

struct LoadedConfig {
  CampaignConfig config;
  nlohmann::json document;  // after overrides
  std::vector<std::string> overrides;

  // Resolved config plus the overrides that produced it.
  nlohmann::json Snapshot() const;
};

LoadedConfig LoadCampaignConfig(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides);
LoadedConfig LoadCampaignConfigJson(nlohmann::json doc, const std::vector<std::string>& overrides,
                                    const std::filesystem::path& base_dir = {});

}  // namespace mac
