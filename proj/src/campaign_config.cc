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

#include "mac/campaign_config.h"

#include <fstream>
#include <sstream>

#include "mac/errors.h"

namespace mac {

using nlohmann::json;

namespace {

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

size_t GetCount(const json& j, const char* key, size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("config field '") + key + "' must be an integer");
  if (v.get<long long>() < 0) throw ConfigError(std::string("config field '") + key + "' must be >= 0");
  return v.get<size_t>();
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

std::string_view ToString(SelectionStrategy s) {
  return s == SelectionStrategy::kBestOfN ? "best_of_n" : "gibbs";
}

SelectionStrategy ParseSelectionStrategy(std::string_view s) {
  if (s == "best_of_n") return SelectionStrategy::kBestOfN;
  if (s == "gibbs") return SelectionStrategy::kGibbs;
  throw ConfigError("unknown selection strategy '" + std::string(s) + "'");
}

std::string_view ToString(CrossmodalBackend b) {
  return b == CrossmodalBackend::kEmbedding ? "embedding" : "itm";
}

CrossmodalBackend ParseCrossmodalBackend(std::string_view s) {
  if (s == "embedding") return CrossmodalBackend::kEmbedding;
  if (s == "itm") return CrossmodalBackend::kItm;
  throw ConfigError("unknown crossmodal backend '" + std::string(s) + "'");
}

void CampaignConfig::Validate() const {
  if (corpus_path.empty()) throw ConfigError("corpus.path is required");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (large_n < n) throw ConfigError("large_n must be >= n");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (selection.k < 1) throw ConfigError("selection.k must be >= 1");
  if (selection.objective != "entropy" && selection.objective != "distinct1") {
    throw ConfigError("unknown selection objective '" + selection.objective + "'");
  }
  if (!(max_exclusion_rate >= 0.0 && max_exclusion_rate <= 1.0)) {
    throw ConfigError("max_exclusion_rate must be in [0, 1]");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("sampling.top_p must be in (0, 1]");
  if (!(temperature >= 0.0)) throw ConfigError("sampling.temperature must be >= 0");
  if (crossmodal == CrossmodalBackend::kItm && !itm) {
    throw ConfigError("crossmodal=itm requires providers.itm");
  }
  try {
    criteria.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (criteria.prompt_op != prompt) {
    throw ConfigError("criteria.prompt_op must match the prompt kind");
  }
  for (const auto& [r, _] : round_generators) {
    if (r == 0) throw ConfigError("round_generators: round 0 uses providers.generation");
  }
}

ProviderSpec CampaignConfig::GenerationFor(size_t r) const {
  if (r == 0) return generation;
  auto it = round_generators.find(r);
  if (it == round_generators.end()) {
    throw ConfigError("no generation endpoint registered for round " + std::to_string(r) +
                      "; set round_generators." + std::to_string(r));
  }
  return it->second;
}

CampaignConfig CampaignConfig::FromJson(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("campaign config must be a JSON object");
  CampaignConfig c;
  c.name = Get<std::string>(j, "name", c.name);

  const json corpus = j.value("corpus", json::object());
  if (corpus.contains("path")) c.corpus_path = Resolve(base_dir, corpus.at("path").get<std::string>());
  c.corpus_format = ParseCorpusFormat(Get<std::string>(corpus, "format", "auto"));
  const std::string split = Get<std::string>(corpus, "split", "test");
  c.split = split == "all" ? std::nullopt : std::optional<Split>(ParseSplit(split));

  const json providers = j.value("providers", json::object());
  auto spec = [&](const char* key, ProviderRole role) {
    return ProviderSpec::FromJson(providers.value(key, json::object()), role);
  };
  c.embedding = spec("embedding", ProviderRole::kEmbedding);
  c.nli = spec("nli", ProviderRole::kNli);
  c.generation = spec("generation", ProviderRole::kGeneration);
  c.annotation = spec("annotation", ProviderRole::kAnnotation);
  if (providers.contains("itm") && !providers.at("itm").is_null()) c.itm = spec("itm", ProviderRole::kItm);
  c.crossmodal = ParseCrossmodalBackend(Get<std::string>(j, "crossmodal", "embedding"));

  try {
    c.prompt = ParsePromptKind(Get<std::string>(j, "prompt", "general"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.n = GetCount(j, "n", c.n);
  c.large_n = GetCount(j, "large_n", c.large_n);
  c.seed = Get<uint64_t>(j, "seed", c.seed);
  c.round = GetCount(j, "round", c.round);

  const json sampling = j.value("sampling", json::object());
  c.top_p = Get<double>(sampling, "top_p", c.top_p);
  c.temperature = Get<double>(sampling, "temperature", c.temperature);
  c.max_tokens = Get<int>(sampling, "max_tokens", c.max_tokens);

  json criteria = j.value("criteria", json::object());
  // The compliance rule follows the prompt unless stated explicitly.
  if (!criteria.contains("prompt_op")) {
    criteria["prompt_op"] = c.prompt ? json(PromptKindName(c.prompt)) : json(nullptr);
  }
  try {
    c.criteria = CriteriaConfig::FromJson(criteria);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("criteria: ") + e.what());
  }

  const json selection = j.value("selection", json::object());
  c.selection.strategy = ParseSelectionStrategy(Get<std::string>(selection, "strategy", "best_of_n"));
  c.selection.k = GetCount(selection, "k", c.selection.k);
  c.selection.objective = Get<std::string>(selection, "objective", c.selection.objective);

  c.workers = GetCount(j, "workers", c.workers);
  c.max_exclusion_rate = Get<double>(j, "max_exclusion_rate", c.max_exclusion_rate);
  if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
    c.cache_dir = Resolve(base_dir, j.at("cache_dir").get<std::string>());
  }

  if (j.contains("round_generators")) {
    for (auto it = j.at("round_generators").begin(); it != j.at("round_generators").end(); ++it) {
      size_t r = 0;
      try {
        r = std::stoul(it.key());
      } catch (const std::exception&) {
        throw ConfigError("round_generators key '" + it.key() + "' is not a round index");
      }
      c.round_generators[r] = ProviderSpec::FromJson(it.value(), ProviderRole::kGeneration);
    }
  }

  if (j.contains("transfer")) {
    for (const auto& t : j.at("transfer").value("targets", json::array())) {
      TransferTarget target;
      target.name = t.at("name").get<std::string>();
      target.kind = ParseCrossmodalBackend(t.value("kind", std::string("embedding")));
      target.spec = ProviderSpec::FromJson(
          t.value("spec", json::object()),
          target.kind == CrossmodalBackend::kItm ? ProviderRole::kItm : ProviderRole::kEmbedding);
      c.transfer_targets.push_back(std::move(target));
    }
  }

  c.Validate();
  return c;
}

json CampaignConfig::ToJson() const {
  json j;
  j["name"] = name;
  j["corpus"] = {{"path", corpus_path.string()},
                 {"format", corpus_format == CorpusFormat::kAuto    ? "auto"
                            : corpus_format == CorpusFormat::kJsonl ? "jsonl"
                                                                    : "csv"},
                 {"split", split ? std::string(ToString(*split)) : std::string("all")}};
  json providers = {{"embedding", embedding.ToJson()},
                    {"nli", nli.ToJson()},
                    {"generation", generation.ToJson()},
                    {"annotation", annotation.ToJson()}};
  if (itm) providers["itm"] = itm->ToJson();
  j["providers"] = providers;
  j["crossmodal"] = std::string(ToString(crossmodal));
  j["prompt"] = PromptKindName(prompt);
  j["n"] = n;
  j["large_n"] = large_n;
  j["seed"] = seed;
  j["round"] = round;
  j["sampling"] = {{"top_p", top_p}, {"temperature", temperature}, {"max_tokens", max_tokens}};
  j["criteria"] = criteria.ToJson();
  j["selection"] = {{"strategy", std::string(ToString(selection.strategy))},
                    {"k", selection.k},
                    {"objective", selection.objective}};
  j["workers"] = workers;
  j["max_exclusion_rate"] = max_exclusion_rate;
  j["cache_dir"] = cache_dir ? json(cache_dir->string()) : json(nullptr);
  json rounds = json::object();
  for (const auto& [r, s] : round_generators) rounds[std::to_string(r)] = s.ToJson();
  j["round_generators"] = rounds;
  json targets = json::array();
  for (const auto& t : transfer_targets) {
    targets.push_back({{"name", t.name}, {"kind", std::string(ToString(t.kind))}, {"spec", t.spec.ToJson()}});
  }
  j["transfer"] = {{"targets", targets}};
  return j;
}

void ApplyOverride(json& doc, std::string_view assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not KEY=VALUE");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json LoadedConfig::Snapshot() const {
  json j = config.ToJson();
  j["overrides"] = overrides;
  return j;
}

LoadedConfig LoadCampaignConfigJson(json doc, const std::vector<std::string>& overrides,
                                    const std::filesystem::path& base_dir) {
  if (doc.is_null()) doc = json::object();
  for (const auto& o : overrides) ApplyOverride(doc, o);
  LoadedConfig out{CampaignConfig::FromJson(doc, base_dir), doc, overrides};
  return out;
}

LoadedConfig LoadCampaignConfig(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return LoadCampaignConfigJson(std::move(doc), overrides, path.parent_path());
}

}  // namespace mac
