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

// HTTP backends.
//
// Model bridge API (all JSON):
//   POST /v1/embed    {"inputs":[{"kind":"text"|"image"|"video"|"audio","value":s}]}
//                     -> {"vectors":[[...]],"dim":int}
//   POST /v1/nli      {"pairs":[{"premise":s,"hypothesis":s}]} -> {"scores":[[p,...]]}
//   POST /v1/annotate {"texts":[s]} -> {"annotations":[[{"text","pos","lemma"}]]}
//   POST /v1/itm      {"asset":s,"caption":s} -> {"score":f}
//   GET  /healthz     -> {"roles":{...}}
// A "model" field carrying ProviderSpec::model_id is added when non-empty.
//
// Generation may instead target any OpenAI-compatible server:
//   POST /v1/chat/completions {"model","messages","n","top_p","temperature","seed","max_tokens"}

#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "json.hpp"
#include "mac/providers.h"

namespace mac {

// JSON-over-HTTP client with retry and a bound on in-flight requests.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(const ProviderSpec& spec);

  nlohmann::json Post(const std::string& path, const nlohmann::json& body);
  nlohmann::json Get(const std::string& path);

 private:
  nlohmann::json Send(const std::string& method, const std::string& path,
                      const nlohmann::json* body);

  ProviderSpec spec_;
  std::counting_semaphore<1024> in_flight_;
};

class HttpEmbedder : public EmbeddingProvider {
 public:
  explicit HttpEmbedder(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  std::vector<Embedding> Embed(std::span<const EmbedInput> inputs) override;
  std::string Identity() const override { return spec_.Identity(); }

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

class HttpNli : public NliProvider {
 public:
  explicit HttpNli(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  std::vector<std::vector<double>> Entailment(std::span<const NliPair> pairs) override;
  // Configured via ProviderSpec::nli_models; responses must match it.
  size_t ModelCount() const override { return spec_.nli_models; }
  std::string Identity() const override { return spec_.Identity(); }

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

class HttpAnnotator : public AnnotationProvider {
 public:
  explicit HttpAnnotator(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  std::vector<std::vector<Annotation>> Annotate(std::span<const std::string> texts) override;
  std::string Identity() const override { return spec_.Identity(); }

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

class HttpItm : public ItmProvider {
 public:
  explicit HttpItm(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  double Score(const EmbedInput& asset, const std::string& caption) override;
  std::string Identity() const override { return spec_.Identity(); }

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

// OpenAI-compatible chat completions; all n samples in one request.
class OpenAiGenerator : public GenerationProvider {
 public:
  explicit OpenAiGenerator(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  std::vector<std::string> Generate(const std::string& prompt, size_t n,
                                    const SamplingParams& params) override;
  std::string Identity() const override { return spec_.Identity(); }

  static nlohmann::json BuildRequest(const std::string& model, const std::string& prompt,
                                     size_t n, const SamplingParams& params);

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

// Bridge-hosted generation: POST /v1/generate {"prompt","n","top_p","temperature","seed"}
// -> {"completions":[...]}.
class BridgeGenerator : public GenerationProvider {
 public:
  explicit BridgeGenerator(const ProviderSpec& spec) : spec_(spec), client_(spec) {}
  std::vector<std::string> Generate(const std::string& prompt, size_t n,
                                    const SamplingParams& params) override;
  std::string Identity() const override { return spec_.Identity(); }

 private:
  ProviderSpec spec_;
  HttpJsonClient client_;
};

}  // namespace mac
