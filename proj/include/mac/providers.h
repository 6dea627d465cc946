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

// Backend-neutral interfaces for the models a campaign talks to. Every
// backend (in-process mock, model-bridge HTTP, OpenAI-compatible HTTP) sits
// behind one of these, optionally wrapped by the response cache.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mac/corpus.h"

namespace mac {

class ResponseCache;

enum class ProviderRole { kEmbedding, kNli, kGeneration, kAnnotation, kItm };
enum class BackendKind { kMock, kHttp };

std::string_view ToString(ProviderRole r);
ProviderRole ParseProviderRole(std::string_view s);

struct ProviderSpec {
  ProviderRole role = ProviderRole::kEmbedding;
  BackendKind backend = BackendKind::kMock;
  uint64_t seed = 1;          // mock only
  std::string base_url;       // http only
  std::string model_id;       // http only; also labels scripted mocks
  int timeout_ms = 30000;
  int retries = 2;
  int max_in_flight = 8;
  size_t dim = 64;            // mock embedding dimension
  size_t nli_models = 3;      // mock NLI model count
  // "bridge" (model-bridge API) or "openai" (chat completions, generation only).
  std::string api = "bridge";

  // Stable identity used in cache keys: backend kind plus everything that
  // changes the backend's answers.
  std::string Identity() const;

  // Default mock spec for a role.
  static ProviderSpec ForRole(ProviderRole role) {
    ProviderSpec s;
    s.role = role;
    return s;
  }
  static ProviderSpec FromJson(const nlohmann::json& j, ProviderRole role);
  nlohmann::json ToJson() const;
};

using Embedding = std::vector<double>;

struct EmbedInput {
  enum class Kind { kText, kAsset };
  Kind kind = Kind::kText;
  Modality modality = Modality::kImage;  // asset modality; ignored for text
  std::string value;

  static EmbedInput Text(std::string v) { return {Kind::kText, Modality::kImage, std::move(v)}; }
  static EmbedInput Asset(Modality m, std::string ref) { return {Kind::kAsset, m, std::move(ref)}; }
};

struct NliPair {
  std::string premise;
  std::string hypothesis;
};

struct SamplingParams {
  double top_p = 0.95;
  double temperature = 0.7;
  uint64_t seed = 0;
  int max_tokens = 96;
};

struct Annotation {
  std::string text;
  std::string pos;  // Universal POS tag
  std::string lemma;

  bool operator==(const Annotation&) const = default;
};

// Counts requests that reach the backend (cache hits are not counted).
class CallCounter {
 public:
  uint64_t BackendCalls() const { return calls_.load(); }

 protected:
  void CountCall() const { calls_.fetch_add(1); }

 private:
  mutable std::atomic<uint64_t> calls_{0};
};

class EmbeddingProvider : public CallCounter {
 public:
  virtual ~EmbeddingProvider() = default;
  // One unit-norm vector per input, all of the same dimension.
  virtual std::vector<Embedding> Embed(std::span<const EmbedInput> inputs) = 0;
  virtual std::string Identity() const = 0;
};

class NliProvider : public CallCounter {
 public:
  virtual ~NliProvider() = default;
  // Per pair, the entailment-class probability of each model.
  virtual std::vector<std::vector<double>> Entailment(std::span<const NliPair> pairs) = 0;
  virtual size_t ModelCount() const = 0;
  virtual std::string Identity() const = 0;
};

class GenerationProvider : public CallCounter {
 public:
  virtual ~GenerationProvider() = default;
  // Exactly n raw completions from one parallel request.
  virtual std::vector<std::string> Generate(const std::string& prompt, size_t n,
                                            const SamplingParams& params) = 0;
  virtual std::string Identity() const = 0;
};

class AnnotationProvider : public CallCounter {
 public:
  virtual ~AnnotationProvider() = default;
  // Per text, one annotation per token of Tokenize(text).
  virtual std::vector<std::vector<Annotation>> Annotate(std::span<const std::string> texts) = 0;
  virtual std::string Identity() const = 0;
};

class ItmProvider : public CallCounter {
 public:
  virtual ~ItmProvider() = default;
  // Match probability in (0, 1) from yes/no next-token logits.
  virtual double Score(const EmbedInput& asset, const std::string& caption) = 0;
  virtual std::string Identity() const = 0;
};

// exp(yes) / (exp(yes) + exp(no)), evaluated stably.
double ItmScoreFromLogits(double yes_logit, double no_logit);

double Cosine(const Embedding& a, const Embedding& b);

// Raises ProviderError unless every annotation list matches Tokenize(text).
void CheckAnnotationAlignment(std::span<const std::string> texts,
                              const std::vector<std::vector<Annotation>>& annotations);

// Factories. When `cache` is non-null the backend is wrapped so identical
// requests are served from disk. Annotation providers are always wrapped
// with the alignment check.
std::shared_ptr<EmbeddingProvider> MakeEmbeddingProvider(const ProviderSpec& spec,
                                                         ResponseCache* cache = nullptr);
std::shared_ptr<NliProvider> MakeNliProvider(const ProviderSpec& spec,
                                             ResponseCache* cache = nullptr);
std::shared_ptr<GenerationProvider> MakeGenerationProvider(const ProviderSpec& spec,
                                                           ResponseCache* cache = nullptr);
std::shared_ptr<AnnotationProvider> MakeAnnotationProvider(const ProviderSpec& spec,
                                                           ResponseCache* cache = nullptr);
std::shared_ptr<ItmProvider> MakeItmProvider(const ProviderSpec& spec,
                                             ResponseCache* cache = nullptr);

// Mock backends are always healthy; http backends must answer GET /healthz
// (bridge) or GET /v1/models (openai). Returns an error message or "".
std::string HealthCheck(const ProviderSpec& spec);

}  // namespace mac
