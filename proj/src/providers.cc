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

#include "mac/providers.h"

#include <cmath>

#include "mac/cache.h"
#include "mac/errors.h"
#include "mac/http_providers.h"
#include "mac/mock_providers.h"
#include "mac/tokenizer.h"

namespace mac {

using nlohmann::json;

std::string_view ToString(ProviderRole r) {
  switch (r) {
    case ProviderRole::kEmbedding: return "embedding";
    case ProviderRole::kNli: return "nli";
    case ProviderRole::kGeneration: return "generation";
    case ProviderRole::kAnnotation: return "annotation";
    case ProviderRole::kItm: return "itm";
  }
  return "embedding";
}

ProviderRole ParseProviderRole(std::string_view s) {
  if (s == "embedding") return ProviderRole::kEmbedding;
  if (s == "nli") return ProviderRole::kNli;
  if (s == "generation") return ProviderRole::kGeneration;
  if (s == "annotation") return ProviderRole::kAnnotation;
  if (s == "itm") return ProviderRole::kItm;
  throw ConfigError("unknown provider role '" + std::string(s) + "'");
}

std::string ProviderSpec::Identity() const {
  std::string id = std::string(ToString(role)) + "|";
  if (backend == BackendKind::kMock) {
    id += "mock|seed=" + std::to_string(seed) + "|model=" + model_id;
    if (role == ProviderRole::kEmbedding || role == ProviderRole::kItm) id += "|dim=" + std::to_string(dim);
    if (role == ProviderRole::kNli) id += "|models=" + std::to_string(nli_models);
  } else {
    id += "http|" + api + "|" + base_url + "|model=" + model_id;
  }
  return id;
}

ProviderSpec ProviderSpec::FromJson(const json& j, ProviderRole role) {
  ProviderSpec s;
  s.role = role;
  if (!j.is_object()) throw ConfigError("provider spec for " + std::string(ToString(role)) + " must be an object");
  const std::string backend = j.value("backend", std::string("mock"));
  if (backend == "mock") {
    s.backend = BackendKind::kMock;
  } else if (backend == "http") {
    s.backend = BackendKind::kHttp;
  } else {
    throw ConfigError("unknown backend '" + backend + "'");
  }
  s.seed = j.value("seed", s.seed);
  s.base_url = j.value("base_url", s.base_url);
  s.model_id = j.value("model_id", s.model_id);
  s.timeout_ms = j.value("timeout_ms", s.timeout_ms);
  s.retries = j.value("retries", s.retries);
  s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
  s.dim = j.value("dim", s.dim);
  s.nli_models = j.value("nli_models", s.nli_models);
  s.api = j.value("api", s.api);
  if (s.backend == BackendKind::kHttp && s.base_url.empty()) {
    throw ConfigError(std::string(ToString(role)) + ": http backend requires base_url");
  }
  if (s.api != "bridge" && s.api != "openai") throw ConfigError("unknown api '" + s.api + "'");
  if (s.api == "openai" && role != ProviderRole::kGeneration) {
    throw ConfigError("the openai api is only supported for the generation role");
  }
  if (s.nli_models == 0) throw ConfigError("nli_models must be >= 1");
  return s;
}

json ProviderSpec::ToJson() const {
  json j;
  j["backend"] = backend == BackendKind::kMock ? "mock" : "http";
  if (backend == BackendKind::kMock) {
    j["seed"] = seed;
    if (role == ProviderRole::kEmbedding || role == ProviderRole::kItm) j["dim"] = dim;
  } else {
    j["base_url"] = base_url;
    j["api"] = api;
    j["timeout_ms"] = timeout_ms;
    j["retries"] = retries;
    j["max_in_flight"] = max_in_flight;
  }
  if (role == ProviderRole::kNli) j["nli_models"] = nli_models;
  if (!model_id.empty()) j["model_id"] = model_id;
  return j;
}

double ItmScoreFromLogits(double yes_logit, double no_logit) {
  // Two-way softmax == logistic of the logit gap.
  const double gap = yes_logit - no_logit;
  if (gap >= 0) return 1.0 / (1.0 + std::exp(-gap));
  const double e = std::exp(gap);
  return e / (1.0 + e);
}

double Cosine(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw ProviderError("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void CheckAnnotationAlignment(std::span<const std::string> texts,
                              const std::vector<std::vector<Annotation>>& annotations) {
  if (annotations.size() != texts.size()) {
    throw ProviderError("annotate: expected " + std::to_string(texts.size()) + " rows, got " +
                        std::to_string(annotations.size()));
  }
  for (size_t i = 0; i < texts.size(); ++i) {
    Tokens tokens = Tokenize(texts[i]);
    const auto& row = annotations[i];
    if (row.size() != tokens.size()) {
      throw ProviderError("annotate: text " + std::to_string(i) + " has " +
                          std::to_string(tokens.size()) + " tokens but " +
                          std::to_string(row.size()) + " annotations");
    }
    for (size_t k = 0; k < tokens.size(); ++k) {
      if (row[k].text != tokens[k]) {
        throw ProviderError("annotate: text " + std::to_string(i) + " token " + std::to_string(k) +
                            " is '" + row[k].text + "', expected '" + tokens[k] + "'");
      }
    }
  }
}

namespace {

json EmbedInputJson(const EmbedInput& in) {
  if (in.kind == EmbedInput::Kind::kText) return {{"kind", "text"}, {"value", in.value}};
  return {{"kind", ToString(in.modality)}, {"value", in.value}};
}

class CachingEmbedder : public EmbeddingProvider {
 public:
  CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner, ResponseCache& cache)
      : inner_(std::move(inner)), cache_(cache), identity_(inner_->Identity()) {}

  std::vector<Embedding> Embed(std::span<const EmbedInput> inputs) override {
    std::vector<Embedding> out(inputs.size());
    std::vector<CacheKey> keys;
    std::vector<size_t> missing;
    std::vector<EmbedInput> to_fetch;
    for (size_t i = 0; i < inputs.size(); ++i) {
      keys.push_back(CacheKey::For("embedding", identity_, "embed", EmbedInputJson(inputs[i])));
      if (auto hit = cache_.Get(keys.back())) {
        out[i] = hit->get<Embedding>();
      } else {
        missing.push_back(i);
        to_fetch.push_back(inputs[i]);
      }
    }
    if (!to_fetch.empty()) {
      CountCall();
      auto fetched = inner_->Embed(to_fetch);
      for (size_t k = 0; k < missing.size(); ++k) {
        out[missing[k]] = cache_.Put(keys[missing[k]], fetched[k]).get<Embedding>();
      }
    }
    return out;
  }
  std::string Identity() const override { return identity_; }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  ResponseCache& cache_;
  std::string identity_;
};

class CachingNli : public NliProvider {
 public:
  CachingNli(std::shared_ptr<NliProvider> inner, ResponseCache& cache)
      : inner_(std::move(inner)), cache_(cache), identity_(inner_->Identity()) {}

  std::vector<std::vector<double>> Entailment(std::span<const NliPair> pairs) override {
    std::vector<std::vector<double>> out(pairs.size());
    std::vector<CacheKey> keys;
    std::vector<size_t> missing;
    std::vector<NliPair> to_fetch;
    for (size_t i = 0; i < pairs.size(); ++i) {
      keys.push_back(CacheKey::For("nli", identity_, "nli",
                                   {{"premise", pairs[i].premise}, {"hypothesis", pairs[i].hypothesis}}));
      if (auto hit = cache_.Get(keys.back())) {
        out[i] = hit->get<std::vector<double>>();
      } else {
        missing.push_back(i);
        to_fetch.push_back(pairs[i]);
      }
    }
    if (!to_fetch.empty()) {
      CountCall();
      auto fetched = inner_->Entailment(to_fetch);
      if (fetched.size() != to_fetch.size()) throw ProviderError("nli: score count mismatch");
      for (size_t k = 0; k < missing.size(); ++k) {
        out[missing[k]] = cache_.Put(keys[missing[k]], fetched[k]).get<std::vector<double>>();
      }
    }
    return out;
  }
  size_t ModelCount() const override { return inner_->ModelCount(); }
  std::string Identity() const override { return identity_; }

 private:
  std::shared_ptr<NliProvider> inner_;
  ResponseCache& cache_;
  std::string identity_;
};

class CachingGenerator : public GenerationProvider {
 public:
  CachingGenerator(std::shared_ptr<GenerationProvider> inner, ResponseCache& cache)
      : inner_(std::move(inner)), cache_(cache), identity_(inner_->Identity()) {}

  std::vector<std::string> Generate(const std::string& prompt, size_t n,
                                    const SamplingParams& params) override {
    json request = {{"prompt", prompt},        {"n", n},
                    {"top_p", params.top_p},   {"temperature", params.temperature},
                    {"seed", params.seed},     {"max_tokens", params.max_tokens}};
    CacheKey key = CacheKey::For("generation", identity_, "generate", request);
    if (auto hit = cache_.Get(key)) return hit->get<std::vector<std::string>>();
    CountCall();
    return cache_.Put(key, inner_->Generate(prompt, n, params)).get<std::vector<std::string>>();
  }
  std::string Identity() const override { return identity_; }

 private:
  std::shared_ptr<GenerationProvider> inner_;
  ResponseCache& cache_;
  std::string identity_;
};

json AnnotationsToJson(const std::vector<Annotation>& row) {
  json j = json::array();
  for (const auto& a : row) j.push_back({{"text", a.text}, {"pos", a.pos}, {"lemma", a.lemma}});
  return j;
}

std::vector<Annotation> AnnotationsFromJson(const json& j) {
  std::vector<Annotation> row;
  for (const auto& a : j) {
    row.push_back({a.at("text").get<std::string>(), a.at("pos").get<std::string>(),
                   a.at("lemma").get<std::string>()});
  }
  return row;
}

class CachingAnnotator : public AnnotationProvider {
 public:
  CachingAnnotator(std::shared_ptr<AnnotationProvider> inner, ResponseCache& cache)
      : inner_(std::move(inner)), cache_(cache), identity_(inner_->Identity()) {}

  std::vector<std::vector<Annotation>> Annotate(std::span<const std::string> texts) override {
    std::vector<std::vector<Annotation>> out(texts.size());
    std::vector<CacheKey> keys;
    std::vector<size_t> missing;
    std::vector<std::string> to_fetch;
    for (size_t i = 0; i < texts.size(); ++i) {
      keys.push_back(CacheKey::For("annotation", identity_, "annotate", json(texts[i])));
      if (auto hit = cache_.Get(keys.back())) {
        out[i] = AnnotationsFromJson(*hit);
      } else {
        missing.push_back(i);
        to_fetch.push_back(texts[i]);
      }
    }
    if (!to_fetch.empty()) {
      CountCall();
      auto fetched = inner_->Annotate(to_fetch);
      CheckAnnotationAlignment(to_fetch, fetched);
      for (size_t k = 0; k < missing.size(); ++k) {
        out[missing[k]] = AnnotationsFromJson(cache_.Put(keys[missing[k]], AnnotationsToJson(fetched[k])));
      }
    }
    return out;
  }
  std::string Identity() const override { return identity_; }

 private:
  std::shared_ptr<AnnotationProvider> inner_;
  ResponseCache& cache_;
  std::string identity_;
};

class AlignedAnnotator : public AnnotationProvider {
 public:
  explicit AlignedAnnotator(std::shared_ptr<AnnotationProvider> inner) : inner_(std::move(inner)) {}
  std::vector<std::vector<Annotation>> Annotate(std::span<const std::string> texts) override {
    CountCall();
    auto out = inner_->Annotate(texts);
    CheckAnnotationAlignment(texts, out);
    return out;
  }
  std::string Identity() const override { return inner_->Identity(); }

 private:
  std::shared_ptr<AnnotationProvider> inner_;
};

class CachingItm : public ItmProvider {
 public:
  CachingItm(std::shared_ptr<ItmProvider> inner, ResponseCache& cache)
      : inner_(std::move(inner)), cache_(cache), identity_(inner_->Identity()) {}

  double Score(const EmbedInput& asset, const std::string& caption) override {
    CacheKey key = CacheKey::For("itm", identity_, "itm",
                                 {{"asset", EmbedInputJson(asset)}, {"caption", caption}});
    if (auto hit = cache_.Get(key)) return hit->get<double>();
    CountCall();
    return cache_.Put(key, inner_->Score(asset, caption)).get<double>();
  }
  std::string Identity() const override { return identity_; }

 private:
  std::shared_ptr<ItmProvider> inner_;
  ResponseCache& cache_;
  std::string identity_;
};

void RequireRole(const ProviderSpec& spec, ProviderRole role) {
  if (spec.role != role) {
    throw ConfigError("provider spec has role " + std::string(ToString(spec.role)) + ", expected " +
                      std::string(ToString(role)));
  }
}

}  // namespace

std::shared_ptr<EmbeddingProvider> MakeEmbeddingProvider(const ProviderSpec& spec,
                                                         ResponseCache* cache) {
  RequireRole(spec, ProviderRole::kEmbedding);
  std::shared_ptr<EmbeddingProvider> p;
  if (spec.backend == BackendKind::kMock) {
    p = std::make_shared<MockEmbedder>(spec.seed, spec.dim);
  } else {
    p = std::make_shared<HttpEmbedder>(spec);
  }
  if (cache) p = std::make_shared<CachingEmbedder>(p, *cache);
  return p;
}

std::shared_ptr<NliProvider> MakeNliProvider(const ProviderSpec& spec, ResponseCache* cache) {
  RequireRole(spec, ProviderRole::kNli);
  std::shared_ptr<NliProvider> p;
  if (spec.backend == BackendKind::kMock) {
    p = std::make_shared<MockNli>(spec.seed, spec.nli_models);
  } else {
    p = std::make_shared<HttpNli>(spec);
  }
  if (cache) p = std::make_shared<CachingNli>(p, *cache);
  return p;
}

std::shared_ptr<GenerationProvider> MakeGenerationProvider(const ProviderSpec& spec,
                                                           ResponseCache* cache) {
  RequireRole(spec, ProviderRole::kGeneration);
  std::shared_ptr<GenerationProvider> p;
  if (spec.backend == BackendKind::kMock) {
    p = std::make_shared<MockGenerator>(spec.seed, spec.model_id.empty() ? "mock" : spec.model_id);
  } else if (spec.api == "openai") {
    p = std::make_shared<OpenAiGenerator>(spec);
  } else {
    p = std::make_shared<BridgeGenerator>(spec);
  }
  if (cache) p = std::make_shared<CachingGenerator>(p, *cache);
  return p;
}

std::shared_ptr<AnnotationProvider> MakeAnnotationProvider(const ProviderSpec& spec,
                                                           ResponseCache* cache) {
  RequireRole(spec, ProviderRole::kAnnotation);
  std::shared_ptr<AnnotationProvider> p;
  if (spec.backend == BackendKind::kMock) {
    p = std::make_shared<MockAnnotator>();
  } else {
    p = std::make_shared<HttpAnnotator>(spec);
  }
  if (cache) return std::make_shared<CachingAnnotator>(p, *cache);
  return std::make_shared<AlignedAnnotator>(p);
}

std::shared_ptr<ItmProvider> MakeItmProvider(const ProviderSpec& spec, ResponseCache* cache) {
  RequireRole(spec, ProviderRole::kItm);
  std::shared_ptr<ItmProvider> p;
  if (spec.backend == BackendKind::kMock) {
    p = std::make_shared<MockItm>(spec.seed, spec.dim);
  } else {
    p = std::make_shared<HttpItm>(spec);
  }
  if (cache) p = std::make_shared<CachingItm>(p, *cache);
  return p;
}

std::string HealthCheck(const ProviderSpec& spec) {
  if (spec.backend == BackendKind::kMock) return "";
  try {
    HttpJsonClient client(spec);
    if (spec.api == "openai") {
      client.Get("/v1/models");
      return "";
    }
    json health = client.Get("/healthz");
    const json& roles = health.at("roles");
    if (!roles.contains(std::string(ToString(spec.role)))) {
      return "bridge at " + spec.base_url + " does not serve role " + std::string(ToString(spec.role));
    }
    return "";
  } catch (const std::exception& e) {
    return e.what();
  }
}

}  // namespace mac
