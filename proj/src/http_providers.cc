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

#include "mac/http_providers.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "mac/errors.h"

namespace mac {

using nlohmann::json;

namespace {

std::string_view KindName(const EmbedInput& in) {
  if (in.kind == EmbedInput::Kind::kText) return "text";
  return ToString(in.modality);
}

void AddModel(json& body, const ProviderSpec& spec) {
  if (!spec.model_id.empty()) body["model"] = spec.model_id;
}

}  // namespace

HttpJsonClient::HttpJsonClient(const ProviderSpec& spec)
    : spec_(spec), in_flight_(std::max(1, std::min(spec.max_in_flight, 1024))) {
  if (spec_.base_url.empty()) throw ConfigError("http backend requires base_url");
}

json HttpJsonClient::Post(const std::string& path, const json& body) {
  return Send("POST", path, &body);
}

json HttpJsonClient::Get(const std::string& path) { return Send("GET", path, nullptr); }

json HttpJsonClient::Send(const std::string& method, const std::string& path, const json* body) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(spec_.base_url);
  const auto timeout = std::chrono::milliseconds(spec_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  std::string last_error;
  for (int attempt = 0; attempt <= spec_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
    httplib::Result res = method == "POST"
                              ? client.Post(path, body->dump(), "application/json")
                              : client.Get(path);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if (res->status != 200) {
      throw ProviderError(spec_.base_url + path + " returned HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ProviderError(spec_.base_url + path + " returned invalid JSON: " + e.what());
    }
  }
  throw ProviderError(spec_.base_url + path + " failed after " +
                      std::to_string(spec_.retries + 1) + " attempts: " + last_error);
}

std::vector<Embedding> HttpEmbedder::Embed(std::span<const EmbedInput> inputs) {
  CountCall();
  json body;
  body["inputs"] = json::array();
  for (const auto& in : inputs) body["inputs"].push_back({{"kind", KindName(in)}, {"value", in.value}});
  AddModel(body, spec_);
  json resp = client_.Post("/v1/embed", body);
  std::vector<Embedding> out;
  try {
    const size_t dim = resp.at("dim").get<size_t>();
    for (const auto& v : resp.at("vectors")) {
      Embedding e = v.get<Embedding>();
      if (e.size() != dim) throw ProviderError("embed: dimension mismatch within batch");
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("embed: malformed response: ") + e.what());
  }
  if (out.size() != inputs.size()) throw ProviderError("embed: vector count mismatch");
  return out;
}

std::vector<std::vector<double>> HttpNli::Entailment(std::span<const NliPair> pairs) {
  CountCall();
  json body;
  body["pairs"] = json::array();
  for (const auto& p : pairs) body["pairs"].push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
  AddModel(body, spec_);
  json resp = client_.Post("/v1/nli", body);
  std::vector<std::vector<double>> out;
  try {
    out = resp.at("scores").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("nli: malformed response: ") + e.what());
  }
  if (out.size() != pairs.size()) throw ProviderError("nli: score count mismatch");
  for (const auto& row : out) {
    if (row.size() != spec_.nli_models) {
      throw ProviderError("nli: expected " + std::to_string(spec_.nli_models) +
                          " model scores, got " + std::to_string(row.size()));
    }
  }
  return out;
}

std::vector<std::vector<Annotation>> HttpAnnotator::Annotate(std::span<const std::string> texts) {
  CountCall();
  json body;
  body["texts"] = json(std::vector<std::string>(texts.begin(), texts.end()));
  AddModel(body, spec_);
  json resp = client_.Post("/v1/annotate", body);
  std::vector<std::vector<Annotation>> out;
  try {
    for (const auto& row : resp.at("annotations")) {
      std::vector<Annotation> r;
      for (const auto& a : row) {
        r.push_back({a.at("text").get<std::string>(), a.at("pos").get<std::string>(),
                     a.at("lemma").get<std::string>()});
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("annotate: malformed response: ") + e.what());
  }
  return out;
}

double HttpItm::Score(const EmbedInput& asset, const std::string& caption) {
  CountCall();
  json body = {{"asset", asset.value}, {"caption", caption}};
  AddModel(body, spec_);
  json resp = client_.Post("/v1/itm", body);
  try {
    return resp.at("score").get<double>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("itm: malformed response: ") + e.what());
  }
}

json OpenAiGenerator::BuildRequest(const std::string& model, const std::string& prompt, size_t n,
                                   const SamplingParams& params) {
  return {{"model", model},
          {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
          {"n", n},
          {"top_p", params.top_p},
          {"temperature", params.temperature},
          {"seed", params.seed},
          {"max_tokens", params.max_tokens}};
}

std::vector<std::string> OpenAiGenerator::Generate(const std::string& prompt, size_t n,
                                                   const SamplingParams& params) {
  if (n == 0) throw ProviderError("generate: n must be >= 1");
  CountCall();
  json resp = client_.Post("/v1/chat/completions", BuildRequest(spec_.model_id, prompt, n, params));
  std::vector<std::string> out;
  try {
    for (const auto& choice : resp.at("choices")) {
      out.push_back(choice.at("message").at("content").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("generate: malformed response: ") + e.what());
  }
  if (out.size() < n) {
    throw ProviderError("generate: requested " + std::to_string(n) + " completions, got " +
                        std::to_string(out.size()));
  }
  out.resize(n);
  return out;
}

std::vector<std::string> BridgeGenerator::Generate(const std::string& prompt, size_t n,
                                                   const SamplingParams& params) {
  if (n == 0) throw ProviderError("generate: n must be >= 1");
  CountCall();
  json body = {{"prompt", prompt},
               {"n", n},
               {"top_p", params.top_p},
               {"temperature", params.temperature},
               {"seed", params.seed}};
  AddModel(body, spec_);
  json resp = client_.Post("/v1/generate", body);
  std::vector<std::string> out;
  try {
    out = resp.at("completions").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("generate: malformed response: ") + e.what());
  }
  if (out.size() < n) {
    throw ProviderError("generate: requested " + std::to_string(n) + " completions, got " +
                        std::to_string(out.size()));
  }
  out.resize(n);
  return out;
}

}  // namespace mac
