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

// Deterministic in-process backends. Each is a pure function of (seed, input)
// so offline campaigns are reproducible across processes and machines. The
// model bridge's mock mode implements the same formulas; the fixtures under
// tests/fixtures/bridge pin them.

#pragma once

#include <string>
#include <string_view>

#include "mac/providers.h"
#include "mac/tokenizer.h"

namespace mac {

// Unit vector for one token. Component k is the k-th SplitMix64 output of
// the state `Fnv1a64(token) ^ (seed * 0x9e3779b97f4a7c15)`, mapped to
// [-1, 1) as (x >> 11) * 2^-52 - 1; the vector is then L2-normalized.
Embedding MockTokenVector(std::string_view token, uint64_t seed, size_t dim);

// Bag-of-words embedding: L2-normalized sum of MockTokenVector over the token
// multiset. An empty token list maps to the first basis vector.
Embedding MockBagEmbedding(const Tokens& tokens, uint64_t seed, size_t dim);

// Tokens the mock "sees" in an asset: the file stem of the locator with
// '_' and '-' read as spaces, so "coco/0001_dog_on_grass.jpg" reads as
// {"0001", "dog", "on", "grass"}.
Tokens MockAssetTokens(std::string_view asset_ref);

class MockEmbedder : public EmbeddingProvider {
 public:
  MockEmbedder(uint64_t seed, size_t dim = 64) : seed_(seed), dim_(dim) {}
  std::vector<Embedding> Embed(std::span<const EmbedInput> inputs) override;
  std::string Identity() const override;

 private:
  uint64_t seed_;
  size_t dim_;
};

// Containment NLI: score = |set(premise) ∩ set(hypothesis)| / |set(hypothesis)|
// over Tokenize() word sets, identical for each of `models` models. An empty
// hypothesis scores 1. Asymmetric by construction.
double MockOverlapEntailment(std::string_view premise, std::string_view hypothesis);

class MockNli : public NliProvider {
 public:
  MockNli(uint64_t seed, size_t models = 3) : seed_(seed), models_(models) {}
  std::vector<std::vector<double>> Entailment(std::span<const NliPair> pairs) override;
  size_t ModelCount() const override { return models_; }
  std::string Identity() const override;

 private:
  uint64_t seed_;
  size_t models_;
};

// Lexicon + suffix-rule tagger. Lookup order:
//   1. closed lexicon (function words, irregular forms, common content words)
//   2. all digits              -> NUM,  lemma unchanged
//   3. "-ing" (length > 4)     -> VERB, strip "ing", undouble final consonant
//   4. "-ed"  (length > 4)     -> VERB, strip "ed",  undouble final consonant
//   5. "-ly"  (length > 4)     -> ADV,  lemma unchanged
//   6. "-ies" (length > 4)     -> NOUN, "-ies" -> "-y"
//   7. "-s", not "-ss" (len>3) -> NOUN, strip "s"
//   8. otherwise               -> NOUN, lemma unchanged
Annotation MockAnnotateWord(const std::string& word);

class MockAnnotator : public AnnotationProvider {
 public:
  std::vector<std::vector<Annotation>> Annotate(std::span<const std::string> texts) override;
  std::string Identity() const override { return "mock-annotator:v1"; }
};

// Seeded caption perturber standing in for an LLM. Completion k of a request
// depends only on (seed, model_id, request seed, prompt, k), so a budget-8 request
// contains the budget-4 request as its prefix. The caption is read from the
// "- " line under "[Given Caption]"; one perturbation is drawn from a fixed
// weighted table (noun/adjective/relation substitution, token swap, phrase
// insertion, deletion, negation, full rewrite, format violation, echo, and
// substitution of as many content words as the prompt's edit limit allows).
class MockGenerator : public GenerationProvider {
 public:
  MockGenerator(uint64_t seed, std::string model_id = "mock")
      : seed_(seed), model_id_(std::move(model_id)) {}
  std::vector<std::string> Generate(const std::string& prompt, size_t n,
                                    const SamplingParams& params) override;
  std::string Identity() const override;

  std::string GenerateOne(const std::string& prompt, size_t index, uint64_t request_seed) const;

 private:
  uint64_t seed_;
  std::string model_id_;
};

// Yes/no judge over the mock embedding: yes logit = 5 * cosine(asset, caption),
// no logit = 0.
class MockItm : public ItmProvider {
 public:
  MockItm(uint64_t seed, size_t dim = 64) : embedder_(seed, dim), seed_(seed) {}
  double Score(const EmbedInput& asset, const std::string& caption) override;
  std::string Identity() const override;

 private:
  MockEmbedder embedder_;
  uint64_t seed_;
};

// N from "Make fewer than N word-level changes"; 2 when the prompt has none.
size_t EditLimitFromPrompt(const std::string& prompt);

// Extracts the caption line of a rendered prompt ("" when absent).
std::string ExtractGivenCaption(const std::string& prompt);

}  // namespace mac
