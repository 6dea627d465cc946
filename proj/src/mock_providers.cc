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

#include "mac/mock_providers.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_map>

#include "mac/errors.h"
#include "mac/hashing.h"
#include "mac/rng.h"

namespace mac {
namespace {

void Normalize(Embedding& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= norm;
}

const std::unordered_map<std::string, Annotation>& Lexicon() {
  static const auto* lexicon = [] {
    auto* m = new std::unordered_map<std::string, Annotation>();
    auto add = [&](std::initializer_list<const char*> words, const char* pos) {
      for (const char* w : words) (*m)[w] = {w, pos, w};
    };
    add({"a", "an", "the", "this", "that", "these", "those", "some", "each", "every"}, "DET");
    add({"on", "in", "at", "of", "with", "under", "near", "behind", "beside", "above", "below",
         "into", "onto", "from", "by", "over", "across", "through", "inside", "outside",
         "without", "for", "to", "next", "against", "along", "around"},
        "ADP");
    add({"and", "or", "but"}, "CCONJ");
    add({"while", "as", "because", "if"}, "SCONJ");
    add({"he", "she", "it", "they", "we", "i", "you", "him", "her", "them"}, "PRON");
    add({"his", "its", "their", "our", "my", "your"}, "PRON");
    add({"not", "no", "very", "too", "also", "up", "down", "together", "there", "here"},
        "ADV");
    add({"one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
         "several", "many"},
        "NUM");
    add({"red", "blue", "green", "yellow", "black", "white", "brown", "pink", "purple",
         "orange", "gray", "grey", "small", "large", "big", "little", "old", "young", "new",
         "wooden", "tall", "short", "bright", "dark", "striped", "vintage", "empty", "busy",
         "happy", "sad", "clean", "dirty", "open", "closed", "shiny", "fluffy", "metal"},
        "ADJ");
    add({"man", "woman", "child", "boy", "girl", "person", "dog", "cat", "horse", "bird", "car",
         "bus", "bike", "bicycle", "table", "chair", "bed", "baby", "street", "beach", "kitchen",
         "field", "tree", "ball", "phone", "cake", "elephant", "boat", "grass", "water", "hat",
         "umbrella", "keys", "email", "computer", "laptop", "room", "road", "train", "plate",
         "pizza", "window", "door", "sky", "snow", "wall", "apple", "grape", "glass"},
        "NOUN");
    add({"sit", "stand", "run", "walk", "hold", "eat", "ride", "play", "look", "jump", "type",
         "reach", "watch", "throw", "catch", "carry", "fly", "swim", "read", "cut"},
        "VERB");
    add({"is", "are", "was", "were", "be", "been", "being", "am"}, "AUX");
    (*m)["is"].lemma = "be";
    (*m)["are"].lemma = "be";
    (*m)["was"].lemma = "be";
    (*m)["were"].lemma = "be";
    (*m)["am"].lemma = "be";
    (*m)["men"] = {"men", "NOUN", "man"};
    (*m)["women"] = {"women", "NOUN", "woman"};
    (*m)["children"] = {"children", "NOUN", "child"};
    (*m)["people"] = {"people", "NOUN", "person"};
    (*m)["has"] = {"has", "VERB", "have"};
    (*m)["have"] = {"have", "VERB", "have"};
    return m;
  }();
  return *lexicon;
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool IsVowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::string Undouble(std::string stem) {
  if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2] && !IsVowel(stem.back()) &&
      stem.back() != 's' && stem.back() != 'l') {
    stem.pop_back();
  }
  return stem;
}

// Word pools the mock generator draws replacements from; all are in the
// annotator lexicon so the POS of every generated word is known.
const std::vector<std::string> kNouns = {"man",   "woman", "child", "dog",      "cat",   "horse",
                                         "bird",  "car",   "bus",   "bike",     "table", "chair",
                                         "bed",   "baby",  "tree",  "ball",     "phone", "cake",
                                         "boat",  "grass", "hat",   "umbrella", "plate", "window"};
const std::vector<std::string> kAdjectives = {"red",    "blue",   "green",  "yellow", "black",
                                              "white",  "small",  "large",  "old",    "young",
                                              "wooden", "tall",   "bright", "dark",   "striped",
                                              "vintage", "shiny", "fluffy"};
const std::vector<std::string> kRelations = {"on", "under", "near", "behind", "beside", "above",
                                             "holding", "riding", "watching", "carrying"};

const std::string& Pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.UniformIndex(pool.size())];
}

std::string Sentence(const Tokens& tokens) {
  std::string s = JoinTokens(tokens);
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s + ".";
}

std::vector<size_t> PositionsWithPos(const Tokens& tokens, std::string_view pos) {
  std::vector<size_t> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (MockAnnotateWord(tokens[i]).pos == pos) out.push_back(i);
  }
  return out;
}

size_t PickPosition(const Tokens& tokens, std::string_view pos, Rng& rng) {
  auto positions = PositionsWithPos(tokens, pos);
  if (positions.empty()) return rng.UniformIndex(tokens.size());
  return positions[rng.UniformIndex(positions.size())];
}

}  // namespace

Embedding MockTokenVector(std::string_view token, uint64_t seed, size_t dim) {
  Embedding v(dim);
  uint64_t state = Fnv1a64(token) ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (size_t k = 0; k < dim; ++k) {
    uint64_t x = SplitMix64(state);
    v[k] = static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
  }
  Normalize(v);
  return v;
}

Embedding MockBagEmbedding(const Tokens& tokens, uint64_t seed, size_t dim) {
  Embedding sum(dim, 0.0);
  for (const auto& t : tokens) {
    Embedding v = MockTokenVector(t, seed, dim);
    for (size_t k = 0; k < dim; ++k) sum[k] += v[k];
  }
  Normalize(sum);
  return sum;
}

Tokens MockAssetTokens(std::string_view asset_ref) {
  std::string stem = std::filesystem::path(std::string(asset_ref)).stem().string();
  std::replace(stem.begin(), stem.end(), '_', ' ');
  std::replace(stem.begin(), stem.end(), '-', ' ');
  return Tokenize(stem);
}

std::vector<Embedding> MockEmbedder::Embed(std::span<const EmbedInput> inputs) {
  CountCall();
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    const Tokens tokens =
        in.kind == EmbedInput::Kind::kText ? Tokenize(in.value) : MockAssetTokens(in.value);
    out.push_back(MockBagEmbedding(tokens, seed_, dim_));
  }
  return out;
}

std::string MockEmbedder::Identity() const {
  return "mock-embed:seed=" + std::to_string(seed_) + ":dim=" + std::to_string(dim_);
}

double MockOverlapEntailment(std::string_view premise, std::string_view hypothesis) {
  Tokens p = Tokenize(premise);
  Tokens h = Tokenize(hypothesis);
  std::set<std::string> ps(p.begin(), p.end());
  std::set<std::string> hs(h.begin(), h.end());
  if (hs.empty()) return 1.0;
  size_t common = 0;
  for (const auto& t : hs) common += ps.count(t);
  return static_cast<double>(common) / static_cast<double>(hs.size());
}

std::vector<std::vector<double>> MockNli::Entailment(std::span<const NliPair> pairs) {
  CountCall();
  std::vector<std::vector<double>> out;
  out.reserve(pairs.size());
  for (const auto& pr : pairs) {
    out.emplace_back(models_, MockOverlapEntailment(pr.premise, pr.hypothesis));
  }
  return out;
}

std::string MockNli::Identity() const {
  return "mock-nli:seed=" + std::to_string(seed_) + ":models=" + std::to_string(models_);
}

Annotation MockAnnotateWord(const std::string& word) {
  const auto& lex = Lexicon();
  if (auto it = lex.find(word); it != lex.end()) {
    Annotation a = it->second;
    a.text = word;
    return a;
  }
  if (!word.empty() && std::all_of(word.begin(), word.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return {word, "NUM", word};
  }
  if (word.size() > 4 && EndsWith(word, "ing")) {
    return {word, "VERB", Undouble(word.substr(0, word.size() - 3))};
  }
  if (word.size() > 4 && EndsWith(word, "ed")) {
    return {word, "VERB", Undouble(word.substr(0, word.size() - 2))};
  }
  if (word.size() > 4 && EndsWith(word, "ly")) return {word, "ADV", word};
  if (word.size() > 4 && EndsWith(word, "ies")) {
    return {word, "NOUN", word.substr(0, word.size() - 3) + "y"};
  }
  if (word.size() > 3 && EndsWith(word, "s") && !EndsWith(word, "ss")) {
    return {word, "NOUN", word.substr(0, word.size() - 1)};
  }
  return {word, "NOUN", word};
}

std::vector<std::vector<Annotation>> MockAnnotator::Annotate(std::span<const std::string> texts) {
  CountCall();
  std::vector<std::vector<Annotation>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<Annotation> row;
    for (const auto& tok : Tokenize(text)) row.push_back(MockAnnotateWord(tok));
    out.push_back(std::move(row));
  }
  return out;
}

std::string ExtractGivenCaption(const std::string& prompt) {
  size_t marker = prompt.find("[Given Caption]");
  size_t pos = marker == std::string::npos ? 0 : marker;
  while (pos < prompt.size()) {
    size_t eol = prompt.find('\n', pos);
    if (eol == std::string::npos) eol = prompt.size();
    std::string_view line(prompt.data() + pos, eol - pos);
    if (line.starts_with("- ")) return std::string(line.substr(2));
    pos = eol + 1;
  }
  return "";
}

// The N of "Make fewer than N word-level changes"; 2 when absent.
size_t EditLimitFromPrompt(const std::string& prompt) {
  static constexpr std::string_view kMarker = "fewer than ";
  const size_t at = prompt.find(kMarker);
  if (at == std::string::npos) return 2;
  size_t value = 0;
  bool digits = false;
  for (size_t i = at + kMarker.size(); i < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[i])); ++i) {
    value = value * 10 + static_cast<size_t>(prompt[i] - '0');
    digits = true;
  }
  return digits ? value : 2;
}

std::string MockGenerator::GenerateOne(const std::string& prompt, size_t index,
                                       uint64_t request_seed) const {
  Rng rng(DeriveSeed(seed_ ^ Fnv1a64(model_id_) ^ request_seed, prompt, index));
  Tokens tokens = Tokenize(ExtractGivenCaption(prompt));
  if (tokens.empty()) tokens = {"something"};

  // Cumulative weights over the perturbation table.
  enum Perturbation {
    kSubNoun, kSubAdj, kInsertAdj, kSubRelation, kSwap, kAddPhrase,
    kDelete, kSubTwo, kNegation, kRewrite, kBadFormat, kEcho, kSubMany
  };
  static constexpr int kWeights[] = {18, 8, 10, 8, 10, 8, 5, 8, 8, 7, 5, 5, 16};
  int total = 0;
  for (int w : kWeights) total += w;
  int draw = static_cast<int>(rng.UniformIndex(static_cast<size_t>(total)));
  int kind = 0;
  while (draw >= kWeights[kind]) draw -= kWeights[kind++];

  Tokens out = tokens;
  switch (static_cast<Perturbation>(kind)) {
    case kSubNoun:
      out[PickPosition(out, "NOUN", rng)] = Pick(kNouns, rng);
      break;
    case kSubAdj:
      out[PickPosition(out, "ADJ", rng)] = Pick(kAdjectives, rng);
      break;
    case kInsertAdj: {
      size_t at = PickPosition(out, "NOUN", rng);
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), Pick(kAdjectives, rng));
      break;
    }
    case kSubRelation: {
      auto adps = PositionsWithPos(out, "ADP");
      auto verbs = PositionsWithPos(out, "VERB");
      adps.insert(adps.end(), verbs.begin(), verbs.end());
      size_t at = adps.empty() ? rng.UniformIndex(out.size()) : adps[rng.UniformIndex(adps.size())];
      out[at] = Pick(kRelations, rng);
      break;
    }
    case kSwap: {
      auto nouns = PositionsWithPos(out, "NOUN");
      if (nouns.size() >= 2) {
        size_t a = rng.UniformIndex(nouns.size());
        size_t b = rng.UniformIndex(nouns.size() - 1);
        if (b >= a) ++b;
        std::swap(out[nouns[a]], out[nouns[b]]);
      } else if (out.size() >= 2) {
        size_t a = rng.UniformIndex(out.size());
        size_t b = rng.UniformIndex(out.size() - 1);
        if (b >= a) ++b;
        std::swap(out[a], out[b]);
      }
      break;
    }
    case kAddPhrase:
      out.push_back("with");
      out.push_back("a");
      out.push_back(Pick(kNouns, rng));
      break;
    case kDelete:
      if (out.size() > 1) out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.UniformIndex(out.size())));
      break;
    case kSubTwo:
      out[PickPosition(out, "NOUN", rng)] = Pick(kNouns, rng);
      out[PickPosition(out, "ADJ", rng)] = Pick(kAdjectives, rng);
      break;
    case kNegation:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(std::min<size_t>(out.size(), 2)), "not");
      break;
    case kRewrite: {
      out.clear();
      size_t len = 10 + rng.UniformIndex(4);
      for (size_t i = 0; i < len; ++i) {
        out.push_back(i % 2 == 0 ? Pick(kAdjectives, rng) : Pick(kNouns, rng));
      }
      break;
    }
    case kBadFormat:
      return "Here is a new caption: " + Sentence(out);
    case kEcho:
      break;
    case kSubMany: {
      // Uses the whole edit allowance stated in the prompt on content words.
      std::vector<size_t> content;
      for (size_t i = 0; i < out.size(); ++i) {
        const std::string pos = MockAnnotateWord(out[i]).pos;
        if (pos == "NOUN" || pos == "ADJ" || pos == "VERB" || pos == "ADP" || pos == "NUM") content.push_back(i);
      }
      for (size_t i = content.size(); i > 1; --i) std::swap(content[i - 1], content[rng.UniformIndex(i)]);
      const size_t limit = EditLimitFromPrompt(prompt);
      const size_t edits = std::min(content.size(), limit > 1 ? limit - 1 : 1);
      for (size_t e = 0; e < edits; ++e) {
        const size_t at = content[e];
        const std::string pos = MockAnnotateWord(out[at]).pos;
        out[at] = pos == "ADJ"                    ? Pick(kAdjectives, rng)
                  : pos == "VERB" || pos == "ADP" ? Pick(kRelations, rng)
                                                  : Pick(kNouns, rng);
      }
      break;
    }
  }
  return "Generated Caption: " + Sentence(out);
}

std::vector<std::string> MockGenerator::Generate(const std::string& prompt, size_t n,
                                                 const SamplingParams& params) {
  if (n == 0) throw ProviderError("generate: n must be >= 1");
  CountCall();
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) out.push_back(GenerateOne(prompt, k, params.seed));
  return out;
}

std::string MockGenerator::Identity() const {
  return "mock-gen:seed=" + std::to_string(seed_) + ":model=" + model_id_;
}

double MockItm::Score(const EmbedInput& asset, const std::string& caption) {
  CountCall();
  std::vector<EmbedInput> inputs = {asset, EmbedInput::Text(caption)};
  auto v = embedder_.Embed(inputs);
  return ItmScoreFromLogits(5.0 * Cosine(v[0], v[1]), 0.0);
}

std::string MockItm::Identity() const { return "mock-itm:seed=" + std::to_string(seed_); }

}  // namespace mac
