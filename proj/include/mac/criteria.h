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

// Sample-wise attack criteria. A candidate caption succeeds against a pair
// only if all four hold:
//   crossmodal  sim(asset, candidate) > sim(asset, original), strictly
//   unimodal    every NLI model's entailment probability < tau
//   distance    word edit distance < l_d / 2, strictly
//   auxiliary   output format, negation blacklist, and (for specific
//               prompts) operation compliance

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mac/corpus.h"
#include "mac/edit_script.h"
#include "mac/providers.h"

namespace mac {

// Specific-prompt operations.
enum class OpKind {
  kReplaceObject,
  kReplaceAttribute,
  kReplaceRelation,
  kReplaceCount,
  kAddObject,
  kAddAttribute,
  kSwapObject,
  kSwapAttribute,
};

inline constexpr OpKind kAllOpKinds[] = {
    OpKind::kReplaceObject, OpKind::kReplaceAttribute, OpKind::kReplaceRelation,
    OpKind::kReplaceCount,  OpKind::kAddObject,        OpKind::kAddAttribute,
    OpKind::kSwapObject,    OpKind::kSwapAttribute};

std::string_view ToString(OpKind k);  // "replace-object", ...
OpKind ParseOpKind(std::string_view s);

enum class NliDirection { kGeneratedAsPremise, kOriginalAsPremise };

std::string_view ToString(NliDirection d);
NliDirection ParseNliDirection(std::string_view s);

// Rule identifiers reported in CriteriaVerdict::aux_failures.
inline constexpr std::string_view kRuleFormatParse = "format_parse";
inline constexpr std::string_view kRuleNegationBlacklist = "negation_blacklist";
inline constexpr std::string_view kRuleIdentical = "identical_to_original";
inline constexpr std::string_view kRuleOpCompliance = "op_compliance";

inline constexpr std::string_view kCaptionPrefix = "Generated Caption: ";

struct CriteriaConfig {
  double tau = 0.5;
  std::set<std::string> negation_blacklist = {"no", "not", "empty", "without"};
  // Also treat tokens ending in "n't" as negations.
  bool match_contractions = false;
  // nullopt: general prompt (no operation compliance rule).
  std::optional<OpKind> prompt_op;
  NliDirection nli_direction = NliDirection::kGeneratedAsPremise;
  // Per-operation compliance toggles; an absent entry means enabled.
  std::map<OpKind, bool> op_rules;
  // Check the POS class of edited words when annotations are supplied.
  bool check_pos = true;

  void Validate() const;
  bool OpRuleEnabled(OpKind k) const;

  static CriteriaConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

struct CriteriaVerdict {
  bool crossmodal = false;
  bool unimodal = false;
  bool distance = false;
  bool auxiliary = false;
  bool total = false;
  double sim_original = 0.0;
  double sim_candidate = 0.0;
  std::vector<double> nli_scores;
  size_t edit_distance = 0;
  std::vector<std::string> aux_failures;

  void UpdateTotal() { total = crossmodal && unimodal && distance && auxiliary; }
  bool operator==(const CriteriaVerdict&) const = default;
};

nlohmann::json ToJson(const CriteriaVerdict& v);
CriteriaVerdict VerdictFromJson(const nlohmann::json& j);

// Scores captions against a pair's asset; higher means a better match.
class CrossmodalScorer {
 public:
  virtual ~CrossmodalScorer() = default;
  // One score per caption.
  virtual std::vector<double> Score(const DataPair& pair, std::span<const std::string> captions) = 0;
  virtual std::string Identity() const = 0;
};

// Cosine similarity of unit-normalized dual-encoder embeddings.
class EmbeddingScorer : public CrossmodalScorer {
 public:
  explicit EmbeddingScorer(EmbeddingProvider& embedder) : embedder_(embedder) {}
  std::vector<double> Score(const DataPair& pair, std::span<const std::string> captions) override;
  std::string Identity() const override { return embedder_.Identity(); }

 private:
  EmbeddingProvider& embedder_;
};

// Yes/no match probability of a VLM judge.
class ItmScorer : public CrossmodalScorer {
 public:
  explicit ItmScorer(ItmProvider& itm) : itm_(itm) {}
  std::vector<double> Score(const DataPair& pair, std::span<const std::string> captions) override;
  std::string Identity() const override { return itm_.Identity(); }

 private:
  ItmProvider& itm_;
};

struct CrossmodalResult {
  bool success = false;
  double sim_original = 0.0;
  double sim_candidate = 0.0;
};

struct UnimodalResult {
  bool success = false;
  std::vector<double> scores;
};

struct DistanceResult {
  bool success = false;
  size_t edit_distance = 0;
};

struct AuxiliaryResult {
  bool success = false;
  std::vector<std::string> failures;
};

// Provider failures are rethrown as ProviderError prefixed with the pair id.
CrossmodalResult EvalCrossmodal(const DataPair& pair, const std::string& candidate,
                                CrossmodalScorer& scorer);
CrossmodalResult EvalCrossmodal(const DataPair& pair, const std::string& candidate,
                                EmbeddingProvider& embedder);

// Throws ProviderError on a partial response (fewer scores than models).
UnimodalResult EvalUnimodal(const std::string& original, const std::string& candidate,
                            NliProvider& nli, const CriteriaConfig& cfg);
// Decision rule alone, given the per-model scores.
bool UnimodalSuccess(std::span<const double> scores, double tau);

// l_d must be positive.
DistanceResult EvalDistance(std::string_view original, std::string_view candidate, double l_d);

struct ParsedOutput {
  bool ok = false;
  std::string payload;  // trimmed text after the prefix; empty when !ok
};

// Exactly one line must begin with "Generated Caption: " and carry a
// non-empty payload. Other lines are ignored.
ParsedOutput ParseGeneratedCaption(std::string_view raw);

// Annotations of the original caption and of the parsed candidate, aligned
// with Tokenize() of each.
struct PairAnnotations {
  std::vector<Annotation> original;
  std::vector<Annotation> candidate;
};

AuxiliaryResult EvalAuxiliary(const std::string& original, std::string_view candidate_raw,
                              const CriteriaConfig& cfg,
                              const PairAnnotations* annotations = nullptr);

// True when `script` performs `op` (structure, plus POS class when
// annotations are given).
bool OpCompliant(OpKind op, const EditScript& script, const PairAnnotations* annotations);

// Fine-grained attack success rates.
struct AsrReport {
  double cross = 0.0;
  double uni = 0.0;
  double dist = 0.0;
  double aux = 0.0;
  double total = 0.0;  // mean of per-sample conjunctions
  size_t samples = 0;
};

nlohmann::json ToJson(const AsrReport& r);

// Throws std::invalid_argument on empty input.
AsrReport AggregateAsr(std::span<const CriteriaVerdict> verdicts);

}  // namespace mac
