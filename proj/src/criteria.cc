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

#include "mac/criteria.h"

#include <algorithm>
#include <stdexcept>

#include "mac/errors.h"
#include "mac/tokenizer.h"

namespace mac {

using nlohmann::json;

std::string_view ToString(OpKind k) {
  switch (k) {
    case OpKind::kReplaceObject: return "replace-object";
    case OpKind::kReplaceAttribute: return "replace-attribute";
    case OpKind::kReplaceRelation: return "replace-relation";
    case OpKind::kReplaceCount: return "replace-count";
    case OpKind::kAddObject: return "add-object";
    case OpKind::kAddAttribute: return "add-attribute";
    case OpKind::kSwapObject: return "swap-object";
    case OpKind::kSwapAttribute: return "swap-attribute";
  }
  return "replace-object";
}

OpKind ParseOpKind(std::string_view s) {
  for (OpKind k : kAllOpKinds) {
    if (ToString(k) == s) return k;
  }
  throw ConfigError("unknown operation kind '" + std::string(s) + "'");
}

std::string_view ToString(NliDirection d) {
  return d == NliDirection::kGeneratedAsPremise ? "generated_as_premise" : "original_as_premise";
}

NliDirection ParseNliDirection(std::string_view s) {
  if (s == "generated_as_premise") return NliDirection::kGeneratedAsPremise;
  if (s == "original_as_premise") return NliDirection::kOriginalAsPremise;
  throw ConfigError("unknown nli_direction '" + std::string(s) + "'");
}

void CriteriaConfig::Validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
}

bool CriteriaConfig::OpRuleEnabled(OpKind k) const {
  auto it = op_rules.find(k);
  return it == op_rules.end() || it->second;
}

CriteriaConfig CriteriaConfig::FromJson(const json& j) {
  CriteriaConfig c;
  if (j.is_null()) return c;
  c.tau = j.value("tau", c.tau);
  if (j.contains("negation_blacklist")) {
    c.negation_blacklist = j.at("negation_blacklist").get<std::set<std::string>>();
  }
  c.match_contractions = j.value("match_contractions", c.match_contractions);
  if (j.contains("prompt_op") && !j.at("prompt_op").is_null()) {
    c.prompt_op = ParseOpKind(j.at("prompt_op").get<std::string>());
  }
  if (j.contains("nli_direction")) {
    c.nli_direction = ParseNliDirection(j.at("nli_direction").get<std::string>());
  }
  if (j.contains("op_rules")) {
    for (auto it = j.at("op_rules").begin(); it != j.at("op_rules").end(); ++it) {
      c.op_rules[ParseOpKind(it.key())] = it.value().get<bool>();
    }
  }
  c.check_pos = j.value("check_pos", c.check_pos);
  c.Validate();
  return c;
}

json CriteriaConfig::ToJson() const {
  json j;
  j["tau"] = tau;
  j["negation_blacklist"] = negation_blacklist;
  j["match_contractions"] = match_contractions;
  j["prompt_op"] = prompt_op ? json(ToString(*prompt_op)) : json(nullptr);
  j["nli_direction"] = ToString(nli_direction);
  json rules = json::object();
  for (const auto& [k, v] : op_rules) rules[std::string(ToString(k))] = v;
  j["op_rules"] = rules;
  j["check_pos"] = check_pos;
  return j;
}

json ToJson(const CriteriaVerdict& v) {
  return {{"crossmodal", v.crossmodal},       {"unimodal", v.unimodal},
          {"distance", v.distance},           {"auxiliary", v.auxiliary},
          {"total", v.total},                 {"sim_original", v.sim_original},
          {"sim_candidate", v.sim_candidate}, {"nli_scores", v.nli_scores},
          {"edit_distance", v.edit_distance}, {"aux_failures", v.aux_failures}};
}

CriteriaVerdict VerdictFromJson(const json& j) {
  CriteriaVerdict v;
  v.crossmodal = j.at("crossmodal").get<bool>();
  v.unimodal = j.at("unimodal").get<bool>();
  v.distance = j.at("distance").get<bool>();
  v.auxiliary = j.at("auxiliary").get<bool>();
  v.total = j.at("total").get<bool>();
  v.sim_original = j.at("sim_original").get<double>();
  v.sim_candidate = j.at("sim_candidate").get<double>();
  v.nli_scores = j.at("nli_scores").get<std::vector<double>>();
  v.edit_distance = j.at("edit_distance").get<size_t>();
  v.aux_failures = j.at("aux_failures").get<std::vector<std::string>>();
  if (v.total != (v.crossmodal && v.unimodal && v.distance && v.auxiliary)) {
    throw std::invalid_argument("verdict total is not the conjunction of its criteria");
  }
  return v;
}

std::vector<double> EmbeddingScorer::Score(const DataPair& pair,
                                           std::span<const std::string> captions) {
  std::vector<EmbedInput> inputs;
  inputs.reserve(captions.size() + 1);
  inputs.push_back(EmbedInput::Asset(pair.modality, pair.asset_ref));
  for (const auto& c : captions) inputs.push_back(EmbedInput::Text(c));
  std::vector<Embedding> vectors = embedder_.Embed(inputs);
  if (vectors.size() != inputs.size()) throw ProviderError("embed: vector count mismatch");
  std::vector<double> out;
  out.reserve(captions.size());
  for (size_t i = 1; i < vectors.size(); ++i) out.push_back(Cosine(vectors[0], vectors[i]));
  return out;
}

std::vector<double> ItmScorer::Score(const DataPair& pair, std::span<const std::string> captions) {
  std::vector<double> out;
  out.reserve(captions.size());
  const EmbedInput asset = EmbedInput::Asset(pair.modality, pair.asset_ref);
  for (const auto& c : captions) out.push_back(itm_.Score(asset, c));
  return out;
}

CrossmodalResult EvalCrossmodal(const DataPair& pair, const std::string& candidate,
                                CrossmodalScorer& scorer) {
  std::vector<std::string> captions = {pair.caption, candidate};
  std::vector<double> scores;
  try {
    scores = scorer.Score(pair, captions);
  } catch (const ProviderError& e) {
    throw ProviderError("pair " + pair.id + ": " + e.what());
  }
  if (scores.size() != 2) throw ProviderError("pair " + pair.id + ": scorer returned wrong count");
  return {scores[1] > scores[0], scores[0], scores[1]};
}

CrossmodalResult EvalCrossmodal(const DataPair& pair, const std::string& candidate,
                                EmbeddingProvider& embedder) {
  EmbeddingScorer scorer(embedder);
  return EvalCrossmodal(pair, candidate, scorer);
}

bool UnimodalSuccess(std::span<const double> scores, double tau) {
  if (scores.empty()) return false;
  return std::all_of(scores.begin(), scores.end(), [tau](double s) { return s < tau; });
}

UnimodalResult EvalUnimodal(const std::string& original, const std::string& candidate,
                            NliProvider& nli, const CriteriaConfig& cfg) {
  NliPair pair = cfg.nli_direction == NliDirection::kGeneratedAsPremise
                     ? NliPair{candidate, original}
                     : NliPair{original, candidate};
  auto rows = nli.Entailment(std::span<const NliPair>(&pair, 1));
  const size_t models = nli.ModelCount();
  if (rows.size() != 1 || models == 0 || rows[0].size() != models) {
    throw ProviderError("nli: partial response (expected " + std::to_string(models) +
                        " model scores)");
  }
  for (double s : rows[0]) {
    if (!(s >= 0.0 && s <= 1.0)) throw ProviderError("nli: score outside [0, 1]");
  }
  UnimodalResult r;
  r.scores = std::move(rows[0]);
  r.success = UnimodalSuccess(r.scores, cfg.tau);
  return r;
}

DistanceResult EvalDistance(std::string_view original, std::string_view candidate, double l_d) {
  if (!(l_d > 0.0)) throw std::invalid_argument("l_d must be positive");
  const size_t d = EditDistance(Tokenize(original), Tokenize(candidate));
  return {static_cast<double>(d) < l_d / 2.0, d};
}

ParsedOutput ParseGeneratedCaption(std::string_view raw) {
  ParsedOutput out;
  size_t matches = 0;
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    std::string_view line = raw.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with(kCaptionPrefix)) {
      ++matches;
      std::string_view payload = line.substr(kCaptionPrefix.size());
      size_t b = payload.find_first_not_of(" \t");
      size_t e = payload.find_last_not_of(" \t");
      out.payload = b == std::string_view::npos ? "" : std::string(payload.substr(b, e - b + 1));
    }
    if (eol == raw.size()) break;
    pos = eol + 1;
  }
  out.ok = matches == 1 && !out.payload.empty();
  if (!out.ok) out.payload.clear();
  return out;
}

namespace {

bool PosIn(const std::string& pos, std::span<const std::string_view> classes) {
  return std::any_of(classes.begin(), classes.end(), [&](std::string_view c) { return pos == c; });
}

// Universal POS classes an operation may touch.
std::span<const std::string_view> PosClass(OpKind op) {
  static constexpr std::string_view kNoun[] = {"NOUN"};
  static constexpr std::string_view kAdj[] = {"ADJ"};
  static constexpr std::string_view kRelation[] = {"VERB", "ADP"};
  static constexpr std::string_view kNum[] = {"NUM"};
  switch (op) {
    case OpKind::kReplaceObject:
    case OpKind::kAddObject:
    case OpKind::kSwapObject:
      return kNoun;
    case OpKind::kReplaceAttribute:
    case OpKind::kAddAttribute:
    case OpKind::kSwapAttribute:
      return kAdj;
    case OpKind::kReplaceRelation:
      return kRelation;
    case OpKind::kReplaceCount:
      return kNum;
  }
  return {};
}

}  // namespace

bool OpCompliant(OpKind op, const EditScript& script, const PairAnnotations* ann) {
  const auto& ops = script.ops;
  auto orig_pos = [&](size_t i) -> const std::string& { return ann->original.at(i).pos; };
  auto cand_pos = [&](size_t i) -> const std::string& { return ann->candidate.at(i).pos; };
  switch (op) {
    case OpKind::kSwapObject:
    case OpKind::kSwapAttribute: {
      if (ops.size() != 2) return false;
      const auto& a = ops[0];
      const auto& b = ops[1];
      if (a.kind != EditKind::kSubstitute || b.kind != EditKind::kSubstitute) return false;
      if (*a.old_word != *b.new_word || *a.new_word != *b.old_word) return false;
      if (ann) {
        auto cls = PosClass(op);
        if (!PosIn(orig_pos(a.position), cls) || !PosIn(orig_pos(b.position), cls)) return false;
        if (!PosIn(cand_pos(a.target_position), cls) || !PosIn(cand_pos(b.target_position), cls)) {
          return false;
        }
      }
      return true;
    }
    case OpKind::kReplaceObject:
    case OpKind::kReplaceAttribute:
    case OpKind::kReplaceRelation:
    case OpKind::kReplaceCount: {
      if (ops.size() != 1 || ops[0].kind != EditKind::kSubstitute) return false;
      if (ann) {
        auto cls = PosClass(op);
        if (!PosIn(orig_pos(ops[0].position), cls)) return false;
        if (!PosIn(cand_pos(ops[0].target_position), cls)) return false;
      }
      return true;
    }
    case OpKind::kAddObject:
    case OpKind::kAddAttribute: {
      if (ops.empty()) return false;
      for (const auto& o : ops) {
        if (o.kind != EditKind::kInsert) return false;
      }
      if (!ann) return true;
      auto cls = PosClass(op);
      return std::any_of(ops.begin(), ops.end(),
                         [&](const EditOp& o) { return PosIn(cand_pos(o.target_position), cls); });
    }
  }
  return false;
}

AuxiliaryResult EvalAuxiliary(const std::string& original, std::string_view candidate_raw,
                              const CriteriaConfig& cfg, const PairAnnotations* annotations) {
  AuxiliaryResult r;
  ParsedOutput parsed = ParseGeneratedCaption(candidate_raw);
  if (!parsed.ok) {
    r.failures.emplace_back(kRuleFormatParse);
    return r;
  }
  const Tokens cand = Tokenize(parsed.payload);
  const Tokens orig = Tokenize(original);
  for (const auto& t : cand) {
    bool hit = cfg.negation_blacklist.count(t) > 0;
    if (!hit && cfg.match_contractions) hit = t.size() > 3 && t.ends_with("n't");
    if (hit) {
      r.failures.emplace_back(kRuleNegationBlacklist);
      break;
    }
  }
  if (cand == orig) r.failures.emplace_back(kRuleIdentical);
  if (cfg.prompt_op && cfg.OpRuleEnabled(*cfg.prompt_op)) {
    const PairAnnotations* ann = cfg.check_pos ? annotations : nullptr;
    if (ann && (ann->original.size() != orig.size() || ann->candidate.size() != cand.size())) {
      throw std::invalid_argument("annotations do not cover the caption tokens");
    }
    if (!OpCompliant(*cfg.prompt_op, Align(orig, cand), ann)) {
      r.failures.emplace_back(kRuleOpCompliance);
    }
  }
  r.success = r.failures.empty();
  return r;
}

json ToJson(const AsrReport& r) {
  return {{"cross", r.cross}, {"uni", r.uni},     {"dist", r.dist},
          {"aux", r.aux},     {"total", r.total}, {"samples", r.samples}};
}

AsrReport AggregateAsr(std::span<const CriteriaVerdict> verdicts) {
  if (verdicts.empty()) throw std::invalid_argument("AggregateAsr: no verdicts");
  size_t c = 0, u = 0, d = 0, a = 0, t = 0;
  for (const auto& v : verdicts) {
    c += v.crossmodal;
    u += v.unimodal;
    d += v.distance;
    a += v.auxiliary;
    t += v.crossmodal && v.unimodal && v.distance && v.auxiliary;
  }
  const double n = static_cast<double>(verdicts.size());
  return {c / n, u / n, d / n, a / n, t / n, verdicts.size()};
}

}  // namespace mac
