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

#include <algorithm>

#include "doctest.h"
#include "mac/criteria.h"
#include "mac/errors.h"
#include "mac/mock_providers.h"
#include "mac/rng.h"
#include "mac/tokenizer.h"

using namespace mac;

namespace {

// Returns fixed scores for the candidate and the original caption.
class FixedScorer : public CrossmodalScorer {
 public:
  FixedScorer(double original, double candidate) : original_(original), candidate_(candidate) {}
  std::vector<double> Score(const DataPair&, std::span<const std::string> captions) override {
    std::vector<double> out;
    for (size_t i = 0; i < captions.size(); ++i) out.push_back(i == 0 ? original_ : candidate_);
    return out;
  }
  std::string Identity() const override { return "fixed"; }

 private:
  double original_, candidate_;
};

// Records the premise/hypothesis it saw and answers with fixed rows.
class ScriptedNli : public NliProvider {
 public:
  ScriptedNli(std::vector<double> scores, size_t models) : scores_(std::move(scores)), models_(models) {}
  std::vector<std::vector<double>> Entailment(std::span<const NliPair> pairs) override {
    seen.assign(pairs.begin(), pairs.end());
    return std::vector<std::vector<double>>(pairs.size(), scores_);
  }
  size_t ModelCount() const override { return models_; }
  std::string Identity() const override { return "scripted"; }
  std::vector<NliPair> seen;

 private:
  std::vector<double> scores_;
  size_t models_;
};

DataPair Pair(std::string caption, std::string asset = "images/x.jpg") {
  DataPair p;
  p.id = "p";
  p.raw_caption = caption;
  p.caption = caption;
  p.asset_ref = std::move(asset);
  return p;
}

PairAnnotations Annotate(const std::string& original, const std::string& candidate) {
  MockAnnotator ann;
  std::vector<std::string> texts = {original, candidate};
  auto rows = ann.Annotate(texts);
  return {rows[0], rows[1]};
}

std::string Gen(const std::string& caption) { return std::string(kCaptionPrefix) + caption; }

}  // namespace

TEST_CASE("crossmodal requires a strict win") {
  DataPair p = Pair("A dog on a bed.");
  FixedScorer tie(0.4, 0.4), win(0.4, 0.41), lose(0.4, 0.39);
  CHECK_FALSE(EvalCrossmodal(p, "x", tie).success);
  CHECK(EvalCrossmodal(p, "x", win).success);
  CHECK_FALSE(EvalCrossmodal(p, "x", lose).success);
  auto r = EvalCrossmodal(p, "x", win);
  CHECK(r.sim_original == 0.4);
  CHECK(r.sim_candidate == 0.41);
}

TEST_CASE("crossmodal with the mock embedder follows asset tokens") {
  MockEmbedder emb(1);
  DataPair p = Pair("A cat on a sofa.", "images/dog_beach.jpg");
  // Candidate shares words with the asset name, the original shares none.
  CHECK(EvalCrossmodal(p, "A dog on a beach.", emb).success);
  CHECK_FALSE(EvalCrossmodal(p, p.caption, emb).success);
}

TEST_CASE("unimodal decision rule") {
  const double tau = 0.5;
  CHECK(UnimodalSuccess(std::vector<double>{0.1, 0.2, 0.49}, tau));
  CHECK_FALSE(UnimodalSuccess(std::vector<double>{0.1, 0.5, 0.2}, tau));
  CHECK_FALSE(UnimodalSuccess(std::vector<double>{0.9, 0.1, 0.1}, tau));
  CHECK_FALSE(UnimodalSuccess(std::vector<double>{}, tau));
}

TEST_CASE("unimodal success is monotone in tau") {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(3);
    for (auto& x : s) x = rng.UniformUnit();
    double t1 = rng.UniformUnit(), t2 = rng.UniformUnit();
    if (t1 > t2) std::swap(t1, t2);
    if (UnimodalSuccess(s, t1)) CHECK(UnimodalSuccess(s, t2));
    // Oracle: max score below tau.
    CHECK(UnimodalSuccess(s, t2) == (*std::max_element(s.begin(), s.end()) < t2));
  }
}

TEST_CASE("unimodal direction places the candidate as premise by default") {
  ScriptedNli nli({0.1, 0.1, 0.1}, 3);
  CriteriaConfig cfg;
  EvalUnimodal("orig", "cand", nli, cfg);
  REQUIRE(nli.seen.size() == 1);
  CHECK(nli.seen[0].premise == "cand");
  CHECK(nli.seen[0].hypothesis == "orig");
  cfg.nli_direction = NliDirection::kOriginalAsPremise;
  EvalUnimodal("orig", "cand", nli, cfg);
  CHECK(nli.seen[0].premise == "orig");
}

TEST_CASE("unimodal rejects partial responses") {
  ScriptedNli nli({0.1, 0.1}, 3);
  CHECK_THROWS_AS(EvalUnimodal("a", "b", nli, CriteriaConfig{}), ProviderError);
  ScriptedNli bad({0.1, 1.5, 0.1}, 3);
  CHECK_THROWS_AS(EvalUnimodal("a", "b", bad, CriteriaConfig{}), ProviderError);
}

TEST_CASE("mock nli flags entailed paraphrases") {
  MockNli nli(1);
  CriteriaConfig cfg;
  // Candidate contains every word of the original: entailed.
  CHECK_FALSE(EvalUnimodal("A dog on a bed.", "A brown dog on a bed.", nli, cfg).success);
  CHECK(EvalUnimodal("A dog on a bed.", "A cat under the tree.", nli, cfg).success);
}

TEST_CASE("distance threshold is strict") {
  // l_d = 4: threshold 2, so distance 1 passes and 2 fails.
  CHECK(EvalDistance("a b c d", "a b c x", 4.0).success);
  CHECK_FALSE(EvalDistance("a b c d", "a b x y", 4.0).success);
  CHECK(EvalDistance("a b c d", "a b x y", 4.01).success);
  CHECK(EvalDistance("a b c d", "a b x y", 4.0).edit_distance == 2);
  CHECK_THROWS_AS(EvalDistance("a", "b", 0.0), std::invalid_argument);
}

TEST_CASE("parse generated caption") {
  CHECK(ParseGeneratedCaption("Generated Caption: A cat.").payload == "A cat.");
  CHECK(ParseGeneratedCaption("Thinking...\nGenerated Caption:  A cat.  \r\nbye").payload == "A cat.");
  CHECK_FALSE(ParseGeneratedCaption("A cat.").ok);
  CHECK_FALSE(ParseGeneratedCaption("Generated Caption: ").ok);
  CHECK_FALSE(ParseGeneratedCaption("generated caption: A cat.").ok);
  CHECK_FALSE(ParseGeneratedCaption("Generated Caption: A\nGenerated Caption: B").ok);
}

TEST_CASE("auxiliary rules") {
  CriteriaConfig cfg;
  const std::string orig = "A dog on a bed.";
  CHECK(EvalAuxiliary(orig, Gen("A cat on a bed."), cfg).success);

  auto neg = EvalAuxiliary(orig, Gen("A dog not on a bed."), cfg);
  CHECK_FALSE(neg.success);
  CHECK(neg.failures == std::vector<std::string>{std::string(kRuleNegationBlacklist)});
  CHECK_FALSE(EvalAuxiliary(orig, Gen("An EMPTY bed."), cfg).success);
  CHECK_FALSE(EvalAuxiliary(orig, Gen("A bed without a dog."), cfg).success);

  // Identical after tokenization (case and punctuation differ).
  auto same = EvalAuxiliary(orig, Gen("a dog ON a bed"), cfg);
  CHECK(same.failures == std::vector<std::string>{std::string(kRuleIdentical)});

  auto unparsed = EvalAuxiliary(orig, "A cat on a bed.", cfg);
  CHECK(unparsed.failures == std::vector<std::string>{std::string(kRuleFormatParse)});

  CHECK(EvalAuxiliary(orig, Gen("A dog isn't on a bed."), cfg).success);
  cfg.match_contractions = true;
  CHECK_FALSE(EvalAuxiliary(orig, Gen("A dog isn't on a bed."), cfg).success);
}

TEST_CASE("operation compliance by structure and POS") {
  const std::string orig = "A white dog sitting on a bed.";
  struct Case {
    OpKind op;
    std::string candidate;
    bool ok;
  };
  const Case cases[] = {
      {OpKind::kReplaceObject, "A white cat sitting on a bed.", true},
      {OpKind::kReplaceObject, "A black dog sitting on a bed.", false},  // adjective edited
      {OpKind::kReplaceObject, "A white cat sitting on a sofa.", false},  // two edits
      {OpKind::kReplaceAttribute, "A black dog sitting on a bed.", true},
      {OpKind::kReplaceAttribute, "A white dog sitting on a table.", false},
      {OpKind::kReplaceRelation, "A white dog sitting under a bed.", true},
      {OpKind::kReplaceRelation, "A white dog running on a bed.", true},
      {OpKind::kReplaceRelation, "A white dog sitting on a car.", false},
      {OpKind::kAddObject, "A white dog sitting on a bed with a ball.", true},
      {OpKind::kAddObject, "A white fluffy dog sitting on a bed.", false},  // adjective added
      {OpKind::kAddAttribute, "A white fluffy dog sitting on a bed.", true},
      {OpKind::kAddAttribute, "A white dog sitting on a bed.", false},
      {OpKind::kSwapObject, "A white bed sitting on a dog.", true},
      {OpKind::kSwapObject, "A white bed sitting on a cat.", false},
      {OpKind::kSwapAttribute, "A white dog sitting on a bed.", false},
  };
  for (const auto& c : cases) {
    CAPTURE(c.candidate);
    CAPTURE(ToString(c.op));
    const Tokens o = Tokenize(orig), n = Tokenize(c.candidate);
    PairAnnotations ann = Annotate(orig, c.candidate);
    CHECK(OpCompliant(c.op, Align(o, n), &ann) == c.ok);

    CriteriaConfig cfg;
    cfg.prompt_op = c.op;
    auto aux = EvalAuxiliary(orig, Gen(c.candidate), cfg, &ann);
    const bool identical = o == n;
    CHECK(aux.success == (c.ok && !identical));
  }

  // Swap of two adjectives.
  const std::string two = "A red car near a blue bus.";
  PairAnnotations ann = Annotate(two, "A blue car near a red bus.");
  CHECK(OpCompliant(OpKind::kSwapAttribute,
                    Align(Tokenize(two), Tokenize("A blue car near a red bus.")), &ann));

  // Count replacement.
  const std::string cnt = "Two dogs on a bed.";
  PairAnnotations cann = Annotate(cnt, "Three dogs on a bed.");
  CHECK(OpCompliant(OpKind::kReplaceCount, Align(Tokenize(cnt), Tokenize("Three dogs on a bed.")), &cann));
}

TEST_CASE("op rule can be disabled per operation") {
  CriteriaConfig cfg;
  cfg.prompt_op = OpKind::kReplaceObject;
  const std::string orig = "A dog on a bed.";
  CHECK_FALSE(EvalAuxiliary(orig, Gen("A big red dog on a bed."), cfg).success);
  cfg.op_rules[OpKind::kReplaceObject] = false;
  CHECK(EvalAuxiliary(orig, Gen("A big red dog on a bed."), cfg).success);
}

TEST_CASE("criteria config json round trip") {
  CriteriaConfig cfg;
  cfg.tau = 0.3;
  cfg.prompt_op = OpKind::kSwapObject;
  cfg.op_rules[OpKind::kAddObject] = false;
  cfg.nli_direction = NliDirection::kOriginalAsPremise;
  CriteriaConfig back = CriteriaConfig::FromJson(cfg.ToJson());
  CHECK(back.ToJson() == cfg.ToJson());
  CHECK_THROWS_AS(CriteriaConfig::FromJson({{"tau", 1.5}}), ConfigError);
  CHECK_THROWS_AS(CriteriaConfig::FromJson({{"prompt_op", "paint-object"}}), ConfigError);
}

TEST_CASE("asr aggregation") {
  auto v = [](bool c, bool u, bool d, bool a) {
    CriteriaVerdict x;
    x.crossmodal = c;
    x.unimodal = u;
    x.distance = d;
    x.auxiliary = a;
    x.UpdateTotal();
    return x;
  };
  // Every criterion passes on 2 of 3 samples yet no sample passes all four.
  std::vector<CriteriaVerdict> vs = {v(true, true, true, false), v(true, true, false, true),
                                     v(false, false, true, true)};
  AsrReport r = AggregateAsr(vs);
  CHECK(r.cross == doctest::Approx(2.0 / 3));
  CHECK(r.aux == doctest::Approx(2.0 / 3));
  CHECK(r.total == 0.0);
  CHECK(r.samples == 3);
  vs.push_back(v(true, true, true, true));
  r = AggregateAsr(vs);
  CHECK(r.total == 0.25);
  CHECK(r.total <= std::min({r.cross, r.uni, r.dist, r.aux}));
  CHECK_THROWS_AS(AggregateAsr(std::vector<CriteriaVerdict>{}), std::invalid_argument);
}

TEST_CASE("total never exceeds any column on random verdicts") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CriteriaVerdict> vs(1 + rng.UniformIndex(20));
    for (auto& x : vs) {
      x.crossmodal = rng.UniformIndex(2);
      x.unimodal = rng.UniformIndex(2);
      x.distance = rng.UniformIndex(2);
      x.auxiliary = rng.UniformIndex(2);
      x.UpdateTotal();
    }
    AsrReport r = AggregateAsr(vs);
    CHECK(r.total <= std::min({r.cross, r.uni, r.dist, r.aux}));
  }
}

TEST_CASE("verdict json round trip and consistency check") {
  CriteriaVerdict x;
  x.crossmodal = x.unimodal = x.distance = x.auxiliary = true;
  x.UpdateTotal();
  x.nli_scores = {0.1, 0.2, 0.3};
  x.edit_distance = 2;
  CHECK(VerdictFromJson(ToJson(x)) == x);
  auto j = ToJson(x);
  j["total"] = false;
  CHECK_THROWS(VerdictFromJson(j));
}
