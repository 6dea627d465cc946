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

#include <cmath>
#include <map>

#include "doctest.h"
#include "mac/selection.h"

using namespace mac;

namespace {

Candidate Cand(std::vector<std::string> tokens, bool ok = true, std::string text = "") {
  Candidate c;
  c.text = text.empty() ? "c" : text;
  c.verdict.crossmodal = c.verdict.unimodal = c.verdict.distance = c.verdict.auxiliary = ok;
  c.verdict.UpdateTotal();
  c.tokens = std::move(tokens);
  return c;
}

std::vector<CandidatePool> RandomPools(Rng& rng, size_t max_pools, size_t max_cands) {
  std::vector<CandidatePool> pools(1 + rng.UniformIndex(max_pools));
  for (size_t p = 0; p < pools.size(); ++p) {
    pools[p].pair_id = "p" + std::to_string(p);
    size_t n = 1 + rng.UniformIndex(max_cands);
    for (size_t c = 0; c < n; ++c) {
      std::vector<std::string> toks(1 + rng.UniformIndex(4));
      for (auto& t : toks) t = std::string(1, static_cast<char>('a' + rng.UniformIndex(5)));
      pools[p].candidates.push_back(Cand(toks));
    }
  }
  return pools;
}

// Enumerates every joint selection; shares nothing with GibbsSelect.
double ExhaustiveMax(const std::vector<CandidatePool>& pools) {
  double best = -1;
  std::vector<size_t> idx(pools.size(), 0);
  while (true) {
    std::map<std::string, size_t> counts;
    for (size_t p = 0; p < pools.size(); ++p)
      for (const auto& t : pools[p].candidates[idx[p]].tokens) counts[t]++;
    best = std::max(best, EntropyOfCounts(counts));
    size_t p = 0;
    while (p < pools.size() && ++idx[p] == pools[p].candidates.size()) idx[p++] = 0;
    if (p == pools.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("success set lists passing candidates") {
  CandidatePool pool{"p", {Cand({"a"}, false), Cand({"b"}), Cand({"c"}, false), Cand({"d"})}};
  CHECK(pool.SuccessSet() == std::vector<size_t>{1, 3});
}

TEST_CASE("best of n is uniform over the success set") {
  CandidatePool pool{"p", {Cand({"a"}), Cand({"b"}, false), Cand({"c"}), Cand({"d"})}};
  Rng rng(1);
  std::map<size_t, int> hits;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) hits[BestOfN(pool, rng)]++;
  CHECK(hits.count(1) == 0);
  for (size_t i : {0, 2, 3}) CHECK(std::abs(hits[i] / double(draws) - 1.0 / 3) < 0.015);
}

TEST_CASE("best of n falls back to all candidates") {
  CandidatePool pool{"p", {Cand({"a"}, false), Cand({"b"}, false)}};
  Rng rng(2);
  std::map<size_t, int> hits;
  for (int i = 0; i < 20000; ++i) hits[BestOfN(pool, rng)]++;
  CHECK(std::abs(hits[0] / 20000.0 - 0.5) < 0.02);
  CandidatePool empty{"e", {}};
  CHECK_THROWS(BestOfN(empty, rng));
}

TEST_CASE("best of n selection is deterministic per seed") {
  Rng rng(9);
  auto pools = RandomPools(rng, 10, 5);
  auto a = SelectBestOfN(pools, 42), b = SelectBestOfN(pools, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].candidate_index == b[i].candidate_index);
}

TEST_CASE("rft selection drops pools without a success") {
  std::vector<CandidatePool> pools = {{"a", {Cand({"x"}, false)}},
                                      {"b", {Cand({"x"}, false), Cand({"y"})}}};
  RftSelection r = SelectRft(pools, 3);
  CHECK(r.dropped == 1);
  REQUIRE(r.selections.size() == 1);
  CHECK(r.selections[0].pair_id == "b");
  CHECK(r.selections[0].candidate_index == 1);
  CHECK(SuccessfulPools(pools).size() == 1);
}

TEST_CASE("gibbs reaches ln 2 on the two pool example") {
  std::vector<CandidatePool> pools = {{"p1", {Cand({"x"}), Cand({"y"})}}, {"p2", {Cand({"x"})}}};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EntropyObjective obj;
    SelectionState s = GibbsSelect(pools, {}, rng, obj);
    CHECK(s.entropy == doctest::Approx(std::log(2.0)));
    CHECK(s.chosen.at("p1") == 1);
  }
}

TEST_CASE("gibbs objective never decreases and respects success sets") {
  Rng gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    auto pools = RandomPools(gen, 6, 5);
    // Mark some candidates as failures, keeping one success per pool.
    for (auto& p : pools)
      for (size_t c = 1; c < p.candidates.size(); ++c)
        if (gen.UniformIndex(3) == 0) p.candidates[c] = Cand(p.candidates[c].tokens, false);
    Rng rng(trial);
    EntropyObjective obj;
    double last = -1;
    bool monotone = true;
    SelectionState s = GibbsSelect(pools, {}, rng, obj, [&](const std::string&, double before, double after) {
      if (after < before - 1e-12) monotone = false;
      if (last >= 0 && before < last - 1e-12) monotone = false;
      last = after;
    });
    CHECK(monotone);
    CHECK(s.sweeps >= 1);
    CHECK(s.sweeps <= 3);
    for (const auto& p : pools) {
      const auto succ = p.SuccessSet();
      CHECK(std::find(succ.begin(), succ.end(), s.chosen.at(p.pair_id)) != succ.end());
    }
    auto sel = SelectionsFromState(s, pools);
    CHECK(FrequencyOf(sel, pools).Entropy() == doctest::Approx(s.entropy).epsilon(1e-9));
    CHECK(s.entropy <= ExhaustiveMax(pools) + 1e-9);
  }
}

TEST_CASE("gibbs with one candidate per pool changes nothing") {
  std::vector<CandidatePool> pools = {{"a", {Cand({"x"})}}, {"b", {Cand({"y", "z"})}}};
  Rng rng(0);
  EntropyObjective obj;
  SelectionState s = GibbsSelect(pools, {}, rng, obj);
  CHECK(s.changes == 0);
  CHECK(s.sweeps == 1);
}

TEST_CASE("gibbs keeps the incumbent on ties") {
  // Both candidates of p1 give the same entropy.
  std::vector<CandidatePool> pools = {{"p1", {Cand({"y"}), Cand({"z"})}}, {"p2", {Cand({"x"})}}};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng init(seed);
    size_t first = BestOfN(pools[0], init);
    Rng rng(seed);
    EntropyObjective obj;
    SelectionState s = GibbsSelect(pools, {}, rng, obj);
    CHECK(s.chosen.at("p1") == first);
    CHECK(s.changes == 0);
  }
}

TEST_CASE("gibbs is deterministic and order independent") {
  Rng gen(5);
  auto pools = RandomPools(gen, 8, 4);
  auto reversed = pools;
  std::reverse(reversed.begin(), reversed.end());
  EntropyObjective obj;
  Rng r1(77), r2(77);
  auto a = GibbsSelect(pools, {}, r1, obj);
  auto b = GibbsSelect(reversed, {}, r2, obj);
  CHECK(a.chosen == b.chosen);
  CHECK(a.entropy == b.entropy);
}

TEST_CASE("gibbs input validation") {
  EntropyObjective obj;
  Rng rng(0);
  std::vector<CandidatePool> dup = {{"a", {Cand({"x"})}}, {"a", {Cand({"y"})}}};
  CHECK_THROWS(GibbsSelect(dup, {}, rng, obj));
  std::vector<CandidatePool> none = {{"a", {Cand({"x"}, false)}}};
  CHECK_THROWS(GibbsSelect(none, {}, rng, obj));
  std::vector<CandidatePool> ok = {{"a", {Cand({"x"})}}};
  CHECK_THROWS(GibbsSelect(ok, GibbsOptions{0, 1e-12}, rng, obj));
}

TEST_CASE("distinct1 objective is pluggable") {
  auto obj = MakeObjective("distinct1");
  CHECK(obj->Name() == "distinct1");
  std::vector<CandidatePool> pools = {{"p1", {Cand({"x", "x"}), Cand({"y", "z"})}}, {"p2", {Cand({"x"})}}};
  Rng rng(3);
  SelectionState s = GibbsSelect(pools, {}, rng, *obj);
  CHECK(s.chosen.at("p1") == 1);
  CHECK(s.objective == 1.0);
  CHECK_THROWS(MakeObjective("perplexity"));
}

TEST_CASE("gibbs beats or matches best of n in expectation") {
  Rng gen(101);
  double gibbs = 0, bon = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto pools = RandomPools(gen, 6, 4);
    Rng rng(trial);
    EntropyObjective obj;
    gibbs += GibbsSelect(pools, {}, rng, obj).entropy;
    auto sel = SelectBestOfN(pools, trial);
    bon += FrequencyOf(sel, pools).Entropy();
  }
  CHECK(gibbs > bon);
}

TEST_CASE("selection json round trip") {
  Selection s{"p", 3, "A cat."};
  Selection back = SelectionFromJson(ToJson(s));
  CHECK(back.pair_id == "p");
  CHECK(back.candidate_index == 3);
  CHECK(back.caption == "A cat.");
  std::vector<Selection> v = {s, s};
  const std::string jsonl = SelectionsToJsonl(v);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
}

TEST_CASE("gibbs starts from the given initial assignment") {
  // With p1 fixed at "y" the tie keeps it, whatever the seed.
  std::vector<CandidatePool> pools = {{"p1", {Cand({"y"}), Cand({"z"})}}, {"p2", {Cand({"x"})}}};
  for (size_t start : {0, 1}) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      EntropyObjective obj;
      GibbsOptions opt;
      opt.initial["p1"] = start;
      SelectionState s = GibbsSelect(pools, opt, rng, obj);
      CHECK(s.chosen.at("p1") == start);
    }
  }
  // An initial pick outside the success set is rejected.
  std::vector<CandidatePool> mixed = {{"p1", {Cand({"y"}), Cand({"z"}, false)}}};
  Rng rng(0);
  EntropyObjective obj;
  GibbsOptions bad;
  bad.initial["p1"] = 1;
  CHECK_THROWS_AS(GibbsSelect(mixed, bad, rng, obj), std::invalid_argument);
}

TEST_CASE("gibbs seeded from best of n never ends below it") {
  Rng gen(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto pools = RandomPools(gen, 6, 4);
    Rng draw(trial);
    GibbsOptions opt;
    for (const auto& p : pools) opt.initial[p.pair_id] = BestOfN(p, draw);
    std::map<std::string, size_t> counts;
    for (const auto& p : pools)
      for (const auto& t : p.candidates[opt.initial.at(p.pair_id)].tokens) counts[t]++;
    Rng rng(trial);
    EntropyObjective obj;
    CHECK(GibbsSelect(pools, opt, rng, obj).entropy >= EntropyOfCounts(counts) - 1e-12);
  }
}
