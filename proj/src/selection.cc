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

#include "mac/selection.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "mac/hashing.h"

namespace mac {

using nlohmann::json;

std::vector<size_t> CandidatePool::SuccessSet() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].verdict.total) out.push_back(i);
  }
  return out;
}

size_t BestOfN(const CandidatePool& pool, Rng& rng) {
  if (pool.candidates.empty()) {
    throw std::invalid_argument("best_of_n: pool " + pool.pair_id + " has no candidates");
  }
  const auto success = pool.SuccessSet();
  if (!success.empty()) return success[rng.UniformIndex(success.size())];
  return rng.UniformIndex(pool.candidates.size());
}

json ToJson(const Selection& s) {
  return {{"pair_id", s.pair_id}, {"candidate_index", s.candidate_index}, {"caption", s.caption}};
}

Selection SelectionFromJson(const json& j) {
  return {j.at("pair_id").get<std::string>(), j.at("candidate_index").get<size_t>(),
          j.at("caption").get<std::string>()};
}

std::vector<Selection> SelectBestOfN(std::span<const CandidatePool> pools, uint64_t seed) {
  std::vector<Selection> out;
  out.reserve(pools.size());
  for (const auto& pool : pools) {
    Rng rng(DeriveSeed(seed, "best_of_n:" + pool.pair_id));
    const size_t idx = BestOfN(pool, rng);
    out.push_back({pool.pair_id, idx, pool.candidates[idx].text});
  }
  return out;
}

RftSelection SelectRft(std::span<const CandidatePool> pools, uint64_t seed) {
  RftSelection out;
  for (const auto& pool : pools) {
    if (pool.SuccessSet().empty()) {
      ++out.dropped;
      continue;
    }
    Rng rng(DeriveSeed(seed, "best_of_n:" + pool.pair_id));
    const size_t idx = BestOfN(pool, rng);
    out.selections.push_back({pool.pair_id, idx, pool.candidates[idx].text});
  }
  return out;
}

std::vector<CandidatePool> SuccessfulPools(std::span<const CandidatePool> pools) {
  std::vector<CandidatePool> out;
  for (const auto& pool : pools) {
    if (!pool.SuccessSet().empty()) out.push_back(pool);
  }
  return out;
}

double DiversityObjective::ScoreIfSwapped(const TokenFrequency& freq,
                                          std::span<const std::string> out,
                                          std::span<const std::string> in) const {
  TokenFrequency copy = freq;
  copy.Remove(out);
  copy.Add(in);
  return Score(copy);
}

double Distinct1Objective::Score(const TokenFrequency& freq) const {
  if (freq.total() == 0) return 0.0;
  return static_cast<double>(freq.unique()) / static_cast<double>(freq.total());
}

std::unique_ptr<DiversityObjective> MakeObjective(std::string_view name) {
  if (name == "entropy") return std::make_unique<EntropyObjective>();
  if (name == "distinct1") return std::make_unique<Distinct1Objective>();
  throw std::invalid_argument("unknown selection objective: " + std::string(name));
}

SelectionState GibbsSelect(std::span<const CandidatePool> pools, const GibbsOptions& options,
                           Rng& rng, const DiversityObjective& objective,
                           const GibbsObserver& observer) {
  if (options.k < 1) throw std::invalid_argument("gibbs_select: k must be >= 1");

  // Ascending pair_id order.
  std::vector<const CandidatePool*> order;
  order.reserve(pools.size());
  std::set<std::string> seen;
  for (const auto& pool : pools) {
    if (!seen.insert(pool.pair_id).second) {
      throw std::invalid_argument("gibbs_select: duplicate pair_id " + pool.pair_id);
    }
    order.push_back(&pool);
  }
  std::sort(order.begin(), order.end(),
            [](const CandidatePool* a, const CandidatePool* b) { return a->pair_id < b->pair_id; });

  std::vector<std::vector<size_t>> success(order.size());
  for (size_t p = 0; p < order.size(); ++p) {
    success[p] = order[p]->SuccessSet();
    if (success[p].empty()) {
      throw std::invalid_argument("gibbs_select: pool " + order[p]->pair_id +
                                  " has an empty success set");
    }
  }

  SelectionState state;
  std::vector<size_t> current(order.size());
  for (size_t p = 0; p < order.size(); ++p) {
    if (auto it = options.initial.find(order[p]->pair_id); it != options.initial.end()) {
      if (std::find(success[p].begin(), success[p].end(), it->second) == success[p].end()) {
        throw std::invalid_argument("gibbs_select: initial candidate for " + order[p]->pair_id +
                                    " is not in its success set");
      }
      current[p] = it->second;
    } else {
      current[p] = success[p][rng.UniformIndex(success[p].size())];
    }
    state.freq.Add(order[p]->candidates[current[p]].tokens);
  }

  double value = objective.Score(state.freq);
  for (size_t sweep = 0; sweep < options.k; ++sweep) {
    ++state.sweeps;
    bool changed = false;
    for (size_t p = 0; p < order.size(); ++p) {
      const auto& cands = order[p]->candidates;
      const auto& out = cands[current[p]].tokens;

      std::vector<double> scores(success[p].size());
      double best = -1.0;
      double incumbent = value;
      for (size_t s = 0; s < success[p].size(); ++s) {
        const size_t idx = success[p][s];
        scores[s] = idx == current[p] ? value
                                      : objective.ScoreIfSwapped(state.freq, out, cands[idx].tokens);
        if (idx == current[p]) incumbent = scores[s];
        best = std::max(best, scores[s]);
      }
      size_t pick = current[p];
      if (incumbent < best - options.tie_tolerance) {
        for (size_t s = 0; s < success[p].size(); ++s) {
          if (scores[s] >= best - options.tie_tolerance) {
            pick = success[p][s];
            break;
          }
        }
      }

      const double before = value;
      if (pick != current[p]) {
        state.freq.Remove(out);
        state.freq.Add(cands[pick].tokens);
        current[p] = pick;
        value = objective.Score(state.freq);
        changed = true;
        ++state.changes;
      }
      if (observer) observer(order[p]->pair_id, before, value);
    }
    if (!changed) break;
  }

  for (size_t p = 0; p < order.size(); ++p) state.chosen[order[p]->pair_id] = current[p];
  state.entropy = state.freq.Entropy();
  state.objective = value;
  return state;
}

std::vector<Selection> SelectionsFromState(const SelectionState& state,
                                           std::span<const CandidatePool> pools) {
  std::unordered_map<std::string, const CandidatePool*> by_id;
  for (const auto& pool : pools) by_id[pool.pair_id] = &pool;
  std::vector<Selection> out;
  for (const auto& [pair_id, idx] : state.chosen) {
    auto it = by_id.find(pair_id);
    if (it == by_id.end() || idx >= it->second->candidates.size()) {
      throw std::invalid_argument("selection refers to unknown candidate " + pair_id + "#" +
                                  std::to_string(idx));
    }
    out.push_back({pair_id, idx, it->second->candidates[idx].text});
  }
  return out;
}

TokenFrequency FrequencyOf(std::span<const Selection> selections,
                           std::span<const CandidatePool> pools) {
  std::unordered_map<std::string, const CandidatePool*> by_id;
  for (const auto& pool : pools) by_id[pool.pair_id] = &pool;
  TokenFrequency freq;
  for (const auto& s : selections) {
    auto it = by_id.find(s.pair_id);
    if (it == by_id.end() || s.candidate_index >= it->second->candidates.size()) {
      throw std::invalid_argument("selection refers to unknown candidate " + s.pair_id);
    }
    freq.Add(it->second->candidates[s.candidate_index].tokens);
  }
  return freq;
}

std::string SelectionsToJsonl(std::span<const Selection> selections) {
  std::string out;
  for (const auto& s : selections) {
    out += ToJson(s).dump();
    out += '\n';
  }
  return out;
}

}  // namespace mac
