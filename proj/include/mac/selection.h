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

// Choosing one candidate per pair: Best-of-N, the success filter used to
// build fine-tuning data, and coordinate-ascent selection that maximizes
// the diversity of the pooled attribute tokens.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mac/criteria.h"
#include "mac/diversity.h"
#include "mac/rng.h"

namespace mac {

struct Candidate {
  std::string text;  // parsed caption (raw output when parsing failed)
  CriteriaVerdict verdict;
  std::vector<std::string> tokens;  // rendered attribute tokens
};

struct CandidatePool {
  std::string pair_id;
  std::vector<Candidate> candidates;

  // Indices whose verdict passes every criterion, ascending.
  std::vector<size_t> SuccessSet() const;
};

// Uniform over the success set, else uniform over all candidates.
// Throws std::invalid_argument on an empty pool.
size_t BestOfN(const CandidatePool& pool, Rng& rng);

struct Selection {
  std::string pair_id;
  size_t candidate_index = 0;
  std::string caption;
};

nlohmann::json ToJson(const Selection& s);
Selection SelectionFromJson(const nlohmann::json& j);

// Best-of-N over every pool, one independent draw per pair derived from
// `seed` and the pair id.
std::vector<Selection> SelectBestOfN(std::span<const CandidatePool> pools, uint64_t seed);

struct RftSelection {
  std::vector<Selection> selections;  // pools with a non-empty success set
  size_t dropped = 0;                 // pools without any success
};

// Keeps pools with at least one success and draws uniformly from each
// success set.
RftSelection SelectRft(std::span<const CandidatePool> pools, uint64_t seed);

// Subset of pools with a non-empty success set, order preserved.
std::vector<CandidatePool> SuccessfulPools(std::span<const CandidatePool> pools);

// Group diversity score maximized by GibbsSelect.
class DiversityObjective {
 public:
  virtual ~DiversityObjective() = default;
  virtual std::string_view Name() const = 0;
  virtual double Score(const TokenFrequency& freq) const = 0;
  // Score after replacing `out` with `in`. The default copies `freq`.
  virtual double ScoreIfSwapped(const TokenFrequency& freq, std::span<const std::string> out,
                                std::span<const std::string> in) const;
};

class EntropyObjective : public DiversityObjective {
 public:
  std::string_view Name() const override { return "entropy"; }
  double Score(const TokenFrequency& freq) const override { return freq.Entropy(); }
  double ScoreIfSwapped(const TokenFrequency& freq, std::span<const std::string> out,
                        std::span<const std::string> in) const override {
    return freq.EntropyIfSwapped(out, in);
  }
};

// Distinct-1; 0 for an empty table.
class Distinct1Objective : public DiversityObjective {
 public:
  std::string_view Name() const override { return "distinct1"; }
  double Score(const TokenFrequency& freq) const override;
};

// "entropy" or "distinct1".
std::unique_ptr<DiversityObjective> MakeObjective(std::string_view name);

struct SelectionState {
  std::map<std::string, size_t> chosen;  // pair_id -> candidate index
  TokenFrequency freq;
  double entropy = 0.0;    // H of freq, maintained incrementally
  double objective = 0.0;  // objective value of freq
  size_t sweeps = 0;       // sweeps executed (early stop may cut K short)
  size_t changes = 0;      // coordinate updates that switched candidate
};

struct GibbsOptions {
  size_t k = 3;
  double tie_tolerance = 1e-12;
  // Starting candidate per pair_id; pairs not listed start uniformly at
  // random from their success set. Entries must lie in the success set.
  std::map<std::string, size_t> initial;
};

// Called after each coordinate update with the objective before and after.
using GibbsObserver =
    std::function<void(const std::string& pair_id, double before, double after)>;

// Coordinate ascent. Starts from a uniform draw inside each success set,
// then runs up to K sweeps in ascending pair_id order; each step moves the
// pair to the candidate of its success set that maximizes the objective
// with every other choice held fixed. Ties keep the incumbent, otherwise
// the lowest index wins. Stops early after a sweep without changes.
//
// Every pool must have a non-empty success set and a distinct pair_id.
// Throws std::invalid_argument when k < 1 or a precondition fails.
SelectionState GibbsSelect(std::span<const CandidatePool> pools, const GibbsOptions& options,
                           Rng& rng, const DiversityObjective& objective,
                           const GibbsObserver& observer = nullptr);

// Selections in ascending pair_id order.
std::vector<Selection> SelectionsFromState(const SelectionState& state,
                                           std::span<const CandidatePool> pools);

// Pooled token frequency of a set of selections.
TokenFrequency FrequencyOf(std::span<const Selection> selections,
                           std::span<const CandidatePool> pools);

std::string SelectionsToJsonl(std::span<const Selection> selections);

}  // namespace mac
