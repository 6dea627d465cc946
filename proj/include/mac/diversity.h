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

// Group-wise diversity of caption edits.
//
// Every word-level insertion or deletion that turns an original caption
// into a candidate becomes an attribute token "OP_POS_LEMMA" (I_NOUN_man,
// D_ADJ_red, ...). Substitutions contribute one D and one I token. Pooling
// the tokens of all samples gives a distribution p over unique tokens:
//
//   H  = -sum_j p_j ln p_j           (nats)
//   Ĥ  = H / ln(#unique)             (0 when #unique <= 1)
//   D1 = #unique / #tokens
//
// Only samples that pass the distance criterion contribute tokens.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mac/edit_script.h"
#include "mac/providers.h"

namespace mac {

struct AttributeToken {
  enum class Op { kInsert, kDelete };
  Op op;
  std::string pos;    // Universal POS, uppercase
  std::string lemma;  // lowercase

  std::string Rendered() const;
  bool operator==(const AttributeToken&) const = default;
};

// Throws std::invalid_argument naming the offending index when an
// annotation list does not cover its caption.
std::vector<AttributeToken> ExtractAttributeTokens(const EditScript& script,
                                                   std::span<const Annotation> original,
                                                   std::span<const Annotation> candidate);

std::vector<std::string> RenderTokens(std::span<const AttributeToken> tokens);

// Counts of rendered tokens with the running sum of c*ln(c), so entropy is
// maintained incrementally: H = ln(T) - S / T.
class TokenFrequency {
 public:
  void Add(std::span<const std::string> tokens);
  void Remove(std::span<const std::string> tokens);

  // H of the current counts.
  double Entropy() const;
  // H after removing `out` and adding `in`, without mutating.
  double EntropyIfSwapped(std::span<const std::string> out, std::span<const std::string> in) const;

  size_t total() const { return total_; }
  size_t unique() const { return counts_.size(); }
  const std::map<std::string, size_t>& counts() const { return counts_; }

  // Rebuilds from counts and returns H; for consistency checks.
  double RecomputeEntropy() const;

 private:
  void Adjust(const std::string& token, long delta);

  std::map<std::string, size_t> counts_;
  size_t total_ = 0;
  double sum_clogc_ = 0.0;
};

// Entropy in nats of a count table.
double EntropyOfCounts(const std::map<std::string, size_t>& counts);

struct DiversitySample {
  std::string pair_id;
  bool distance_ok = false;
  std::vector<std::string> tokens;  // rendered attribute tokens
};

struct DiversityReport {
  double entropy = 0.0;
  double normalized_entropy = 0.0;
  // nullopt when no token survived gating.
  std::optional<double> distinct1;
  size_t unique_tokens = 0;
  size_t total_tokens = 0;
  size_t included_samples = 0;
  size_t excluded_samples = 0;
  std::map<std::string, size_t> counts;

  bool empty() const { return total_tokens == 0; }
  double Probability(const std::string& token) const;
};

nlohmann::json ToJson(const DiversityReport& r);

DiversityReport ComputeDiversity(std::span<const DiversitySample> samples);

// CSV "token,count,probability", rows sorted by descending count then token.
std::string TokenDistributionCsv(const DiversityReport& r);

}  // namespace mac
