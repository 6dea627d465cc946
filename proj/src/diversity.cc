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

#include "mac/diversity.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mac {

using nlohmann::json;

namespace {

double CLogC(size_t c) { return c == 0 ? 0.0 : static_cast<double>(c) * std::log(static_cast<double>(c)); }

std::string Upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const Annotation& AnnotationAt(std::span<const Annotation> anns, size_t index, const char* which,
                               const std::optional<std::string>& word) {
  if (index >= anns.size()) {
    throw std::invalid_argument(std::string(which) + " annotation missing at index " +
                                std::to_string(index));
  }
  if (word && anns[index].text != *word) {
    throw std::invalid_argument(std::string(which) + " annotation misaligned at index " +
                                std::to_string(index) + ": '" + anns[index].text + "' vs '" +
                                *word + "'");
  }
  return anns[index];
}

}  // namespace

std::string AttributeToken::Rendered() const {
  return std::string(op == Op::kInsert ? "I" : "D") + "_" + Upper(pos) + "_" + Lower(lemma);
}

std::vector<AttributeToken> ExtractAttributeTokens(const EditScript& script,
                                                   std::span<const Annotation> original,
                                                   std::span<const Annotation> candidate) {
  if (original.size() != script.source_len) {
    throw std::invalid_argument("original annotation covers " + std::to_string(original.size()) +
                                " tokens, caption has " + std::to_string(script.source_len));
  }
  if (candidate.size() != script.target_len) {
    throw std::invalid_argument("candidate annotation covers " + std::to_string(candidate.size()) +
                                " tokens, caption has " + std::to_string(script.target_len));
  }
  std::vector<AttributeToken> out;
  for (const auto& op : script.ops) {
    if (op.kind == EditKind::kDelete || op.kind == EditKind::kSubstitute) {
      const auto& a = AnnotationAt(original, op.position, "original", op.old_word);
      out.push_back({AttributeToken::Op::kDelete, a.pos, a.lemma});
    }
    if (op.kind == EditKind::kInsert || op.kind == EditKind::kSubstitute) {
      const auto& a = AnnotationAt(candidate, op.target_position, "candidate", op.new_word);
      out.push_back({AttributeToken::Op::kInsert, a.pos, a.lemma});
    }
  }
  return out;
}

std::vector<std::string> RenderTokens(std::span<const AttributeToken> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.Rendered());
  return out;
}

void TokenFrequency::Adjust(const std::string& token, long delta) {
  auto it = counts_.find(token);
  size_t before = it == counts_.end() ? 0 : it->second;
  if (delta < 0 && static_cast<size_t>(-delta) > before) {
    throw std::logic_error("TokenFrequency: removing absent token " + token);
  }
  size_t after = static_cast<size_t>(static_cast<long>(before) + delta);
  sum_clogc_ += CLogC(after) - CLogC(before);
  total_ = static_cast<size_t>(static_cast<long>(total_) + delta);
  if (after == 0) {
    if (it != counts_.end()) counts_.erase(it);
  } else if (it == counts_.end()) {
    counts_.emplace(token, after);
  } else {
    it->second = after;
  }
}

void TokenFrequency::Add(std::span<const std::string> tokens) {
  for (const auto& t : tokens) Adjust(t, +1);
}

void TokenFrequency::Remove(std::span<const std::string> tokens) {
  for (const auto& t : tokens) Adjust(t, -1);
}

double TokenFrequency::Entropy() const {
  if (total_ == 0) return 0.0;
  const double t = static_cast<double>(total_);
  return std::max(0.0, std::log(t) - sum_clogc_ / t);
}

double TokenFrequency::EntropyIfSwapped(std::span<const std::string> out,
                                        std::span<const std::string> in) const {
  std::map<std::string, long> delta;
  for (const auto& t : out) --delta[t];
  for (const auto& t : in) ++delta[t];
  double s = sum_clogc_;
  long total = static_cast<long>(total_);
  for (const auto& [token, d] : delta) {
    if (d == 0) continue;
    auto it = counts_.find(token);
    long before = it == counts_.end() ? 0 : static_cast<long>(it->second);
    long after = before + d;
    if (after < 0) throw std::logic_error("TokenFrequency: removing absent token " + token);
    s += CLogC(static_cast<size_t>(after)) - CLogC(static_cast<size_t>(before));
    total += d;
  }
  if (total == 0) return 0.0;
  const double t = static_cast<double>(total);
  return std::max(0.0, std::log(t) - s / t);
}

double TokenFrequency::RecomputeEntropy() const { return EntropyOfCounts(counts_); }

double EntropyOfCounts(const std::map<std::string, size_t>& counts) {
  size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

double DiversityReport::Probability(const std::string& token) const {
  auto it = counts.find(token);
  if (it == counts.end() || total_tokens == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total_tokens);
}

json ToJson(const DiversityReport& r) {
  return {{"entropy", r.entropy},
          {"normalized_entropy", r.normalized_entropy},
          {"distinct1", r.distinct1 ? json(*r.distinct1) : json(nullptr)},
          {"unique_tokens", r.unique_tokens},
          {"total_tokens", r.total_tokens},
          {"included_samples", r.included_samples},
          {"excluded_samples", r.excluded_samples},
          {"log_base", "e"},
          {"empty", r.empty()}};
}

DiversityReport ComputeDiversity(std::span<const DiversitySample> samples) {
  DiversityReport r;
  for (const auto& s : samples) {
    if (!s.distance_ok) {
      ++r.excluded_samples;
      continue;
    }
    ++r.included_samples;
    for (const auto& t : s.tokens) ++r.counts[t];
  }
  for (const auto& [_, c] : r.counts) r.total_tokens += c;
  r.unique_tokens = r.counts.size();
  r.entropy = EntropyOfCounts(r.counts);
  r.normalized_entropy =
      r.unique_tokens >= 2 ? r.entropy / std::log(static_cast<double>(r.unique_tokens)) : 0.0;
  if (r.total_tokens > 0) {
    r.distinct1 = static_cast<double>(r.unique_tokens) / static_cast<double>(r.total_tokens);
  }
  return r;
}

std::string TokenDistributionCsv(const DiversityReport& r) {
  std::vector<std::pair<std::string, size_t>> rows(r.counts.begin(), r.counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::ostringstream out;
  out << "token,count,probability\n";
  out.precision(17);
  for (const auto& [token, count] : rows) {
    out << token << ',' << count << ',' << r.Probability(token) << '\n';
  }
  return out.str();
}

}  // namespace mac
