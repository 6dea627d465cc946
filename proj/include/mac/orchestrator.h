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

// Campaign stages. A campaign is a directory:
//
//   config.json               resolved config plus --set overrides
//   pairs.jsonl               the attacked pairs (corpus format)
//   candidates.jsonl          {"pair_id","candidate_index","raw"}
//   verdicts.jsonl            one record per candidate: caption, raw,
//                             every CriteriaVerdict field, attribute tokens
//   exclusions.jsonl          pairs dropped after a provider failure
//   selection.jsonl           {"pair_id","candidate_index","caption"}
//   selection_manifest.json   seed, strategy, K, objective, final H
//   report.json               ASR columns, diversity, counts
//   token_distribution.csv    token,count,probability
//   stats.json                provider and cache counters (not replayable)
//
// Each stage reads only files written by earlier stages, so selection,
// ASR and diversity can be recomputed from verdicts.jsonl alone.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mac/cache.h"
#include "mac/campaign_config.h"
#include "mac/corpus.h"
#include "mac/criteria.h"
#include "mac/diversity.h"
#include "mac/providers.h"
#include "mac/selection.h"

namespace mac {

struct CandidateRecord {
  std::string pair_id;
  size_t candidate_index = 0;
  std::string raw;
  std::string caption;  // parsed payload, or the raw output when parsing failed
  CriteriaVerdict verdict;
  std::vector<std::string> tokens;
};

nlohmann::json ToJson(const CandidateRecord& r);
CandidateRecord CandidateRecordFromJson(const nlohmann::json& j);

struct Exclusion {
  std::string pair_id;
  std::string error;
};

// Provider instances for one campaign. The cache directory is
// MAC_CACHE_DIR when set, else the config's cache_dir, else no cache.
struct ProviderSet {
  std::unique_ptr<ResponseCache> cache;
  std::shared_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<NliProvider> nli;
  std::shared_ptr<GenerationProvider> generator;
  std::shared_ptr<AnnotationProvider> annotator;
  std::shared_ptr<ItmProvider> itm;

  // `generation` replaces cfg.generation (used for fine-tuned rounds).
  static ProviderSet FromConfig(const CampaignConfig& cfg,
                                const std::optional<ProviderSpec>& generation = std::nullopt);
  std::unique_ptr<CrossmodalScorer> Scorer(CrossmodalBackend backend) const;
  nlohmann::json Stats() const;
};

// Throws StageError("health", ...) when a configured http backend is down.
void CheckProviders(const CampaignConfig& cfg);

// Per-pair sampling seed; identical for every budget so that larger budgets
// extend smaller ones.
uint64_t PairGenerationSeed(uint64_t campaign_seed, const std::string& pair_id);

// Evaluates raw completions of one pair. Throws on provider failure.
std::vector<CandidateRecord> EvaluateCandidates(const DataPair& pair,
                                                const std::vector<std::string>& raws,
                                                double l_d, const CampaignConfig& cfg,
                                                ProviderSet& providers);

// Candidate pools in pair order, from verdict records.
std::vector<CandidatePool> PoolsFromRecords(const std::vector<CandidateRecord>& records);

struct SelectionOutcome {
  std::vector<Selection> selections;  // ascending pair_id
  nlohmann::json manifest;
};

// Applies the configured strategy to every pool. Under gibbs, pools without
// a success fall back to best_of_n (uniform over all candidates).
SelectionOutcome SelectFromPools(const std::vector<CandidatePool>& pools, const CampaignConfig& cfg);

struct CampaignReport {
  AsrReport asr;
  DiversityReport diversity;
  nlohmann::json json;
};

CampaignReport BuildReport(const std::vector<CandidatePool>& pools,
                           const std::vector<Selection>& selections, const Corpus& corpus,
                           const CampaignConfig& cfg, size_t excluded,
                           const nlohmann::json& selection_manifest);

struct AttackResult {
  std::filesystem::path dir;
  CampaignReport report;
  size_t pairs = 0;
  size_t excluded = 0;
  uint64_t completions = 0;  // completions returned by the generator
};

// Ingest, generate `budget` (default cfg.n) candidates per pair, evaluate,
// select, report, and persist everything under `out_dir`. Throws StageError
// naming the failing stage.
AttackResult RunAttack(const LoadedConfig& cfg, const std::filesystem::path& out_dir,
                       std::optional<size_t> budget = std::nullopt,
                       ProviderSet* providers = nullptr);

// Re-runs the criteria on candidates.jsonl, then selection and report.
AttackResult EvaluateCampaign(const std::filesystem::path& dir,
                              const std::vector<std::string>& overrides = {},
                              ProviderSet* providers = nullptr);

// Re-selects from verdicts.jsonl without touching providers.
AttackResult SelectCampaign(const std::filesystem::path& dir,
                            const std::vector<std::string>& overrides = {});

struct RftRecord {
  std::string pair_id;
  size_t candidate_index = 0;
  std::string system;
  std::string user;
  std::string assistant;
};

nlohmann::json ToJson(const RftRecord& r);

struct RftExport {
  std::vector<RftRecord> records;
  nlohmann::json manifest;
};

// Keeps pools with a success, then selects within success sets by the
// configured strategy.
RftExport BuildRftExport(const std::vector<CandidatePool>& pools, const Corpus& corpus,
                         const CampaignConfig& cfg);

// Writes rft.jsonl and rft_manifest.json under `out_dir` (default: the
// campaign directory) and returns the export.
RftExport ExportRft(const std::filesystem::path& campaign_dir,
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                    const std::vector<std::string>& overrides = {});

struct RoundResult {
  size_t round = 0;
  std::filesystem::path dir;
  nlohmann::json manifest;  // round_manifest.json
  std::string export_digest;
  std::string next_steps;
};

// One self-training round under `out_root/round_<r>`: train-split attack
// with large_n, RFT export, test-split attack with n. Round r >= 1 requires
// a registered endpoint and the previous round's manifest.
RoundResult RunRound(const LoadedConfig& cfg, const std::filesystem::path& out_root);

// Re-scores the selected samples of a campaign under each target and writes
// transfer.csv (source,target,total_asr,cross_asr). Only the crossmodal
// verdict changes; the other criteria are reused.
nlohmann::json TransferMatrix(const std::filesystem::path& campaign_dir,
                              const std::vector<std::string>& overrides = {});

// Shared file helpers.
std::string ReadFile(const std::filesystem::path& p);
void WriteFile(const std::filesystem::path& p, std::string_view contents);

}  // namespace mac
