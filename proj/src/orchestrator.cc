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

#include "mac/orchestrator.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "mac/errors.h"
#include "mac/hashing.h"
#include "mac/prompts.h"
#include "mac/tokenizer.h"

namespace mac {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kCampaignFile[] = "campaign.json";
constexpr char kConfigFile[] = "config.json";
constexpr char kPairsFile[] = "pairs.jsonl";
constexpr char kCandidatesFile[] = "candidates.jsonl";
constexpr char kVerdictsFile[] = "verdicts.jsonl";
constexpr char kExclusionsFile[] = "exclusions.jsonl";
constexpr char kSelectionFile[] = "selection.jsonl";
constexpr char kSelectionManifestFile[] = "selection_manifest.json";
constexpr char kReportFile[] = "report.json";
constexpr char kDistributionFile[] = "token_distribution.csv";
constexpr char kStatsFile[] = "stats.json";
constexpr char kRftFile[] = "rft.jsonl";
constexpr char kRftManifestFile[] = "rft_manifest.json";
constexpr char kRoundManifestFile[] = "round_manifest.json";
constexpr char kTransferFile[] = "transfer.csv";

// Recommended settings for the external fine-tuning job.
json FineTuneHyperparameters() {
  return {{"batch_size", 16},    {"lora_rank", 16}, {"lora_alpha", 32},
          {"learning_rate", 2e-4}, {"epochs", 3},   {"reset_to_base_checkpoint_each_round", true}};
}

constexpr char kTestTimeAssumption[] =
    "test-time generation reuses the training prompt and sampling parameters with budget n";

std::vector<json> ReadJsonl(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<json> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(p.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    out.push_back(std::move(j));
  }
  return out;
}

json ReadJson(const fs::path& p) {
  json j = json::parse(ReadFile(p), nullptr, false);
  if (j.is_discarded()) throw std::runtime_error(p.string() + ": invalid JSON");
  return j;
}

std::string Pretty(const json& j) { return j.dump(2) + "\n"; }

template <typename T>
std::string ToJsonl(const std::vector<T>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += ToJson(r).dump();
    out += '\n';
  }
  return out;
}

// Runs `fn`, rethrowing anything but a StageError as one for `stage`.
template <typename Fn>
auto InStage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

json AsrColumns(const AsrReport& r) {
  return {{"cross", r.cross}, {"uni", r.uni}, {"dist", r.dist}, {"aux", r.aux}, {"total", r.total}};
}

std::optional<fs::path> CacheDirFor(const CampaignConfig& cfg) {
  if (const char* env = std::getenv("MAC_CACHE_DIR"); env && *env) return fs::path(env);
  return cfg.cache_dir;
}

SamplingParams SamplingFor(const CampaignConfig& cfg, const std::string& pair_id) {
  SamplingParams p;
  p.top_p = cfg.top_p;
  p.temperature = cfg.temperature;
  p.max_tokens = cfg.max_tokens;
  p.seed = PairGenerationSeed(cfg.seed, pair_id);
  return p;
}

// Everything a stage needs from an existing campaign directory.
struct Campaign {
  fs::path dir;
  LoadedConfig config;
  Corpus corpus;
  size_t budget = 0;
  size_t total_pairs = 0;
};

Campaign LoadCampaign(const fs::path& dir, const std::vector<std::string>& overrides) {
  Campaign c;
  c.dir = dir;
  json snapshot = ReadJson(dir / kConfigFile);
  std::vector<std::string> all = snapshot.value("overrides", std::vector<std::string>{});
  snapshot.erase("overrides");
  all.insert(all.end(), overrides.begin(), overrides.end());
  c.config = LoadCampaignConfigJson(snapshot, overrides);
  // Earlier overrides stay echoed in later snapshots.
  c.config.overrides = all;

  const json meta = ReadJson(dir / kCampaignFile);
  c.corpus = IngestText(ReadFile(dir / kPairsFile), CorpusFormat::kJsonl,
                        meta.at("corpus").get<std::string>());
  c.budget = meta.at("budget").get<size_t>();
  c.total_pairs = meta.at("pairs").get<size_t>();
  return c;
}

std::vector<CandidateRecord> LoadVerdicts(const fs::path& dir) {
  std::vector<CandidateRecord> out;
  for (const auto& j : ReadJsonl(dir / kVerdictsFile)) out.push_back(CandidateRecordFromJson(j));
  return out;
}

size_t CountExclusions(const fs::path& dir) {
  if (!fs::exists(dir / kExclusionsFile)) return 0;
  return ReadJsonl(dir / kExclusionsFile).size();
}

void WriteCampaignMeta(const fs::path& dir, const Corpus& corpus, const CampaignConfig& cfg,
                       size_t budget, size_t pairs) {
  json meta = {{"corpus", corpus.name},
               {"split", cfg.split ? std::string(ToString(*cfg.split)) : std::string("all")},
               {"l_d", corpus.l_d},
               {"budget", budget},
               {"pairs", pairs},
               {"round", cfg.round}};
  WriteFile(dir / kCampaignFile, Pretty(meta));
}

// Selection, report and their files; shared by attack, evaluate and select.
CampaignReport Finalize(const fs::path& dir, const std::vector<CandidatePool>& pools,
                        const Corpus& corpus, const CampaignConfig& cfg, size_t budget,
                        size_t excluded) {
  SelectionOutcome sel = InStage("select", [&] { return SelectFromPools(pools, cfg); });
  WriteFile(dir / kSelectionFile, SelectionsToJsonl(sel.selections));
  WriteFile(dir / kSelectionManifestFile, Pretty(sel.manifest));

  CampaignConfig reported = cfg;
  reported.n = budget;
  CampaignReport report = InStage("report", [&] {
    return BuildReport(pools, sel.selections, corpus, reported, excluded, sel.manifest);
  });
  WriteFile(dir / kReportFile, Pretty(report.json));
  WriteFile(dir / kDistributionFile, TokenDistributionCsv(report.diversity));
  return report;
}

}  // namespace

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& p, std::string_view contents) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + p.string());
  }
  fs::rename(tmp, p);
}

json ToJson(const CandidateRecord& r) {
  json j = ToJson(r.verdict);
  j["pair_id"] = r.pair_id;
  j["candidate_index"] = r.candidate_index;
  j["raw"] = r.raw;
  j["caption"] = r.caption;
  j["tokens"] = r.tokens;
  return j;
}

CandidateRecord CandidateRecordFromJson(const json& j) {
  CandidateRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.candidate_index = j.at("candidate_index").get<size_t>();
  r.raw = j.at("raw").get<std::string>();
  r.caption = j.at("caption").get<std::string>();
  r.verdict = VerdictFromJson(j);
  r.tokens = j.at("tokens").get<std::vector<std::string>>();
  return r;
}

ProviderSet ProviderSet::FromConfig(const CampaignConfig& cfg,
                                    const std::optional<ProviderSpec>& generation) {
  ProviderSet s;
  if (auto dir = CacheDirFor(cfg)) s.cache = std::make_unique<ResponseCache>(*dir);
  ResponseCache* cache = s.cache.get();
  s.embedder = MakeEmbeddingProvider(cfg.embedding, cache);
  s.nli = MakeNliProvider(cfg.nli, cache);
  s.generator = MakeGenerationProvider(generation.value_or(cfg.generation), cache);
  s.annotator = MakeAnnotationProvider(cfg.annotation, cache);
  if (cfg.itm) s.itm = MakeItmProvider(*cfg.itm, cache);
  return s;
}

std::unique_ptr<CrossmodalScorer> ProviderSet::Scorer(CrossmodalBackend backend) const {
  if (backend == CrossmodalBackend::kItm) {
    if (!itm) throw ConfigError("no itm provider configured");
    return std::make_unique<ItmScorer>(*itm);
  }
  return std::make_unique<EmbeddingScorer>(*embedder);
}

json ProviderSet::Stats() const {
  json j = {{"embedding_calls", embedder->BackendCalls()},
            {"nli_calls", nli->BackendCalls()},
            {"generation_calls", generator->BackendCalls()},
            {"annotation_calls", annotator->BackendCalls()}};
  if (itm) j["itm_calls"] = itm->BackendCalls();
  if (cache) {
    j["cache"] = {{"dir", cache->dir().string()}, {"hits", cache->hits()}, {"misses", cache->misses()}};
  }
  return j;
}

void CheckProviders(const CampaignConfig& cfg) {
  std::vector<ProviderSpec> specs = {cfg.embedding, cfg.nli, cfg.generation, cfg.annotation};
  if (cfg.itm) specs.push_back(*cfg.itm);
  for (const auto& spec : specs) {
    const std::string err = HealthCheck(spec);
    if (!err.empty()) throw StageError("health", std::string(ToString(spec.role)) + ": " + err);
  }
}

uint64_t PairGenerationSeed(uint64_t campaign_seed, const std::string& pair_id) {
  return DeriveSeed(campaign_seed, "generate:" + pair_id);
}

std::vector<CandidateRecord> EvaluateCandidates(const DataPair& pair,
                                                const std::vector<std::string>& raws,
                                                double l_d, const CampaignConfig& cfg,
                                                ProviderSet& providers) {
  const size_t n = raws.size();
  std::vector<CandidateRecord> out(n);
  std::vector<std::string> captions(n);
  for (size_t i = 0; i < n; ++i) {
    ParsedOutput parsed = ParseGeneratedCaption(raws[i]);
    captions[i] = parsed.ok ? parsed.payload : raws[i];
  }

  // One batched request per provider: the original caption first.
  std::vector<std::string> texts;
  texts.reserve(n + 1);
  texts.push_back(pair.caption);
  texts.insert(texts.end(), captions.begin(), captions.end());

  auto scorer = providers.Scorer(cfg.crossmodal);
  std::vector<double> sims;
  try {
    sims = scorer->Score(pair, texts);
  } catch (const std::exception& e) {
    throw ProviderError("pair " + pair.id + ": " + e.what());
  }
  if (sims.size() != n + 1) throw ProviderError("pair " + pair.id + ": crossmodal score count mismatch");

  std::vector<NliPair> nli_pairs;
  for (const auto& c : captions) {
    nli_pairs.push_back(cfg.criteria.nli_direction == NliDirection::kGeneratedAsPremise
                            ? NliPair{c, pair.caption}
                            : NliPair{pair.caption, c});
  }
  auto nli_rows = providers.nli->Entailment(nli_pairs);
  const size_t models = providers.nli->ModelCount();
  if (nli_rows.size() != n) throw ProviderError("pair " + pair.id + ": nli row count mismatch");

  auto annotations = providers.annotator->Annotate(texts);
  if (annotations.size() != n + 1) {
    throw ProviderError("pair " + pair.id + ": annotation count mismatch");
  }

  const Tokens original_tokens = Tokenize(pair.caption);
  for (size_t i = 0; i < n; ++i) {
    CandidateRecord& r = out[i];
    r.pair_id = pair.id;
    r.candidate_index = i;
    r.raw = raws[i];
    r.caption = captions[i];

    CriteriaVerdict& v = r.verdict;
    v.sim_original = sims[0];
    v.sim_candidate = sims[i + 1];
    v.crossmodal = v.sim_candidate > v.sim_original;

    if (models == 0 || nli_rows[i].size() != models) {
      throw ProviderError("pair " + pair.id + ": nli partial response (expected " +
                          std::to_string(models) + " model scores)");
    }
    for (double s : nli_rows[i]) {
      if (!(s >= 0.0 && s <= 1.0)) throw ProviderError("pair " + pair.id + ": nli score outside [0, 1]");
    }
    v.nli_scores = nli_rows[i];
    v.unimodal = UnimodalSuccess(v.nli_scores, cfg.criteria.tau);

    const EditScript script = Align(original_tokens, Tokenize(captions[i]));
    v.edit_distance = script.distance;
    v.distance = static_cast<double>(script.distance) < l_d / 2.0;

    PairAnnotations ann{annotations[0], annotations[i + 1]};
    AuxiliaryResult aux = EvalAuxiliary(pair.caption, raws[i], cfg.criteria, &ann);
    v.auxiliary = aux.success;
    v.aux_failures = aux.failures;
    v.UpdateTotal();

    r.tokens = RenderTokens(ExtractAttributeTokens(script, ann.original, ann.candidate));
  }
  return out;
}

std::vector<CandidatePool> PoolsFromRecords(const std::vector<CandidateRecord>& records) {
  std::vector<CandidatePool> pools;
  std::map<std::string, size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.pair_id, pools.size());
    if (inserted) pools.push_back({r.pair_id, {}});
    auto& cands = pools[it->second].candidates;
    if (r.candidate_index != cands.size()) {
      throw std::invalid_argument("verdicts for " + r.pair_id + " are not in candidate order");
    }
    cands.push_back({r.caption, r.verdict, r.tokens});
  }
  return pools;
}

SelectionOutcome SelectFromPools(const std::vector<CandidatePool>& pools, const CampaignConfig& cfg) {
  SelectionOutcome out;
  const uint64_t seed = DeriveSeed(cfg.seed, "selection");
  out.manifest = {{"seed", seed},
                  {"campaign_seed", cfg.seed},
                  {"strategy", std::string(ToString(cfg.selection.strategy))},
                  {"k", cfg.selection.k},
                  {"objective", cfg.selection.objective}};

  if (cfg.selection.strategy == SelectionStrategy::kBestOfN) {
    out.selections = SelectBestOfN(pools, seed);
    out.manifest["fallback_pairs"] = 0;
  } else {
    std::vector<CandidatePool> successful;
    std::vector<CandidatePool> failed;
    for (const auto& p : pools) (p.SuccessSet().empty() ? failed : successful).push_back(p);
    Rng rng(DeriveSeed(seed, "gibbs"));
    auto objective = MakeObjective(cfg.selection.objective);
    GibbsOptions options;
    options.k = cfg.selection.k;
    // Start from the best_of_n draw so gibbs never ends below it.
    for (const auto& s : SelectBestOfN(successful, seed)) options.initial[s.pair_id] = s.candidate_index;
    SelectionState state = GibbsSelect(successful, options, rng, *objective);
    out.selections = SelectionsFromState(state, successful);
    auto rest = SelectBestOfN(failed, seed);
    out.selections.insert(out.selections.end(), rest.begin(), rest.end());
    out.manifest["sweeps"] = state.sweeps;
    out.manifest["changes"] = state.changes;
    out.manifest["objective_value"] = state.objective;
    out.manifest["fallback_pairs"] = failed.size();
  }
  std::sort(out.selections.begin(), out.selections.end(),
            [](const Selection& a, const Selection& b) { return a.pair_id < b.pair_id; });
  out.manifest["final_entropy"] = FrequencyOf(out.selections, pools).Entropy();
  out.manifest["selected"] = out.selections.size();
  return out;
}

CampaignReport BuildReport(const std::vector<CandidatePool>& pools,
                           const std::vector<Selection>& selections, const Corpus& corpus,
                           const CampaignConfig& cfg, size_t excluded, const json& selection_manifest) {
  std::map<std::string, const CandidatePool*> by_id;
  for (const auto& p : pools) by_id[p.pair_id] = &p;

  std::vector<CriteriaVerdict> chosen;
  std::vector<CriteriaVerdict> all;
  std::vector<DiversitySample> samples;
  for (const auto& s : selections) {
    const Candidate& c = by_id.at(s.pair_id)->candidates.at(s.candidate_index);
    chosen.push_back(c.verdict);
    samples.push_back({s.pair_id, c.verdict.distance, c.tokens});
  }
  for (const auto& p : pools) {
    for (const auto& c : p.candidates) all.push_back(c.verdict);
  }
  if (chosen.empty()) throw std::runtime_error("no evaluated pairs to report on");

  CampaignReport r;
  r.asr = AggregateAsr(chosen);
  r.diversity = ComputeDiversity(samples);
  const AsrReport candidate_asr = AggregateAsr(all);

  size_t with_success = 0;
  for (const auto& p : pools) with_success += !p.SuccessSet().empty();

  r.json = {{"corpus", corpus.name},
            {"split", cfg.split ? std::string(ToString(*cfg.split)) : std::string("all")},
            {"l_d", corpus.l_d},
            {"distance_threshold", corpus.l_d / 2.0},
            {"prompt", PromptKindName(cfg.prompt)},
            {"round", cfg.round},
            {"n", cfg.n},
            {"pairs", pools.size() + excluded},
            {"evaluated_pairs", pools.size()},
            {"excluded_pairs", excluded},
            {"candidates", all.size()},
            {"pairs_with_success", with_success},
            {"asr", AsrColumns(r.asr)},
            {"candidate_asr", AsrColumns(candidate_asr)},
            {"diversity", ToJson(r.diversity)},
            {"selection",
             {{"strategy", selection_manifest.at("strategy")},
              {"k", selection_manifest.at("k")},
              {"objective", selection_manifest.at("objective")},
              {"final_entropy", selection_manifest.at("final_entropy")}}}};
  return r;
}

AttackResult RunAttack(const LoadedConfig& loaded, const fs::path& out_dir,
                       std::optional<size_t> budget_opt, ProviderSet* external) {
  const CampaignConfig& cfg = loaded.config;
  const size_t budget = budget_opt.value_or(cfg.n);
  if (budget < 1) throw StageError("attack", "budget must be >= 1");

  Corpus corpus = InStage("ingest", [&] {
    Corpus full = Ingest(cfg.corpus_path, cfg.corpus_format);
    Corpus c = cfg.split ? full.FilterSplit(*cfg.split) : full;
    if (c.pairs.empty()) throw CorpusError("no pairs in the selected split");
    return c;
  });

  CheckProviders(cfg);
  std::optional<ProviderSet> owned;
  if (!external) owned.emplace(InStage("providers", [&] { return ProviderSet::FromConfig(cfg); }));
  ProviderSet& providers = external ? *external : *owned;

  fs::create_directories(out_dir);
  WriteFile(out_dir / kConfigFile, Pretty(loaded.Snapshot()));
  WriteFile(out_dir / kPairsFile, ToJsonl(corpus));
  WriteCampaignMeta(out_dir, corpus, cfg, budget, corpus.pairs.size());

  // Pair-level fan-out. Results land in per-pair slots so the output order
  // never depends on scheduling.
  const size_t total = corpus.pairs.size();
  std::vector<std::vector<std::string>> raws(total);
  std::vector<std::vector<CandidateRecord>> results(total);
  std::vector<std::string> errors(total);
  std::atomic<size_t> next{0};
  std::atomic<uint64_t> completions{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const DataPair& pair = corpus.pairs[i];
      try {
        const std::string prompt = RenderPrompt(cfg.prompt, pair.modality, pair.caption, corpus.l_d);
        auto out = providers.generator->Generate(prompt, budget, SamplingFor(cfg, pair.id));
        completions.fetch_add(out.size());
        if (out.size() != budget) {
          throw ProviderError("generation returned " + std::to_string(out.size()) + " of " +
                              std::to_string(budget) + " completions");
        }
        raws[i] = out;
        results[i] = EvaluateCandidates(pair, out, corpus.l_d, cfg, providers);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const size_t workers = std::min(cfg.workers, total);
  std::vector<std::thread> threads;
  for (size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  std::string candidates_jsonl, verdicts_jsonl, exclusions_jsonl;
  std::vector<CandidateRecord> records;
  size_t excluded = 0;
  for (size_t i = 0; i < total; ++i) {
    const std::string& id = corpus.pairs[i].id;
    for (size_t k = 0; k < raws[i].size(); ++k) {
      candidates_jsonl += json{{"pair_id", id}, {"candidate_index", k}, {"raw", raws[i][k]}}.dump() + "\n";
    }
    if (!errors[i].empty()) {
      ++excluded;
      exclusions_jsonl += json{{"pair_id", id}, {"error", errors[i]}}.dump() + "\n";
      continue;
    }
    for (auto& r : results[i]) {
      verdicts_jsonl += ToJson(r).dump() + "\n";
      records.push_back(std::move(r));
    }
  }
  WriteFile(out_dir / kCandidatesFile, candidates_jsonl);
  WriteFile(out_dir / kVerdictsFile, verdicts_jsonl);
  WriteFile(out_dir / kExclusionsFile, exclusions_jsonl);
  WriteFile(out_dir / kStatsFile, Pretty({{"providers", providers.Stats()},
                                          {"completions", completions.load()},
                                          {"budget", budget},
                                          {"pairs", total}}));

  if (static_cast<double>(excluded) > cfg.max_exclusion_rate * static_cast<double>(total)) {
    throw StageError("attack", std::to_string(excluded) + " of " + std::to_string(total) +
                                   " pairs excluded after provider failures (first: " +
                                   [&] {
                                     for (const auto& e : errors) if (!e.empty()) return e;
                                     return std::string();
                                   }() + ")");
  }

  AttackResult result;
  result.dir = out_dir;
  result.pairs = total;
  result.excluded = excluded;
  result.completions = completions.load();
  result.report = Finalize(out_dir, PoolsFromRecords(records), corpus, cfg, budget, excluded);
  return result;
}

AttackResult EvaluateCampaign(const fs::path& dir, const std::vector<std::string>& overrides,
                              ProviderSet* external) {
  Campaign c = InStage("load", [&] { return LoadCampaign(dir, overrides); });
  const CampaignConfig& cfg = c.config.config;
  CheckProviders(cfg);
  std::optional<ProviderSet> owned;
  if (!external) owned.emplace(InStage("providers", [&] { return ProviderSet::FromConfig(cfg); }));
  ProviderSet& providers = external ? *external : *owned;

  std::map<std::string, std::vector<std::string>> raws;
  InStage("load", [&] {
    for (const auto& j : ReadJsonl(dir / kCandidatesFile)) {
      auto& v = raws[j.at("pair_id").get<std::string>()];
      if (j.at("candidate_index").get<size_t>() != v.size()) {
        throw std::runtime_error("candidates.jsonl is not in candidate order");
      }
      v.push_back(j.at("raw").get<std::string>());
    }
    return 0;
  });

  std::vector<CandidateRecord> records;
  std::string verdicts_jsonl, exclusions_jsonl;
  size_t excluded = 0;
  for (const auto& pair : c.corpus.pairs) {
    auto it = raws.find(pair.id);
    std::string error;
    if (it == raws.end() || it->second.size() != c.budget) {
      error = "missing candidates";
    } else {
      try {
        for (auto& r : EvaluateCandidates(pair, it->second, c.corpus.l_d, cfg, providers)) {
          verdicts_jsonl += ToJson(r).dump() + "\n";
          records.push_back(std::move(r));
        }
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    if (!error.empty()) {
      ++excluded;
      exclusions_jsonl += json{{"pair_id", pair.id}, {"error", error}}.dump() + "\n";
    }
  }
  const size_t total = c.corpus.pairs.size();
  if (static_cast<double>(excluded) > cfg.max_exclusion_rate * static_cast<double>(total)) {
    throw StageError("evaluate", std::to_string(excluded) + " of " + std::to_string(total) +
                                     " pairs excluded");
  }
  WriteFile(dir / kConfigFile, Pretty(c.config.Snapshot()));
  WriteFile(dir / kVerdictsFile, verdicts_jsonl);
  WriteFile(dir / kExclusionsFile, exclusions_jsonl);

  AttackResult result;
  result.dir = dir;
  result.pairs = total;
  result.excluded = excluded;
  result.report = Finalize(dir, PoolsFromRecords(records), c.corpus, cfg, c.budget, excluded);
  return result;
}

AttackResult SelectCampaign(const fs::path& dir, const std::vector<std::string>& overrides) {
  Campaign c = InStage("load", [&] { return LoadCampaign(dir, overrides); });
  auto records = InStage("load", [&] { return LoadVerdicts(dir); });
  const size_t excluded = CountExclusions(dir);
  WriteFile(dir / kConfigFile, Pretty(c.config.Snapshot()));

  AttackResult result;
  result.dir = dir;
  result.pairs = c.total_pairs;
  result.excluded = excluded;
  result.report = Finalize(dir, InStage("load", [&] { return PoolsFromRecords(records); }),
                           c.corpus, c.config.config, c.budget, excluded);
  return result;
}

json ToJson(const RftRecord& r) {
  return {{"pair_id", r.pair_id},
          {"candidate_index", r.candidate_index},
          {"messages",
           {{{"role", "system"}, {"content", r.system}},
            {{"role", "user"}, {"content", r.user}},
            {{"role", "assistant"}, {"content", r.assistant}}}}};
}

RftExport BuildRftExport(const std::vector<CandidatePool>& pools, const Corpus& corpus,
                         const CampaignConfig& cfg) {
  std::vector<CandidatePool> successful = SuccessfulPools(pools);
  const size_t dropped = pools.size() - successful.size();

  SelectionOutcome sel;
  if (!successful.empty()) sel = SelectFromPools(successful, cfg);

  std::map<std::string, const CandidatePool*> by_id;
  for (const auto& p : successful) by_id[p.pair_id] = &p;

  RftExport out;
  for (const auto& s : sel.selections) {
    const DataPair* pair = corpus.Find(s.pair_id);
    if (!pair) throw std::runtime_error("selection refers to unknown pair " + s.pair_id);
    const Candidate& c = by_id.at(s.pair_id)->candidates.at(s.candidate_index);
    if (!c.verdict.total) throw std::logic_error("export candidate failed a criterion");
    out.records.push_back({s.pair_id, s.candidate_index, std::string(kRftSystemInstruction),
                           RenderPrompt(cfg.prompt, pair->modality, pair->caption, corpus.l_d),
                           std::string(kCaptionPrefix) + c.text});
  }
  out.manifest = {{"round", cfg.round},
                  {"seed", cfg.seed},
                  {"strategy", std::string(ToString(cfg.selection.strategy))},
                  {"k", cfg.selection.k},
                  {"objective", cfg.selection.objective},
                  {"n", cfg.n},
                  {"large_n", cfg.large_n},
                  {"pools", pools.size()},
                  {"m_d_hat", out.records.size()},
                  {"dropped_pools", dropped},
                  {"empty", out.records.empty()},
                  {"entropy", successful.empty() ? 0.0
                                                 : FrequencyOf(sel.selections, successful).Entropy()},
                  {"prompt", PromptKindName(cfg.prompt)},
                  {"system_instruction", std::string(kRftSystemInstruction)},
                  {"fine_tune", FineTuneHyperparameters()},
                  {"test_time_assumption", kTestTimeAssumption}};
  return out;
}

RftExport ExportRft(const fs::path& dir, const std::optional<fs::path>& out_dir,
                    const std::vector<std::string>& overrides) {
  Campaign c = InStage("load", [&] { return LoadCampaign(dir, overrides); });
  auto records = InStage("load", [&] { return LoadVerdicts(dir); });
  RftExport exp = InStage("export-rft", [&] {
    return BuildRftExport(PoolsFromRecords(records), c.corpus, c.config.config);
  });
  exp.manifest["budget"] = c.budget;
  exp.manifest["split"] = ReadJson(dir / kCampaignFile).at("split");
  const fs::path target = out_dir.value_or(dir);
  const std::string body = ToJsonl(exp.records);
  exp.manifest["records_sha256"] = Sha256Hex(body);
  WriteFile(target / kRftFile, body);
  WriteFile(target / kRftManifestFile, Pretty(exp.manifest));
  return exp;
}

RoundResult RunRound(const LoadedConfig& loaded, const fs::path& out_root) {
  const CampaignConfig& cfg = loaded.config;
  const size_t r = cfg.round;
  const ProviderSpec generator = InStage("round", [&] { return cfg.GenerationFor(r); });

  std::string previous_digest;
  if (r > 0) {
    const fs::path prev = out_root / ("round_" + std::to_string(r - 1)) / kRoundManifestFile;
    if (!fs::exists(prev)) {
      throw StageError("round", "round " + std::to_string(r - 1) + " has not been run (" +
                                    prev.string() + " missing)");
    }
    previous_digest = InStage("round", [&] { return ReadJson(prev).at("export_digest").get<std::string>(); });
  }

  RoundResult result;
  result.round = r;
  result.dir = out_root / ("round_" + std::to_string(r));

  LoadedConfig train = loaded;
  train.config.generation = generator;
  train.config.split = Split::kTrain;
  AttackResult train_run = RunAttack(train, result.dir / "train", cfg.large_n);
  RftExport exp = ExportRft(result.dir / "train");
  result.export_digest = exp.manifest.at("records_sha256").get<std::string>();

  LoadedConfig test = loaded;
  test.config.generation = generator;
  test.config.split = Split::kTest;
  AttackResult test_run = RunAttack(test, result.dir / "test", cfg.n);

  const std::string next = std::to_string(r + 1);
  result.next_steps = "Fine-tune the base generator, reset to its original checkpoint, on " +
                      (result.dir / "train" / kRftFile).string() +
                      " using rft_manifest.json fine_tune settings; register the endpoint as "
                      "round_generators." + next + " and rerun with --set round=" + next + ".";
  result.manifest = {{"round", r},
                     {"generator", generator.ToJson()},
                     {"train", {{"split", "train"}, {"budget", cfg.large_n}, {"asr", AsrColumns(train_run.report.asr)}}},
                     {"test", {{"split", "test"}, {"budget", cfg.n}, {"asr", AsrColumns(test_run.report.asr)}}},
                     {"m_d_hat", exp.manifest.at("m_d_hat")},
                     {"export_digest", result.export_digest},
                     {"previous_export_digest", r > 0 ? json(previous_digest) : json(nullptr)},
                     {"test_time_assumption", kTestTimeAssumption},
                     {"next_steps", result.next_steps}};
  WriteFile(result.dir / kRoundManifestFile, Pretty(result.manifest));
  return result;
}

json TransferMatrix(const fs::path& dir, const std::vector<std::string>& overrides) {
  Campaign c = InStage("load", [&] { return LoadCampaign(dir, overrides); });
  const CampaignConfig& cfg = c.config.config;
  auto records = InStage("load", [&] { return LoadVerdicts(dir); });
  auto pools = InStage("load", [&] { return PoolsFromRecords(records); });
  std::vector<Selection> selections;
  InStage("load", [&] {
    for (const auto& j : ReadJsonl(dir / kSelectionFile)) selections.push_back(SelectionFromJson(j));
    return 0;
  });
  if (selections.empty()) throw StageError("transfer", "campaign has no selected samples");
  if (cfg.transfer_targets.empty()) throw StageError("transfer", "no transfer.targets configured");

  std::map<std::string, const CandidatePool*> by_id;
  for (const auto& p : pools) by_id[p.pair_id] = &p;

  std::unique_ptr<ResponseCache> cache;
  if (auto d = CacheDirFor(cfg)) cache = std::make_unique<ResponseCache>(*d);

  json rows = json::array();
  std::string csv = "source,target,total_asr,cross_asr\n";
  for (const auto& target : cfg.transfer_targets) {
    std::vector<CriteriaVerdict> verdicts = InStage("transfer", [&] {
      if (const std::string err = HealthCheck(target.spec); !err.empty()) throw ProviderError(err);
      std::shared_ptr<EmbeddingProvider> embedder;
      std::shared_ptr<ItmProvider> itm;
      std::unique_ptr<CrossmodalScorer> scorer;
      if (target.kind == CrossmodalBackend::kItm) {
        itm = MakeItmProvider(target.spec, cache.get());
        scorer = std::make_unique<ItmScorer>(*itm);
      } else {
        embedder = MakeEmbeddingProvider(target.spec, cache.get());
        scorer = std::make_unique<EmbeddingScorer>(*embedder);
      }
      std::vector<CriteriaVerdict> out;
      for (const auto& s : selections) {
        const DataPair* pair = c.corpus.Find(s.pair_id);
        if (!pair) throw std::runtime_error("unknown pair " + s.pair_id);
        CriteriaVerdict v = by_id.at(s.pair_id)->candidates.at(s.candidate_index).verdict;
        const std::vector<std::string> texts = {pair->caption, s.caption};
        const auto sims = scorer->Score(*pair, texts);
        if (sims.size() != 2) throw ProviderError("crossmodal score count mismatch");
        v.sim_original = sims[0];
        v.sim_candidate = sims[1];
        v.crossmodal = v.sim_candidate > v.sim_original;
        v.UpdateTotal();
        out.push_back(std::move(v));
      }
      return out;
    });
    const AsrReport asr = AggregateAsr(verdicts);
    rows.push_back({{"source", cfg.name}, {"target", target.name}, {"total", asr.total}, {"cross", asr.cross}});
    std::ostringstream line;
    line.precision(17);
    line << cfg.name << ',' << target.name << ',' << asr.total << ',' << asr.cross << '\n';
    csv += line.str();
  }
  WriteFile(dir / kTransferFile, csv);
  return {{"source", cfg.name}, {"rows", rows}};
}

}  // namespace mac
