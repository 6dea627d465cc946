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

// mac: command-line driver for attack campaigns.
//
// Exit codes: 0 ok, 1 stage failure (stage named on stderr), 2 usage error.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mac/campaign_config.h"
#include "mac/corpus.h"
#include "mac/errors.h"
#include "mac/orchestrator.h"
#include "mac/providers.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<size_t> k;
  std::string corpus;
  std::string format = "auto";
  std::string dest;
};

std::vector<std::string> Overrides(const Options& o) {
  std::vector<std::string> v = o.sets;
  if (o.seed) v.push_back("seed=" + std::to_string(*o.seed));
  if (o.strategy) v.push_back("selection.strategy=\"" + *o.strategy + "\"");
  if (o.k) v.push_back("selection.k=" + std::to_string(*o.k));
  return v;
}

mac::LoadedConfig Load(const Options& o) {
  if (o.config.empty()) throw mac::StageError("config", "--config is required");
  try {
    return mac::LoadCampaignConfig(o.config, Overrides(o));
  } catch (const mac::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw mac::StageError("config", e.what());
  }
}

fs::path RequireOut(const Options& o) {
  if (o.out.empty()) throw mac::StageError("config", "--out is required");
  return o.out;
}

void PrintAsr(const fs::path& dir) {
  const json report = json::parse(mac::ReadFile(dir / "report.json"));
  std::cout << report.at("asr").dump() << "\n";
}

int Ingest(const Options& o) {
  std::string path = o.corpus;
  mac::CorpusFormat format = mac::ParseCorpusFormat(o.format);
  if (path.empty()) {
    const auto cfg = Load(o);
    path = cfg.config.corpus_path.string();
    format = cfg.config.corpus_format;
  }
  if (path.empty()) throw mac::StageError("ingest", "--corpus or --config is required");
  mac::Corpus corpus;
  try {
    corpus = mac::Ingest(path, format);
  } catch (const std::exception& e) {
    throw mac::StageError("ingest", e.what());
  }
  std::map<std::string, json> splits;
  for (auto split : {mac::Split::kTrain, mac::Split::kTest}) {
    mac::Corpus part = corpus.FilterSplit(split);
    splits[std::string(mac::ToString(split))] = {{"pairs", part.pairs.size()}, {"l_d", part.l_d}};
  }
  json summary = {{"name", corpus.name}, {"pairs", corpus.pairs.size()}, {"l_d", corpus.l_d}, {"splits", splits}};
  if (!o.out.empty()) mac::WriteFile(fs::path(o.out), mac::ToJsonl(corpus));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int Attack(const Options& o) {
  const auto cfg = Load(o);
  auto result = mac::RunAttack(cfg, RequireOut(o));
  std::cerr << "attack: " << result.pairs << " pairs, " << result.excluded << " excluded, "
            << result.completions << " completions\n";
  PrintAsr(result.dir);
  return 0;
}

int Evaluate(const Options& o) {
  auto result = mac::EvaluateCampaign(RequireOut(o), Overrides(o));
  PrintAsr(result.dir);
  return 0;
}

int Select(const Options& o) {
  auto result = mac::SelectCampaign(RequireOut(o), Overrides(o));
  PrintAsr(result.dir);
  return 0;
}

int ExportRft(const Options& o) {
  std::optional<fs::path> dest;
  if (!o.dest.empty()) dest = o.dest;
  auto exp = mac::ExportRft(RequireOut(o), dest, Overrides(o));
  std::cout << exp.manifest.dump(2) << "\n";
  return 0;
}

int Round(const Options& o) {
  const auto cfg = Load(o);
  auto result = mac::RunRound(cfg, RequireOut(o));
  std::cout << result.manifest.dump(2) << "\n";
  std::cerr << "round " << result.round << " complete. Next: " << result.next_steps << "\n";
  return 0;
}

int Transfer(const Options& o) {
  auto matrix = mac::TransferMatrix(RequireOut(o), Overrides(o));
  std::cout << matrix.dump(2) << "\n";
  return 0;
}

int Report(const Options& o) {
  try {
    PrintAsr(RequireOut(o));
  } catch (const mac::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw mac::StageError("report", e.what());
  }
  return 0;
}

// Health-checks every configured backend and probes it once.
int MockServeCheck(const Options& o) {
  const auto cfg = Load(o).config;
  std::vector<mac::ProviderSpec> specs = {cfg.embedding, cfg.nli, cfg.generation, cfg.annotation};
  if (cfg.itm) specs.push_back(*cfg.itm);
  bool ok = true;
  for (const auto& spec : specs) {
    const std::string role(mac::ToString(spec.role));
    std::string err = mac::HealthCheck(spec);
    if (err.empty()) {
      try {
        switch (spec.role) {
          case mac::ProviderRole::kEmbedding: {
            const std::vector<mac::EmbedInput> in = {mac::EmbedInput::Text("a cat")};
            mac::MakeEmbeddingProvider(spec)->Embed(in);
            break;
          }
          case mac::ProviderRole::kNli: {
            const std::vector<mac::NliPair> in = {{"a cat", "a cat"}};
            mac::MakeNliProvider(spec)->Entailment(in);
            break;
          }
          case mac::ProviderRole::kAnnotation: {
            const std::vector<std::string> in = {"a man running"};
            mac::MakeAnnotationProvider(spec)->Annotate(in);
            break;
          }
          case mac::ProviderRole::kItm:
            mac::MakeItmProvider(spec)->Score(mac::EmbedInput::Asset(mac::Modality::kImage, "cat.jpg"), "a cat");
            break;
          case mac::ProviderRole::kGeneration:
            break;  // a probe would spend a completion
        }
      } catch (const std::exception& e) {
        err = e.what();
      }
    }
    std::cout << role << ": " << (err.empty() ? "ok" : "FAILED (" + err + ")") << " ["
              << spec.Identity() << "]\n";
    ok = ok && err.empty();
  }
  if (!ok) throw mac::StageError("health", "one or more providers failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mac: multimodal adversarial compositionality campaigns"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd, bool config) {
    if (config) cmd->add_option("--config", o.config, "campaign config JSON");
    cmd->add_option("--set", o.sets, "override KEY=VALUE (dotted keys, repeatable)")->allow_extra_args(false);
    cmd->add_option("--out", o.out, "campaign directory");
    cmd->add_option("--seed", o.seed, "campaign seed");
  };

  auto* ingest = app.add_subcommand("ingest", "load a corpus and print its statistics");
  common(ingest, true);
  ingest->add_option("--corpus", o.corpus, "corpus file (overrides --config)");
  ingest->add_option("--format", o.format, "auto|jsonl|csv");

  auto* attack = app.add_subcommand("attack", "generate, evaluate, select and report");
  common(attack, true);
  attack->add_option("--strategy", o.strategy, "best_of_n|gibbs");
  attack->add_option("--k", o.k, "selection sweeps");

  auto* evaluate = app.add_subcommand("evaluate", "re-evaluate stored candidates");
  common(evaluate, false);
  evaluate->add_option("--strategy", o.strategy, "best_of_n|gibbs");
  evaluate->add_option("--k", o.k, "selection sweeps");

  auto* select = app.add_subcommand("select", "re-select from stored verdicts");
  common(select, false);
  select->add_option("--strategy", o.strategy, "best_of_n|gibbs");
  select->add_option("--k", o.k, "selection sweeps");

  auto* exp = app.add_subcommand("export-rft", "export fine-tuning data from a campaign");
  common(exp, false);
  exp->add_option("--strategy", o.strategy, "best_of_n|gibbs");
  exp->add_option("--k", o.k, "selection sweeps");
  exp->add_option("--dest", o.dest, "output directory (default: the campaign)");

  auto* round = app.add_subcommand("round", "run one self-training round");
  common(round, true);
  round->add_option("--strategy", o.strategy, "best_of_n|gibbs");
  round->add_option("--k", o.k, "selection sweeps");

  auto* transfer = app.add_subcommand("transfer", "re-score selected samples under other targets");
  common(transfer, false);

  auto* report = app.add_subcommand("report", "print the ASR columns of a campaign");
  common(report, false);

  auto* check = app.add_subcommand("mock-serve-check", "health-check configured providers");
  common(check, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return Ingest(o);
    if (*attack) return Attack(o);
    if (*evaluate) return Evaluate(o);
    if (*select) return Select(o);
    if (*exp) return ExportRft(o);
    if (*round) return Round(o);
    if (*transfer) return Transfer(o);
    if (*report) return Report(o);
    if (*check) return MockServeCheck(o);
  } catch (const mac::StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << "\n";
    return 1;
  } catch (const mac::ConfigError& e) {
    std::cerr << "stage config failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "stage unknown failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
