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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mac/campaign_config.h"
#include "mac/criteria.h"
#include "mac/errors.h"
#include "mac/orchestrator.h"
#include "mac/prompts.h"

using namespace mac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path ConfigPath() { return fs::path(MAC_SOURCE_DIR) / "configs/mock_campaign.json"; }

fs::path Fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mac_orch_test_" + name);
  fs::remove_all(dir);
  return dir;
}

LoadedConfig Load(std::vector<std::string> overrides = {}) {
  ::unsetenv("MAC_CACHE_DIR");
  return LoadCampaignConfig(ConfigPath(), overrides);
}

std::vector<json> Jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(ReadFile(p));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(MAC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config loading, overrides and validation") {
  LoadedConfig c = Load({"n=2", "selection.strategy=\"gibbs\"", "criteria.tau=0.4"});
  CHECK(c.config.n == 2);
  CHECK(c.config.selection.strategy == SelectionStrategy::kGibbs);
  CHECK(c.config.criteria.tau == 0.4);
  CHECK(c.config.corpus_path.is_absolute());
  CHECK(c.Snapshot().at("overrides").size() == 3);
  CHECK_THROWS_AS(Load({"n=0"}), ConfigError);
  CHECK_THROWS_AS(Load({"selection.strategy=\"greedy\""}), ConfigError);
  CHECK_THROWS_AS(Load({"prompt=\"paint\""}), ConfigError);
  CHECK_THROWS_AS(c.config.GenerationFor(1), ConfigError);
  json doc = {{"n", 1}};
  CHECK_NOTHROW(ApplyOverride(doc, "a.b=true"));
  CHECK(doc.at("a").at("b") == true);
  ApplyOverride(doc, "name=plain words");
  CHECK(doc.at("name") == "plain words");
}

TEST_CASE("mock campaign is deterministic across runs and cache states") {
  const fs::path cache = Fresh("cache");
  LoadedConfig plain = Load();
  LoadedConfig cached = Load({"cache_dir=\"" + cache.string() + "\""});
  auto a = RunAttack(plain, Fresh("det_a"));
  auto b = RunAttack(plain, Fresh("det_b"));
  auto cold = RunAttack(cached, Fresh("det_cold"));
  auto warm = RunAttack(cached, Fresh("det_warm"));
  const std::string ra = ReadFile(a.dir / "report.json");
  CHECK(ra == ReadFile(b.dir / "report.json"));
  CHECK(ra == ReadFile(cold.dir / "report.json"));
  CHECK(ra == ReadFile(warm.dir / "report.json"));
  CHECK(ReadFile(a.dir / "verdicts.jsonl") == ReadFile(warm.dir / "verdicts.jsonl"));
  CHECK(a.pairs == 20);
  CHECK(a.completions == 20 * 4);

  const json cold_stats = json::parse(ReadFile(cold.dir / "stats.json"));
  const json warm_stats = json::parse(ReadFile(warm.dir / "stats.json"));
  CHECK(warm_stats.at("providers").at("cache").at("hits").get<uint64_t>() > 0);
  CHECK(warm_stats.at("providers").at("cache").at("misses").get<uint64_t>() == 0);
  CHECK(cold_stats.at("providers").at("cache").at("misses").get<uint64_t>() > 0);
}

TEST_CASE("report layout") {
  auto r = RunAttack(Load(), Fresh("layout"));
  const json report = json::parse(ReadFile(r.dir / "report.json"));
  for (const char* key : {"corpus", "split", "l_d", "distance_threshold", "prompt", "n", "pairs",
                          "excluded_pairs", "candidates", "asr", "candidate_asr", "diversity", "selection"}) {
    CAPTURE(key);
    CHECK(report.contains(key));
  }
  const json asr = report.at("asr");
  const double total = asr.at("total");
  for (const char* col : {"cross", "uni", "dist", "aux"}) CHECK(asr.at(col).get<double>() >= total);
  CHECK(report.at("distance_threshold").get<double>() == doctest::Approx(report.at("l_d").get<double>() / 2));
  CHECK(Jsonl(r.dir / "candidates.jsonl").size() == 80);
  CHECK(Jsonl(r.dir / "selection.jsonl").size() == 20);
  CHECK(ReadFile(r.dir / "token_distribution.csv").starts_with("token,count,probability\n"));
}

TEST_CASE("budget monotonicity with nested candidate sets") {
  LoadedConfig cfg = Load();
  double last = -1;
  std::vector<std::string> prev_raws;
  for (size_t n : {1, 4, 8}) {
    auto r = RunAttack(cfg, Fresh("budget_" + std::to_string(n)), n);
    // Candidate lists are prefixes of each other.
    auto rows = Jsonl(r.dir / "candidates.jsonl");
    std::map<std::string, std::vector<std::string>> per_pair;
    for (const auto& row : rows) per_pair[row.at("pair_id")].push_back(row.at("raw"));
    std::vector<std::string> first;
    for (const auto& [id, raws] : per_pair) first.push_back(raws.front());
    if (!prev_raws.empty()) CHECK(first == prev_raws);
    prev_raws = first;
    CHECK(r.report.asr.total >= last);
    last = r.report.asr.total;
  }
}

TEST_CASE("stages re-run from stored files") {
  auto r = RunAttack(Load(), Fresh("stages"));
  const std::string report = ReadFile(r.dir / "report.json");
  // Re-evaluation with the same providers reproduces the report.
  EvaluateCampaign(r.dir);
  CHECK(ReadFile(r.dir / "report.json") == report);
  SelectCampaign(r.dir);
  CHECK(ReadFile(r.dir / "report.json") == report);
  // Selection without providers: a broken generator spec does not matter.
  auto gibbs = SelectCampaign(r.dir, {"selection.strategy=\"gibbs\""});
  CHECK(gibbs.report.asr.total >= r.report.asr.total);
  const json manifest = json::parse(ReadFile(r.dir / "selection_manifest.json"));
  CHECK(manifest.at("strategy") == "gibbs");
  CHECK_THROWS_AS(SelectCampaign(Fresh("missing")), StageError);
}

TEST_CASE("rft export integrity") {
  auto r = RunAttack(Load(), Fresh("rft"), 8);
  for (const char* strategy : {"best_of_n", "gibbs"}) {
    CAPTURE(strategy);
    RftExport exp = ExportRft(r.dir, std::nullopt, {std::string("selection.strategy=\"") + strategy + "\""});
    auto verdicts = Jsonl(r.dir / "verdicts.jsonl");
    std::map<std::pair<std::string, size_t>, json> by_key;
    for (const auto& v : verdicts) by_key[{v.at("pair_id"), v.at("candidate_index")}] = v;
    const json pairs = Jsonl(r.dir / "pairs.jsonl");
    std::map<std::string, std::string> originals;
    for (const auto& p : pairs) originals[p.at("id")] = p.at("caption");

    for (const auto& rec : exp.records) {
      const json& v = by_key.at({rec.pair_id, rec.candidate_index});
      CHECK(v.at("total") == true);
      // The assistant target parses back to the recorded caption.
      ParsedOutput parsed = ParseGeneratedCaption(rec.assistant);
      REQUIRE(parsed.ok);
      CHECK(parsed.payload == v.at("caption"));
      CHECK(rec.system == kRftSystemInstruction);
      CHECK(rec.user.find("- " + originals.at(rec.pair_id) + "\n") != std::string::npos);
    }
    CHECK(exp.manifest.at("m_d_hat") == exp.records.size());
    CHECK(Jsonl(r.dir / "rft.jsonl").size() == exp.records.size());
    CHECK(exp.manifest.at("records_sha256").get<std::string>().size() == 64);
  }
}

TEST_CASE("round chaining") {
  const fs::path root = Fresh("rounds");
  LoadedConfig r0 = Load({"large_n=8", "n=2"});
  RoundResult res = RunRound(r0, root);
  CHECK(fs::exists(root / "round_0/train/rft.jsonl"));
  CHECK(fs::exists(root / "round_0/test/report.json"));
  CHECK(res.manifest.at("previous_export_digest").is_null());
  CHECK(res.next_steps.find("round_generators.1") != std::string::npos);

  // Round 1 without a registered generator fails in the round stage.
  CHECK_THROWS_AS(RunRound(Load({"round=1"}), root), StageError);
  LoadedConfig r1 = Load({"round=1", "large_n=8", "n=2",
                          "round_generators={\"1\":{\"backend\":\"mock\",\"seed\":8,\"model_id\":\"ft-r1\"}}"});
  CHECK_THROWS_AS(RunRound(r1, Fresh("rounds_missing")), StageError);
  RoundResult res1 = RunRound(r1, root);
  CHECK(res1.manifest.at("previous_export_digest") == res.export_digest);
}

TEST_CASE("transfer matrix self diagonal") {
  auto r = RunAttack(Load({"n=8"}), Fresh("transfer"));
  json m = TransferMatrix(r.dir);
  const auto rows = m.at("rows");
  REQUIRE(rows.size() == 3);
  // Target mock-embed-s1 is the attacked encoder.
  CHECK(rows[0].at("total").get<double>() == doctest::Approx(r.report.asr.total).epsilon(1e-12));
  CHECK(rows[0].at("cross").get<double>() == doctest::Approx(1.0 * r.report.asr.cross));
  const std::string csv = ReadFile(r.dir / "transfer.csv");
  CHECK(csv.starts_with("source,target,total_asr,cross_asr\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("provider failure beyond the exclusion budget names the stage") {
  LoadedConfig cfg = Load({"providers.nli={\"backend\":\"http\",\"base_url\":\"http://127.0.0.1:9\",\"retries\":0,\"timeout_ms\":300}"});
  try {
    RunAttack(cfg, Fresh("failing"));
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "health");
  }
}

TEST_CASE("cli exit codes and report") {
  const fs::path out = Fresh("cli");
  CHECK(RunCli("attack --config " + ConfigPath().string() + " --out " + out.string()) == 0);
  CHECK(RunCli("report --out " + out.string()) == 0);
  CHECK(RunCli("select --out " + out.string() + " --strategy gibbs --k 2") == 0);
  CHECK(RunCli("transfer --out " + out.string()) == 0);
  CHECK(RunCli("export-rft --out " + out.string()) == 0);
  CHECK(RunCli("ingest --corpus " + (fs::path(MAC_SOURCE_DIR) / "tests/fixtures/mock_corpus.jsonl").string()) == 0);
  CHECK(RunCli("mock-serve-check --config " + ConfigPath().string()) == 0);
  CHECK(RunCli("report --out " + Fresh("cli_missing").string()) == 1);
  CHECK(RunCli("attack --config /nonexistent.json --out " + out.string()) == 1);
  CHECK(RunCli("attack --bogus-flag") == 2);
  CHECK(RunCli("") == 2);
}
