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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mac/corpus.h"
#include "mac/errors.h"
#include "mac/rng.h"
#include "mac/tokenizer.h"

using namespace mac;

TEST_CASE("tokenize basic sentence") {
  CHECK(Tokenize("A baby is sitting on a bed.") ==
        Tokens{"a", "baby", "is", "sitting", "on", "a", "bed"});
}

TEST_CASE("tokenize empty and blank input") {
  CHECK(Tokenize("").empty());
  CHECK(Tokenize("   \t\n ").empty());
  CHECK(Tokenize("... !!").empty());
}

TEST_CASE("tokenize strips surrounding punctuation only") {
  CHECK(Tokenize("Keys, keys!") == Tokens{"keys", "keys"});
  CHECK(Tokenize("\"Don't\" stop (now)") == Tokens{"don't", "stop", "now"});
  CHECK(Tokenize("a t-shirt") == Tokens{"a", "t-shirt"});
}

TEST_CASE("tokenize applies NFC and lowercases non-ASCII") {
  // "Café" with a combining acute accent vs the precomposed form.
  CHECK(Tokenize("Cafe\xCC\x81") == Tokenize("Caf\xC3\xA9"));
  CHECK(Tokenize("\xC3\x89T\xC3\x89") == Tokens{"\xC3\xA9t\xC3\xA9"});
  // No-break space separates words.
  CHECK(Tokenize("red\xC2\xA0" "car") == Tokens{"red", "car"});
}

TEST_CASE("tokenize is idempotent on joined output") {
  Rng rng(3);
  const std::vector<std::string> pieces = {"A", "dog,", "(runs)", "on", "the", "Beach!", "...", "x-ray", "N\xC3\x89"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    size_t len = rng.UniformIndex(10);
    for (size_t i = 0; i < len; ++i) text += pieces[rng.UniformIndex(pieces.size())] + " ";
    Tokens once = Tokenize(text);
    CHECK(Tokenize(JoinTokens(once)) == once);
  }
}

TEST_CASE("normalize caption keeps case and collapses whitespace") {
  CHECK(NormalizeCaption("  A  dog\truns.  ") == "A dog runs.");
}

namespace {
const char kThree[] =
    R"({"id":"a","caption":"A dog runs.","asset":"a.jpg","modality":"image","split":"train"}
{"id":"b","caption":"Two cats sleep on a sofa.","asset":"b.jpg","modality":"image","split":"test"}
{"id":"c","caption":"A man rides a red bike.","asset":"c.mp4","modality":"video","split":"test"}
)";
}

TEST_CASE("ingest three line corpus") {
  Corpus c = IngestText(kThree, CorpusFormat::kJsonl, "three");
  REQUIRE(c.pairs.size() == 3);
  CHECK(c.l_d == doctest::Approx((3 + 6 + 6) / 3.0));
  CHECK(c.pairs[2].modality == Modality::kVideo);
  CHECK(c.Find("b")->split == Split::kTest);
  Corpus test = c.FilterSplit(Split::kTest);
  CHECK(test.pairs.size() == 2);
  CHECK(test.l_d == doctest::Approx(6.0));
}

TEST_CASE("ingest reports duplicate id") {
  std::string text = std::string(kThree) +
                     R"({"id":"b","caption":"again","asset":"x.jpg","modality":"image","split":"test"})" "\n";
  try {
    IngestText(text, CorpusFormat::kJsonl, "dup");
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("ingest reports line numbers for malformed records") {
  const std::string bad = std::string(kThree) + "{\"id\":\"d\",\"caption\":\"x\"}\n";
  try {
    IngestText(bad, CorpusFormat::kJsonl, "bad");
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(IngestText("{not json\n", CorpusFormat::kJsonl, "bad"), CorpusError);
  CHECK_THROWS_AS(
      IngestText(R"({"id":"x","caption":" ... ","asset":"a","modality":"image","split":"test"})",
                 CorpusFormat::kJsonl, "empty"),
      CorpusError);
  CHECK_THROWS_AS(
      IngestText(R"({"id":"x","caption":"ok","asset":"a","modality":"smell","split":"test"})",
                 CorpusFormat::kJsonl, "modality"),
      CorpusError);
}

TEST_CASE("csv adapter matches jsonl") {
  const char csv[] =
      "id,caption,asset,modality,split\n"
      "a,A dog runs.,a.jpg,image,train\n"
      "b,\"Two cats sleep on a sofa.\",b.jpg,image,test\n"
      "c,\"A man rides a \"\"red\"\" bike.\",c.mp4,video,test\n";
  Corpus from_csv = IngestText(csv, CorpusFormat::kCsv, "csv");
  Corpus from_jsonl = IngestText(kThree, CorpusFormat::kJsonl, "jsonl");
  REQUIRE(from_csv.pairs.size() == 3);
  CHECK(from_csv.pairs[2].caption == "A man rides a \"red\" bike.");
  CHECK(from_csv.l_d == from_jsonl.l_d);
}

TEST_CASE("round trip through ToJsonl") {
  Corpus c = IngestText(kThree, CorpusFormat::kJsonl, "three");
  Corpus again = IngestText(ToJsonl(c), CorpusFormat::kJsonl, "three");
  REQUIRE(again.pairs.size() == c.pairs.size());
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    CHECK(again.pairs[i].id == c.pairs[i].id);
    CHECK(again.pairs[i].caption == c.pairs[i].caption);
    CHECK(again.pairs[i].raw_caption == c.pairs[i].raw_caption);
    CHECK(again.pairs[i].asset_ref == c.pairs[i].asset_ref);
    CHECK(again.pairs[i].modality == c.pairs[i].modality);
    CHECK(again.pairs[i].split == c.pairs[i].split);
  }
  CHECK(again.l_d == c.l_d);
}

TEST_CASE("l_d is invariant under reordering") {
  Corpus c = IngestText(kThree, CorpusFormat::kJsonl, "three");
  auto pairs = c.pairs;
  std::reverse(pairs.begin(), pairs.end());
  CHECK(MakeCorpus("rev", pairs).l_d == c.l_d);
}

TEST_CASE("ingest from file with auto format") {
  const auto dir = std::filesystem::temp_directory_path() / "mac_text_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "corpus.jsonl";
  std::ofstream(path) << kThree;
  Corpus c = Ingest(path);
  CHECK(c.name == "corpus");
  CHECK(c.pairs.size() == 3);
  CHECK_THROWS_AS(Ingest(dir / "missing.jsonl"), CorpusError);

  Corpus fixture = Ingest(std::filesystem::path(MAC_SOURCE_DIR) / "tests/fixtures/mock_corpus.jsonl");
  CHECK(fixture.FilterSplit(Split::kTest).pairs.size() == 20);
}
