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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mac {

enum class Modality { kImage, kVideo, kAudio };
enum class Split { kTrain, kTest };

std::string_view ToString(Modality m);
std::string_view ToString(Split s);
Modality ParseModality(std::string_view s);
Split ParseSplit(std::string_view s);

// One ground-truth caption and the opaque locator of its paired asset.
struct DataPair {
  std::string id;
  std::string raw_caption;
  std::string caption;  // NormalizeCaption(raw_caption), never empty
  std::string asset_ref;
  Modality modality = Modality::kImage;
  Split split = Split::kTest;
};

struct Corpus {
  std::string name;
  std::vector<DataPair> pairs;
  // Mean token count of the captions; 0 for an empty corpus.
  double l_d = 0.0;

  // Sub-corpus of one split with its own l_d. Thresholds always come from
  // the split being attacked.
  Corpus FilterSplit(Split split) const;
  const DataPair* Find(std::string_view id) const;
};

enum class CorpusFormat { kAuto, kJsonl, kCsv };

CorpusFormat ParseCorpusFormat(std::string_view s);

// Loads a corpus file. Malformed records raise CorpusError with the 1-based
// line number; duplicate ids are a hard error. The corpus name defaults to
// the file stem.
Corpus Ingest(const std::filesystem::path& path,
              CorpusFormat format = CorpusFormat::kAuto);

// Same, from in-memory text (name given explicitly).
Corpus IngestText(std::string_view text, CorpusFormat format,
                  std::string name);

// Builds a corpus from already-constructed pairs; normalizes, validates and
// computes l_d exactly as Ingest does.
Corpus MakeCorpus(std::string name, std::vector<DataPair> pairs);

// Re-serializes as JSON Lines using the raw captions.
std::string ToJsonl(const Corpus& corpus);

double AverageTokenLength(const std::vector<DataPair>& pairs);

}  // namespace mac
