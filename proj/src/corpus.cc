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

#include "mac/corpus.h"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "mac/errors.h"
#include "mac/tokenizer.h"

namespace mac {
namespace {

using nlohmann::json;

std::string LineError(size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

struct RawRecord {
  size_t line;
  std::map<std::string, std::string> fields;
};

std::vector<RawRecord> ParseJsonl(std::string_view text) {
  std::vector<RawRecord> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (eol == text.size()) break;
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(LineError(line_no, std::string("malformed JSON: ") + e.what()));
    }
    if (!j.is_object()) throw CorpusError(LineError(line_no, "record is not an object"));
    RawRecord rec{line_no, {}};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_string()) {
        throw CorpusError(LineError(line_no, "field '" + it.key() + "' is not a string"));
      }
      rec.fields[it.key()] = it.value().get<std::string>();
    }
    out.push_back(std::move(rec));
    if (eol == text.size()) break;
  }
  return out;
}

// RFC 4180 CSV with a header row. Quoted fields may span lines.
std::vector<RawRecord> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> row_lines;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_data = false;
  size_t line = 1;
  size_t row_start = 1;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (row_has_data || row.size() > 1 || !row[0].empty()) {
      rows.push_back(std::move(row));
      row_lines.push_back(row_start);
    }
    row.clear();
    row_has_data = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_data = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_data = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_start = line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw CorpusError(LineError(row_start, "unterminated quoted field"));
  if (!field.empty() || !row.empty()) end_row();

  std::vector<RawRecord> out;
  if (rows.empty()) return out;
  const auto& header = rows[0];
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw CorpusError(LineError(row_lines[r], "expected " + std::to_string(header.size()) +
                                                    " columns, got " +
                                                    std::to_string(rows[r].size())));
    }
    RawRecord rec{row_lines[r], {}};
    for (size_t c = 0; c < header.size(); ++c) rec.fields[header[c]] = rows[r][c];
    out.push_back(std::move(rec));
  }
  return out;
}

const std::string& Require(const RawRecord& rec, const std::string& key) {
  auto it = rec.fields.find(key);
  if (it == rec.fields.end()) {
    throw CorpusError(LineError(rec.line, "missing field '" + key + "'"));
  }
  return it->second;
}

DataPair ToPair(const RawRecord& rec) {
  DataPair p;
  p.id = Require(rec, "id");
  p.raw_caption = Require(rec, "caption");
  p.asset_ref = Require(rec, "asset");
  try {
    p.modality = ParseModality(Require(rec, "modality"));
    p.split = ParseSplit(Require(rec, "split"));
  } catch (const std::invalid_argument& e) {
    throw CorpusError(LineError(rec.line, e.what()));
  }
  if (p.id.empty()) throw CorpusError(LineError(rec.line, "empty id"));
  return p;
}

void ValidateAndNormalize(std::vector<DataPair>& pairs, const std::vector<size_t>* lines) {
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto& p = pairs[i];
    std::string where = lines ? LineError((*lines)[i], "") : "pair '" + p.id + "': ";
    if (!seen.insert(p.id).second) {
      throw CorpusError(where + "duplicate id '" + p.id + "'");
    }
    p.caption = NormalizeCaption(p.raw_caption);
    if (Tokenize(p.caption).empty()) {
      throw CorpusError(where + "caption of '" + p.id + "' is empty after normalization");
    }
    if (p.asset_ref.empty()) throw CorpusError(where + "empty asset for '" + p.id + "'");
  }
}

}  // namespace

std::string_view ToString(Modality m) {
  switch (m) {
    case Modality::kImage: return "image";
    case Modality::kVideo: return "video";
    case Modality::kAudio: return "audio";
  }
  return "image";
}

std::string_view ToString(Split s) { return s == Split::kTrain ? "train" : "test"; }

Modality ParseModality(std::string_view s) {
  if (s == "image") return Modality::kImage;
  if (s == "video") return Modality::kVideo;
  if (s == "audio") return Modality::kAudio;
  throw std::invalid_argument("unknown modality '" + std::string(s) + "'");
}

Split ParseSplit(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

CorpusFormat ParseCorpusFormat(std::string_view s) {
  if (s == "auto" || s.empty()) return CorpusFormat::kAuto;
  if (s == "jsonl") return CorpusFormat::kJsonl;
  if (s == "csv") return CorpusFormat::kCsv;
  throw std::invalid_argument("unknown corpus format '" + std::string(s) + "'");
}

double AverageTokenLength(const std::vector<DataPair>& pairs) {
  if (pairs.empty()) return 0.0;
  // Integer sum first so the mean does not depend on pair order.
  size_t total = 0;
  for (const auto& p : pairs) total += Tokenize(p.caption).size();
  return static_cast<double>(total) / static_cast<double>(pairs.size());
}

Corpus Corpus::FilterSplit(Split split) const {
  Corpus out;
  out.name = name;
  for (const auto& p : pairs) {
    if (p.split == split) out.pairs.push_back(p);
  }
  out.l_d = AverageTokenLength(out.pairs);
  return out;
}

const DataPair* Corpus::Find(std::string_view id) const {
  for (const auto& p : pairs) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

Corpus IngestText(std::string_view text, CorpusFormat format, std::string name) {
  if (format == CorpusFormat::kAuto) {
    size_t first = text.find_first_not_of(" \t\r\n");
    format = (first != std::string_view::npos && text[first] == '{') ? CorpusFormat::kJsonl
                                                                     : CorpusFormat::kCsv;
  }
  std::vector<RawRecord> records =
      format == CorpusFormat::kJsonl ? ParseJsonl(text) : ParseCsv(text);
  std::vector<DataPair> pairs;
  std::vector<size_t> lines;
  for (const auto& rec : records) {
    pairs.push_back(ToPair(rec));
    lines.push_back(rec.line);
  }
  ValidateAndNormalize(pairs, &lines);
  Corpus c;
  c.name = std::move(name);
  c.pairs = std::move(pairs);
  c.l_d = AverageTokenLength(c.pairs);
  return c;
}

Corpus Ingest(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (format == CorpusFormat::kAuto) {
    auto ext = path.extension().string();
    if (ext == ".csv") format = CorpusFormat::kCsv;
    if (ext == ".jsonl" || ext == ".json") format = CorpusFormat::kJsonl;
  }
  return IngestText(ss.str(), format, path.stem().string());
}

Corpus MakeCorpus(std::string name, std::vector<DataPair> pairs) {
  ValidateAndNormalize(pairs, nullptr);
  Corpus c;
  c.name = std::move(name);
  c.pairs = std::move(pairs);
  c.l_d = AverageTokenLength(c.pairs);
  return c;
}

std::string ToJsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs) {
    json j = {{"id", p.id},
              {"caption", p.raw_caption},
              {"asset", p.asset_ref},
              {"modality", ToString(p.modality)},
              {"split", ToString(p.split)}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace mac
