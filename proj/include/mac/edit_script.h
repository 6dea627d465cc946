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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mac/tokenizer.h"

namespace mac {

enum class EditKind { kInsert, kDelete, kSubstitute };

std::string_view ToString(EditKind k);

struct EditOp {
  EditKind kind;
  // Index into the source sequence. For an insert this is the source token
  // the new word is placed before (may equal source length).
  size_t position = 0;
  // Index into the target sequence of the new word (insert/substitute), or
  // of the position the deleted word would have occupied (delete).
  size_t target_position = 0;
  std::optional<std::string> old_word;
  std::optional<std::string> new_word;

  bool operator==(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;  // ascending source position
  size_t distance = 0;
  size_t source_len = 0;
  size_t target_len = 0;
};

// Unit-cost word-level Levenshtein alignment. The backtrace starts at the end
// of both sequences and, among equal-cost moves, prefers match, then
// substitute, then delete, then insert; the script is therefore unique.
EditScript Align(const Tokens& source, const Tokens& target);

// Distance only, O(min(n, m)) memory.
size_t EditDistance(const Tokens& source, const Tokens& target);

// Replays `script` over `source`. Throws std::invalid_argument when the
// script does not fit the source (wrong old_word, out-of-range position).
Tokens ApplyScript(const Tokens& source, const EditScript& script);

}  // namespace mac
