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

#include <string>
#include <string_view>
#include <vector>

namespace mac {

using Tokens = std::vector<std::string>;

// Word tokenizer shared by the corpus length statistic, the edit distance
// and diversity attribution, so every threshold is measured in the same unit.
//
// Steps: Unicode NFC, lowercase (root locale), split on Unicode whitespace,
// strip leading and trailing punctuation (general category P*) from each
// word, drop empty words. Inner punctuation ("don't", "t-shirt") is kept.
Tokens Tokenize(std::string_view text);

// NFC plus whitespace collapsing and trimming. Case and punctuation are
// preserved; this is the stored "normalized caption".
std::string NormalizeCaption(std::string_view text);

std::string JoinTokens(const Tokens& tokens);

}  // namespace mac
