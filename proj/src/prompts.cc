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

#include "mac/prompts.h"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mac {

namespace {

struct NamedTemplate {
  std::string_view name;
  std::string_view text;
};

// Each paragraph is one line; "~" spacers are empty lines.
constexpr NamedTemplate kTemplates[] = {
    {"general", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption using the criteria below:

***
[Generation Criteria]
1. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
2. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
3. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"replace-object", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "object replacement" scenario using the criteria below:

***
[Generation Criteria]
1. Replace a key object in the given caption with a new object that is not in the given caption.
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"replace-attribute", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "attribute replacement" scenario using the criteria below:

***
[Generation Criteria]
1. Replace an adjective word in the given caption with a new adjective word that is not in the given caption.
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"replace-relation", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "relation replacement" scenario using the criteria below:

***
[Generation Criteria]
1. Replace an action or a spatial relationship in the given caption with a new action or spatial relationship that is not in the given caption.
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"replace-count", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "counting replacement" scenario using the criteria below:

***
[Generation Criteria]
1. Replace the numerical count of a key object in the given caption (e.g., from "two" to "three").
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"add-object", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "object addition" scenario using the criteria below:

***
[Generation Criteria]
1. Generate a new plausible but uncommon object that's not in the given caption, and then add the new object to make a new caption.
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"add-attribute", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "attribute addition" scenario using the criteria below:

***
[Generation Criteria]
1. Add a new plausible but uncommon attribute for the object in the given caption.
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"swap-object", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "object swapping" scenario using the criteria below:

***
[Generation Criteria]
1. First locate two swappable nouns in the given caption, and then swap them to make a new caption (e.g., from "woman looking at elephant" to "elephant looking at woman")
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
    {"swap-attribute", R"tpl(You will be given a caption describing the {contents_modality}. Your task is to generate a hard negative caption based on the "attribute swapping" scenario using the criteria below:

***
[Generation Criteria]
1. First locate two swappable adjectives in the given caption describing different objects, and then swap them to make a new caption (e.g., from "a red apple and a purple grape" to "a purple apple and a red grape").
2. Ensure the new caption has higher similarity to the {contents_modality} in {contents_modality}-text crossmodal model than the given caption.
3. Introduce a contradiction compared to the given caption, but avoid simple negations (e.g., using words like "no", "not", "empty", or "without").
4. Make fewer than {max_word_distance_plus_one} word-level changes (add, delete, or substitute words) to the given caption without fully rewriting it to generate the new caption.

[Given Caption]
- {caption}
***

Write only the new caption starting with "Generated Caption: ", without explanation.
)tpl"},
};

void ReplaceAll(std::string& s, std::string_view from, std::string_view to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string PromptKindName(PromptKind kind) {
  return kind ? std::string(ToString(*kind)) : std::string("general");
}

PromptKind ParsePromptKind(std::string_view name) {
  if (name == "general") return std::nullopt;
  return ParseOpKind(name);
}

std::string_view PromptTemplate(PromptKind kind) {
  const std::string name = PromptKindName(kind);
  for (const auto& t : kTemplates) {
    if (t.name == name) return t.text;
  }
  throw std::invalid_argument("no prompt template for " + name);
}

long MaxWordDistancePlusOne(double l_d) {
  if (!(l_d > 0.0) || !std::isfinite(l_d)) {
    throw std::invalid_argument("average token length must be positive");
  }
  return static_cast<long>(std::floor(l_d / 2.0)) + 1;
}

std::string RenderPrompt(PromptKind kind, Modality modality, std::string_view caption, double l_d) {
  std::string out(PromptTemplate(kind));
  const std::string limit = std::to_string(MaxWordDistancePlusOne(l_d));
  // The caption goes last so braces inside it are never expanded.
  ReplaceAll(out, "{contents_modality}", ToString(modality));
  ReplaceAll(out, "{max_word_distance_plus_one}", limit);
  ReplaceAll(out, "{caption}", caption);
  return out;
}

}  // namespace mac
