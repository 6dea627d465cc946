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

// Generation prompt templates: one general template and one per specific
// operation. Placeholders are {contents_modality}, {caption} and
// {max_word_distance_plus_one}.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mac/corpus.h"
#include "mac/criteria.h"

namespace mac {

// nullopt selects the general template.
using PromptKind = std::optional<OpKind>;

std::string PromptKindName(PromptKind kind);  // "general", "replace-object", ...
// Throws std::invalid_argument on an unknown name.
PromptKind ParsePromptKind(std::string_view name);

// Unrendered template text.
std::string_view PromptTemplate(PromptKind kind);

// floor(l_d / 2) + 1, so "fewer than" in the prompt matches d_E < l_d / 2.
// Throws std::invalid_argument unless l_d > 0.
long MaxWordDistancePlusOne(double l_d);

std::string RenderPrompt(PromptKind kind, Modality modality, std::string_view caption, double l_d);

// System instruction attached to exported fine-tuning conversations.
inline constexpr std::string_view kRftSystemInstruction =
    "You are a caption editor that writes hard negative captions.";

}  // namespace mac
