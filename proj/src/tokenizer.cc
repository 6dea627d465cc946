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

#include "mac/tokenizer.h"

#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace mac {
namespace {

const icu::Normalizer2& Nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *nfc;
}

icu::UnicodeString ToNfc(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = Nfc().normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return out;
}

std::string ToUtf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

// Splits on whitespace; calls emit(begin, end) with UTF-16 offsets.
template <typename Fn>
void SplitWhitespace(const icu::UnicodeString& s, Fn&& emit) {
  int32_t i = 0;
  const int32_t n = s.length();
  while (i < n) {
    while (i < n && u_isUWhiteSpace(s.char32At(i))) i = s.moveIndex32(i, 1);
    int32_t start = i;
    while (i < n && !u_isUWhiteSpace(s.char32At(i))) i = s.moveIndex32(i, 1);
    if (i > start) emit(start, i);
  }
}

}  // namespace

Tokens Tokenize(std::string_view text) {
  Tokens tokens;
  if (text.empty()) return tokens;
  icu::UnicodeString s = ToNfc(icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))));
  s.toLower(icu::Locale::getRoot());
  s = ToNfc(s);
  SplitWhitespace(s, [&](int32_t begin, int32_t end) {
    while (begin < end && u_ispunct(s.char32At(begin))) {
      begin = s.moveIndex32(begin, 1);
    }
    while (end > begin) {
      int32_t prev = s.moveIndex32(end, -1);
      if (!u_ispunct(s.char32At(prev))) break;
      end = prev;
    }
    if (end > begin) tokens.push_back(ToUtf8(s.tempSubStringBetween(begin, end)));
  });
  return tokens;
}

std::string NormalizeCaption(std::string_view text) {
  icu::UnicodeString s = ToNfc(icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))));
  std::string out;
  SplitWhitespace(s, [&](int32_t begin, int32_t end) {
    if (!out.empty()) out.push_back(' ');
    out += ToUtf8(s.tempSubStringBetween(begin, end));
  });
  return out;
}

std::string JoinTokens(const Tokens& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace mac
