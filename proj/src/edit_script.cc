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

#include "mac/edit_script.h"

#include <algorithm>
#include <stdexcept>

namespace mac {

std::string_view ToString(EditKind k) {
  switch (k) {
    case EditKind::kInsert: return "insert";
    case EditKind::kDelete: return "delete";
    case EditKind::kSubstitute: return "substitute";
  }
  return "insert";
}

EditScript Align(const Tokens& source, const Tokens& target) {
  const size_t n = source.size();
  const size_t m = target.size();
  // Full (n+1)x(m+1) table, row-major; captions are short.
  std::vector<size_t> d((n + 1) * (m + 1));
  auto at = [&](size_t i, size_t j) -> size_t& { return d[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      size_t diag = at(i - 1, j - 1) + (source[i - 1] == target[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditScript script;
  script.distance = at(n, m);
  script.source_len = n;
  script.target_len = m;

  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const size_t cur = at(i, j);
    if (i > 0 && j > 0 && source[i - 1] == target[j - 1] && cur == at(i - 1, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && cur == at(i - 1, j - 1) + 1) {
      script.ops.push_back({EditKind::kSubstitute, i - 1, j - 1, source[i - 1], target[j - 1]});
      --i;
      --j;
    } else if (i > 0 && cur == at(i - 1, j) + 1) {
      script.ops.push_back({EditKind::kDelete, i - 1, j, source[i - 1], std::nullopt});
      --i;
    } else {
      script.ops.push_back({EditKind::kInsert, i, j - 1, std::nullopt, target[j - 1]});
      --j;
    }
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

size_t EditDistance(const Tokens& source, const Tokens& target) {
  const Tokens& a = source.size() >= target.size() ? source : target;
  const Tokens& b = source.size() >= target.size() ? target : source;
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t prev = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t tmp = row[j];
      row[j] = std::min({row[j] + 1,                              // deletion
                         row[j - 1] + 1,                          // insertion
                         prev + (a[i - 1] == b[j - 1] ? 0 : 1)});  // substitution
      prev = tmp;
    }
  }
  return row[b.size()];
}

Tokens ApplyScript(const Tokens& source, const EditScript& script) {
  Tokens out;
  out.reserve(script.target_len);
  size_t next = 0;  // next source token not yet copied
  for (const auto& op : script.ops) {
    if (op.position < next || op.position > source.size()) {
      throw std::invalid_argument("edit op position out of order or range");
    }
    while (next < op.position) out.push_back(source[next++]);
    switch (op.kind) {
      case EditKind::kInsert:
        if (!op.new_word) throw std::invalid_argument("insert without new_word");
        out.push_back(*op.new_word);
        break;
      case EditKind::kDelete:
      case EditKind::kSubstitute:
        if (op.position >= source.size() || !op.old_word || source[op.position] != *op.old_word) {
          throw std::invalid_argument("edit op does not match source token");
        }
        if (op.kind == EditKind::kSubstitute) {
          if (!op.new_word) throw std::invalid_argument("substitute without new_word");
          out.push_back(*op.new_word);
        }
        ++next;
        break;
    }
  }
  while (next < source.size()) out.push_back(source[next++]);
  return out;
}

}  // namespace mac
