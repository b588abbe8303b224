// Copyright 2026 The lanewarp Authors.
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

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace lanewarp {

// Path-prefix lookup where the longest matching prefix wins.
template <typename T>
class PrefixMap {
 public:
  void insert(std::string prefix, T value) {
    entries_.insert_or_assign(std::move(prefix), std::move(value));
  }

  const T* resolve(std::string_view path) const {
    const T* best = nullptr;
    size_t best_len = 0;
    for (const auto& [prefix, value] : entries_) {
      if (path.substr(0, prefix.size()) == prefix &&
          (best == nullptr || prefix.size() > best_len)) {
        best = &value;
        best_len = prefix.size();
      }
    }
    return best;
  }

  std::optional<std::string> matching_prefix(std::string_view path) const {
    std::optional<std::string> best;
    for (const auto& [prefix, value] : entries_) {
      if (path.substr(0, prefix.size()) == prefix &&
          (!best || prefix.size() > best->size())) {
        best = prefix;
      }
    }
    return best;
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, T>& entries() const { return entries_; }

 private:
  std::map<std::string, T> entries_;
};

}  // namespace lanewarp
