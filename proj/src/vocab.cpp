/* Copyright 2026 The AON Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "aon/vocab.h"

#include <cctype>

#include "aon/tensor.h"

namespace aon {

Vocabulary::Vocabulary() : Vocabulary("abcdefghijklmnopqrstuvwxyz0123456789") {}

Vocabulary::Vocabulary(const std::string& symbols) : symbols_(symbols) {
  lookup_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const auto u = static_cast<unsigned char>(symbols_[i]);
    if (lookup_[u] != -1) throw ConfigError("vocabulary: duplicate symbol");
    lookup_[u] = static_cast<int>(i);
  }
}

int Vocabulary::index_of(char ch) const {
  return lookup_[static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(ch)))];
}

bool Vocabulary::contains(const std::string& text) const {
  for (char ch : text) {
    if (index_of(ch) < 0) return false;
  }
  return true;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  ids.reserve(text.size() + 1);
  for (char ch : text) {
    const int id = index_of(ch);
    if (id < 0) {
      throw ContractError("symbol `" + std::string(1, ch) + "` in label `" + text +
                          "` is not in the vocabulary");
    }
    ids.push_back(id);
  }
  ids.push_back(eos());
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == eos()) break;
    if (id < 0 || id > eos()) throw ContractError("decode: symbol id out of range");
    out.push_back(symbols_[static_cast<std::size_t>(id)]);
  }
  return out;
}

std::string Vocabulary::lowercase(std::string text) {
  for (char& ch : text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return text;
}

}  // namespace aon
