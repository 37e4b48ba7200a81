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

#ifndef AON_VOCAB_H_
#define AON_VOCAB_H_

#include <array>
#include <string>
#include <vector>

namespace aon {

// Output symbols plus a trailing EOS. Labels are lowercased on ingestion.
class Vocabulary {
 public:
  // 26 lowercase letters then 10 digits, 37 entries with EOS.
  Vocabulary();
  explicit Vocabulary(const std::string& symbols);

  int size() const { return static_cast<int>(symbols_.size()) + 1; }
  int eos() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbols() const { return symbols_; }

  // Index of `ch` after lowercasing, or -1 when out of vocabulary.
  int index_of(char ch) const;
  bool contains(const std::string& text) const;
  // Lowercased symbol ids followed by EOS. Throws ContractError naming the
  // offending character when `text` has an out-of-vocabulary symbol.
  std::vector<int> encode(const std::string& text) const;
  // Symbols up to (excluding) the first EOS.
  std::string decode(const std::vector<int>& ids) const;

  static std::string lowercase(std::string text);

 private:
  std::string symbols_;
  std::array<int, 256> lookup_{};
};

}  // namespace aon

#endif  // AON_VOCAB_H_
