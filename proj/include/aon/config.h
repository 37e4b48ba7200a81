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

#ifndef AON_CONFIG_H_
#define AON_CONFIG_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aon/tensor.h"

namespace aon {

// Plain-text `key = value` settings with `#` comments. Keys are unique;
// typed getters throw ConfigError naming the key on malformed values.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& origin = "config");
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<Index> get_ints(const std::string& key, const std::vector<Index>& fallback) const;

  // Throws ConfigError for any key outside `known`.
  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

enum class EncodeMode { kAon, kConcatChannel, kConcatTemporal, kHnOnly };

EncodeMode parse_mode(const std::string& name);
std::string mode_name(EncodeMode mode);

struct EncoderConfig {
  Index input_size = 32;
  std::vector<Index> bcnn_channels = {8, 16, 32, 32};
  std::vector<Index> tower_channels = {32, 32, 32, 32, 32};
  Index blstm_hidden = 32;
  std::vector<Index> cn_channels = {16, 16};
  Index cn_hidden = 64;
  EncodeMode mode = EncodeMode::kAon;

  // Side of the square BCNN output; also the sequence length L.
  Index bcnn_output_size() const;
  Index seq_len() const { return bcnn_output_size(); }
  Index feature_dim() const { return 2 * blstm_hidden; }
  // Throws ConfigError when the pooling schedule cannot reach height 1 or a
  // width list has the wrong arity.
  void validate() const;
};

struct DecoderConfig {
  Index hidden = 64;
  Index attention_dim = 128;
  Index embed_dim = 64;
  Index max_len = 25;
  // Output symbols before EOS; EOS takes the final index.
  std::string symbols = "abcdefghijklmnopqrstuvwxyz0123456789";

  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;

  // Named presets: "mini" (gradient checks), "toy" (desk-scale training),
  // "full" (100 px input, widths up to 128).
  static ModelConfig preset(const std::string& name);
  // Starts from the preset in key `preset` (default toy) and applies overrides.
  static ModelConfig from_key_values(const KeyValues& kv);
  // Canonical text form; parses back to an equal config.
  std::string to_text() const;
  void validate() const;

  static const std::set<std::string>& keys();
};

}  // namespace aon

#endif  // AON_CONFIG_H_
