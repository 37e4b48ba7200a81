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

#include "aon/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace aon {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string join(const std::vector<Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

void require_positive(const std::vector<Index>& v, const char* what) {
  for (Index x : v) {
    if (x < 1) throw ConfigError(std::string(what) + ": widths must be positive");
  }
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (kv.values_.count(key)) throw ConfigError(where + ": duplicate key `" + key + "`");
    kv.values_[key] = value;
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::int64_t v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(origin_ + ": `" + key + "` expects an integer, got `" + s + "`");
  }
  return v;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(origin_ + ": `" + key + "` expects a number, got `" + s + "`");
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(origin_ + ": `" + key + "` expects a boolean, got `" + s + "`");
}

std::vector<Index> KeyValues::get_ints(const std::string& key,
                                       const std::vector<Index>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<Index> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    Index v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size()) {
      throw ConfigError(origin_ + ": `" + key + "` expects a comma-separated integer list");
    }
    out.push_back(v);
  }
  return out;
}

void KeyValues::require_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    if (!known.count(k)) throw ConfigError(origin_ + ": unknown key `" + k + "`");
  }
}

EncodeMode parse_mode(const std::string& name) {
  if (name == "aon") return EncodeMode::kAon;
  if (name == "concat_channel") return EncodeMode::kConcatChannel;
  if (name == "concat_temporal") return EncodeMode::kConcatTemporal;
  if (name == "hn_only") return EncodeMode::kHnOnly;
  throw ConfigError("unknown encoder mode `" + name +
                    "` (expected aon, concat_channel, concat_temporal or hn_only)");
}

std::string mode_name(EncodeMode mode) {
  switch (mode) {
    case EncodeMode::kAon: return "aon";
    case EncodeMode::kConcatChannel: return "concat_channel";
    case EncodeMode::kConcatTemporal: return "concat_temporal";
    case EncodeMode::kHnOnly: return "hn_only";
  }
  return "aon";
}

Index EncoderConfig::bcnn_output_size() const { return input_size / 2 / 2; }

void EncoderConfig::validate() const {
  if (input_size < 4) throw ConfigError("input_size must be at least 4");
  if (bcnn_channels.size() != 4) throw ConfigError("bcnn_channels needs 4 widths");
  if (tower_channels.size() != 5) throw ConfigError("tower_channels needs 5 widths");
  if (cn_channels.size() != 2) throw ConfigError("cn_channels needs 2 widths");
  require_positive(bcnn_channels, "bcnn_channels");
  require_positive(tower_channels, "tower_channels");
  require_positive(cn_channels, "cn_channels");
  if (blstm_hidden < 1 || cn_hidden < 1) throw ConfigError("hidden widths must be positive");
  Index h = bcnn_output_size();
  for (int block = 0; block < 5 && h > 1; ++block) h = (h + 1) / 2;
  if (h != 1) {
    throw ConfigError("shared tower cannot reduce height " + std::to_string(bcnn_output_size()) +
                      " to 1 with five (2,1) pools; use input_size <= 128");
  }
}

void DecoderConfig::validate() const {
  if (hidden < 1 || attention_dim < 1 || embed_dim < 1) {
    throw ConfigError("decoder widths must be positive");
  }
  if (max_len < 1) throw ConfigError("max_len must be at least 1");
  if (symbols.empty()) throw ConfigError("symbols must not be empty");
  std::set<char> seen;
  for (char ch : symbols) {
    const auto u = static_cast<unsigned char>(ch);
    if (!(std::islower(u) || std::isdigit(u)) || !seen.insert(ch).second) {
      throw ConfigError("symbols must be distinct lowercase letters or digits");
    }
  }
}

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig c;
  if (name == "toy") return c;
  if (name == "mini") {
    c.encoder.input_size = 16;
    c.encoder.bcnn_channels = {4, 4, 8, 8};
    c.encoder.tower_channels = {8, 8, 8, 8, 8};
    c.encoder.blstm_hidden = 4;
    c.encoder.cn_channels = {4, 4};
    c.encoder.cn_hidden = 8;
    c.decoder.hidden = 8;
    c.decoder.attention_dim = 8;
    c.decoder.embed_dim = 4;
    c.decoder.max_len = 6;
    c.decoder.symbols = "abc";
    return c;
  }
  if (name == "full") {
    c.encoder.input_size = 100;
    c.encoder.bcnn_channels = {32, 64, 128, 128};
    c.encoder.tower_channels = {128, 128, 128, 128, 128};
    c.encoder.blstm_hidden = 128;
    c.encoder.cn_channels = {64, 64};
    c.encoder.cn_hidden = 256;
    c.decoder.hidden = 256;
    return c;
  }
  throw ConfigError("unknown preset `" + name + "` (expected mini, toy or full)");
}

const std::set<std::string>& ModelConfig::keys() {
  static const std::set<std::string> k = {
      "preset",         "input_size", "bcnn_channels", "tower_channels", "blstm_hidden",
      "cn_channels",    "cn_hidden",  "mode",          "decoder_hidden", "attention_dim",
      "embed_dim",      "max_len",    "symbols"};
  return k;
}

ModelConfig ModelConfig::from_key_values(const KeyValues& kv) {
  ModelConfig c = preset(kv.get_string("preset", "toy"));
  auto& e = c.encoder;
  auto& d = c.decoder;
  e.input_size = kv.get_int("input_size", e.input_size);
  e.bcnn_channels = kv.get_ints("bcnn_channels", e.bcnn_channels);
  e.tower_channels = kv.get_ints("tower_channels", e.tower_channels);
  e.blstm_hidden = kv.get_int("blstm_hidden", e.blstm_hidden);
  e.cn_channels = kv.get_ints("cn_channels", e.cn_channels);
  e.cn_hidden = kv.get_int("cn_hidden", e.cn_hidden);
  e.mode = parse_mode(kv.get_string("mode", mode_name(e.mode)));
  d.hidden = kv.get_int("decoder_hidden", d.hidden);
  d.attention_dim = kv.get_int("attention_dim", d.attention_dim);
  d.embed_dim = kv.get_int("embed_dim", d.embed_dim);
  d.max_len = kv.get_int("max_len", d.max_len);
  d.symbols = kv.get_string("symbols", d.symbols);
  c.validate();
  return c;
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "input_size = " << encoder.input_size << "\n"
      << "bcnn_channels = " << join(encoder.bcnn_channels) << "\n"
      << "tower_channels = " << join(encoder.tower_channels) << "\n"
      << "blstm_hidden = " << encoder.blstm_hidden << "\n"
      << "cn_channels = " << join(encoder.cn_channels) << "\n"
      << "cn_hidden = " << encoder.cn_hidden << "\n"
      << "mode = " << mode_name(encoder.mode) << "\n"
      << "decoder_hidden = " << decoder.hidden << "\n"
      << "attention_dim = " << decoder.attention_dim << "\n"
      << "embed_dim = " << decoder.embed_dim << "\n"
      << "max_len = " << decoder.max_len << "\n"
      << "symbols = " << decoder.symbols << "\n";
  return out.str();
}

void ModelConfig::validate() const {
  encoder.validate();
  decoder.validate();
}

}  // namespace aon
