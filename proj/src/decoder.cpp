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

#include "aon/decoder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include "aon/ops.h"

namespace aon {

namespace {

template <typename T>
Tensor<T> fan_in_uniform(Shape shape, Index fan_in, Rng& rng) {
  return uniform_tensor<T>(std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

void check_targets(const std::vector<std::vector<int>>& targets, int eos) {
  if (targets.empty()) throw ContractError("decoder: empty target batch");
  for (const auto& t : targets) {
    if (t.empty()) throw ContractError("decoder: empty target (minimum is [EOS])");
    if (t.back() != eos) throw ContractError("decoder: target must end with EOS");
  }
}

// Row-wise log-softmax of the entry at `target`, accumulated in double.
template <typename T>
double log_prob(const T* row, Index k, int target) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
  double z = 0;
  for (Index j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
  return static_cast<double>(row[target]) - mx - std::log(z);
}

}  // namespace

template <typename T>
Decoder<T>::Decoder(const DecoderConfig& config, Index feature_dim, ParameterSet<T>& params,
                    Rng& rng)
    : config_(config), vocab_(config.symbols), feature_dim_(feature_dim) {
  config_.validate();
  const Index hdim = config_.hidden, adim = config_.attention_dim, edim = config_.embed_dim;
  const Index vsize = vocab_.size();
  attn_ws_ = params.add("decoder.attn.ws", fan_in_uniform<T>(Shape{hdim, adim}, hdim, rng));
  attn_wh_ = params.add("decoder.attn.wh",
                        fan_in_uniform<T>(Shape{feature_dim, adim}, feature_dim, rng));
  attn_v_ = params.add("decoder.attn.v", fan_in_uniform<T>(Shape{adim, 1}, adim, rng));
  embed_ = params.add("decoder.embed", uniform_tensor<T>(Shape{vsize, edim}, 1.0, rng));
  const Index in = edim + feature_dim;
  lstm_wx_ = params.add("decoder.lstm.wx", fan_in_uniform<T>(Shape{in, 4 * hdim}, hdim, rng));
  lstm_wh_ = params.add("decoder.lstm.wh", fan_in_uniform<T>(Shape{hdim, 4 * hdim}, hdim, rng));
  Tensor<T> b(Shape{4 * hdim});
  for (Index j = hdim; j < 2 * hdim; ++j) b[j] = T(1);
  lstm_b_ = params.add("decoder.lstm.b", b);
  out_w_ = params.add("decoder.out.weight", fan_in_uniform<T>(Shape{hdim, vsize}, hdim, rng));
}

template <typename T>
AttentionMemory<T> Decoder<T>::prepare(const Tensor<T>& sequence) const {
  if (sequence.rank() != 3 || sequence.dim(2) != feature_dim_) {
    throw DimensionError("decoder: expected [L,N," + std::to_string(feature_dim_) +
                         "] features, got " + to_string(sequence.shape()));
  }
  return {sequence, linear(sequence, attn_wh_)};
}

template <typename T>
DecoderState<T> Decoder<T>::initial_state(Index batch) const {
  return {Tensor<T>(Shape{batch, config_.hidden}), Tensor<T>(Shape{batch, config_.hidden})};
}

template <typename T>
Tensor<T> Decoder<T>::attend(const DecoderState<T>& state,
                             const AttentionMemory<T>& memory) const {
  const Index len = memory.keys.dim(0), n = memory.keys.dim(1);
  Tensor<T> query = matmul(state.h, attn_ws_);
  Tensor<T> e = tanh(add_trailing(memory.keys, query));
  return softmax(reshape(linear(e, attn_v_), Shape{len, n}), 0);
}

template <typename T>
Tensor<T> Decoder<T>::glimpse(const Tensor<T>& alpha, const AttentionMemory<T>& memory) const {
  return weighted_sum(alpha, memory.values);
}

template <typename T>
DecoderState<T> Decoder<T>::step(const std::vector<int>& y_prev, const Tensor<T>& g,
                                 const DecoderState<T>& state) const {
  Tensor<T> x = concat<T>({embedding(embed_, y_prev), g}, 1);
  Tensor<T> gates = add(linear(x, lstm_wx_, lstm_b_), matmul(state.h, lstm_wh_));
  auto [h, c] = lstm_cell(gates, state.c);
  return {h, c};
}

template <typename T>
Tensor<T> Decoder<T>::logits(const DecoderState<T>& state) const {
  return matmul(state.h, out_w_);
}

template <typename T>
Tensor<T> Decoder<T>::output(const DecoderState<T>& state) const {
  return softmax(logits(state), 1);
}

template <typename T>
Tensor<T> Decoder<T>::seq_loss(const Tensor<T>& sequence,
                               const std::vector<std::vector<int>>& targets) const {
  check_targets(targets, vocab_.eos());
  const Index n = static_cast<Index>(targets.size());
  if (sequence.rank() != 3 || sequence.dim(1) != n) {
    throw DimensionError("seq_loss: batch of " + std::to_string(n) + " targets vs features " +
                         to_string(sequence.shape()));
  }
  std::size_t steps = 0;
  for (const auto& t : targets) steps = std::max(steps, t.size());
  const AttentionMemory<T> memory = prepare(sequence);
  DecoderState<T> state = initial_state(n);
  const T inv_n = T(1) / static_cast<T>(n);
  std::vector<int> prev(static_cast<std::size_t>(n), -1), target(static_cast<std::size_t>(n));
  std::vector<T> weight(static_cast<std::size_t>(n));
  Tensor<T> total;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < targets.size(); ++b) {
      const bool active = t < targets[b].size();
      target[b] = active ? targets[b][t] : 0;
      weight[b] = active ? inv_n : T(0);
    }
    Tensor<T> alpha = attend(state, memory);
    state = step(prev, glimpse(alpha, memory), state);
    Tensor<T> nll = softmax_nll(logits(state), target, weight);
    total = total.defined() ? add(total, nll) : nll;
    for (std::size_t b = 0; b < targets.size(); ++b) {
      prev[b] = t < targets[b].size() ? targets[b][t] : -1;
    }
  }
  return total;
}

template <typename T>
std::vector<double> Decoder<T>::forced_log_probs(
    const Tensor<T>& sequence, const std::vector<std::vector<int>>& targets) const {
  check_targets(targets, vocab_.eos());
  NoGradScope<T> no_grad;
  const Index n = static_cast<Index>(targets.size());
  std::size_t steps = 0;
  for (const auto& t : targets) steps = std::max(steps, t.size());
  const AttentionMemory<T> memory = prepare(sequence);
  DecoderState<T> state = initial_state(n);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  const Index k = vocab_.size();
  for (std::size_t t = 0; t < steps; ++t) {
    state = step(prev, glimpse(attend(state, memory), memory), state);
    const Tensor<T> z = logits(state);
    for (std::size_t b = 0; b < targets.size(); ++b) {
      if (t >= targets[b].size()) {
        prev[b] = -1;
        continue;
      }
      score[b] += log_prob(z.ptr() + static_cast<Index>(b) * k, k, targets[b][t]);
      prev[b] = targets[b][t];
    }
  }
  return score;
}

template <typename T>
std::vector<Decoded> Decoder<T>::greedy_decode(const Tensor<T>& sequence, Index max_len) const {
  if (max_len < 1) throw ContractError("greedy_decode: max_len must be at least 1");
  NoGradScope<T> no_grad;
  const Index len = sequence.dim(0), n = sequence.dim(1), k = vocab_.size();
  const AttentionMemory<T> memory = prepare(sequence);
  DecoderState<T> state = initial_state(n);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  std::vector<Decoded> out(static_cast<std::size_t>(n));
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  Index remaining = n;
  for (Index t = 0; t < max_len && remaining > 0; ++t) {
    const Tensor<T> alpha = attend(state, memory);
    state = step(prev, glimpse(alpha, memory), state);
    const Tensor<T> dist = output(state);
    for (Index b = 0; b < n; ++b) {
      auto& trace = out[static_cast<std::size_t>(b)].trace;
      if (done[static_cast<std::size_t>(b)]) continue;
      std::vector<double> a(static_cast<std::size_t>(len));
      for (Index j = 0; j < len; ++j) a[static_cast<std::size_t>(j)] = alpha[j * n + b];
      const T* row = dist.ptr() + b * k;
      const int best = static_cast<int>(std::max_element(row, row + k) - row);
      trace.alphas.push_back(std::move(a));
      trace.dists.emplace_back(row, row + k);
      trace.emitted.push_back(best);
      prev[static_cast<std::size_t>(b)] = best;
      if (best == vocab_.eos()) {
        done[static_cast<std::size_t>(b)] = true;
        --remaining;
      }
    }
  }
  for (Index b = 0; b < n; ++b) {
    auto& d = out[static_cast<std::size_t>(b)];
    d.trace.truncated = !done[static_cast<std::size_t>(b)];
    d.text = vocab_.decode(d.trace.emitted);
  }
  return out;
}

template <typename T>
std::vector<std::string> Decoder<T>::lexicon_decode(
    const Tensor<T>& sequence, const std::vector<std::string>& lexicon) const {
  if (lexicon.empty()) throw ContractError("lexicon_decode: empty lexicon");
  std::vector<std::string> words;
  std::vector<std::vector<int>> targets;
  std::set<std::string> seen;
  for (const auto& raw : lexicon) {
    const std::string w = Vocabulary::lowercase(raw);
    if (!vocab_.contains(w)) {
      std::cerr << "warning: lexicon word `" << raw << "` has out-of-vocabulary symbols; skipped\n";
      continue;
    }
    if (!seen.insert(w).second) continue;
    words.push_back(w);
    targets.push_back(vocab_.encode(w));
  }
  if (words.empty()) throw ContractError("lexicon_decode: no in-vocabulary words");
  const Index len = sequence.dim(0), n = sequence.dim(1), d = sequence.dim(2);
  const Index kw = static_cast<Index>(words.size());
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index b = 0; b < n; ++b) {
    // The sample's features repeated once per candidate word.
    Tensor<T> rep(Shape{len, kw, d});
    for (Index j = 0; j < len; ++j) {
      const T* src = sequence.ptr() + (j * n + b) * d;
      for (Index w = 0; w < kw; ++w) std::copy_n(src, d, rep.ptr() + (j * kw + w) * d);
    }
    const std::vector<double> score = forced_log_probs(rep, targets);
    const auto best = std::max_element(score.begin(), score.end()) - score.begin();
    out.push_back(words[static_cast<std::size_t>(best)]);
  }
  return out;
}

std::vector<std::string> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(Vocabulary::lowercase(line));
  }
  return words;
}

template class Decoder<float>;
template class Decoder<double>;

}  // namespace aon
