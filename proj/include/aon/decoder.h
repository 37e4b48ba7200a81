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

#ifndef AON_DECODER_H_
#define AON_DECODER_H_

#include <string>
#include <vector>

#include "aon/config.h"
#include "aon/init.h"
#include "aon/tensor.h"
#include "aon/vocab.h"

namespace aon {

template <typename T>
struct DecoderState {
  Tensor<T> h;  // [N,H]
  Tensor<T> c;  // [N,H]
};

// Encoded sequence plus its attention keys, computed once per batch.
template <typename T>
struct AttentionMemory {
  Tensor<T> values;  // [L,N,D]
  Tensor<T> keys;    // [L,N,A] = values * Wh
};

// One sample's decode record. Every step (including the final EOS) has one
// attention vector and one output distribution.
struct DecodeTrace {
  std::vector<std::vector<double>> alphas;  // per step, length L
  std::vector<std::vector<double>> dists;   // per step, vocabulary size
  std::vector<int> emitted;                 // per step symbol id
  bool truncated = false;                   // max_len reached before EOS
  std::size_t size() const { return emitted.size(); }
};

struct Decoded {
  std::string text;
  DecodeTrace trace;
};

// Additive-attention LSTM decoder.
template <typename T>
class Decoder {
 public:
  Decoder(const DecoderConfig& config, Index feature_dim, ParameterSet<T>& params, Rng& rng);

  const DecoderConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  Index feature_dim() const { return feature_dim_; }

  AttentionMemory<T> prepare(const Tensor<T>& sequence) const;
  DecoderState<T> initial_state(Index batch) const;

  // alpha [L,N] = softmax_j(v . tanh(Ws s + Wh h_j)).
  Tensor<T> attend(const DecoderState<T>& state, const AttentionMemory<T>& memory) const;
  // g [N,D] = sum_j alpha_j h_j.
  Tensor<T> glimpse(const Tensor<T>& alpha, const AttentionMemory<T>& memory) const;
  // LSTM step on [embed(y_prev), g]; y_prev < 0 selects the all-zero start
  // embedding.
  DecoderState<T> step(const std::vector<int>& y_prev, const Tensor<T>& g,
                       const DecoderState<T>& state) const;
  // W^T s, [N,V] (no bias).
  Tensor<T> logits(const DecoderState<T>& state) const;
  // softmax(W^T s), [N,V].
  Tensor<T> output(const DecoderState<T>& state) const;

  // Teacher-forced negative log-likelihood summed over steps up to and
  // including EOS, averaged over the batch. targets[n] ends with EOS.
  Tensor<T> seq_loss(const Tensor<T>& sequence,
                     const std::vector<std::vector<int>>& targets) const;

  // Per-sample teacher-forced sum of log-probabilities.
  std::vector<double> forced_log_probs(const Tensor<T>& sequence,
                                       const std::vector<std::vector<int>>& targets) const;

  // Feeds back argmax symbols until EOS or max_len.
  std::vector<Decoded> greedy_decode(const Tensor<T>& sequence, Index max_len) const;

  // For each sample, the lexicon word with the highest forced log-probability
  // (ties: first in lexicon order). Words with out-of-vocabulary symbols are
  // skipped with a warning; ContractError when none remain.
  std::vector<std::string> lexicon_decode(const Tensor<T>& sequence,
                                          const std::vector<std::string>& lexicon) const;

 private:
  DecoderConfig config_;
  Vocabulary vocab_;
  Index feature_dim_;
  Tensor<T> attn_ws_, attn_wh_, attn_v_;
  Tensor<T> embed_;
  Tensor<T> lstm_wx_, lstm_wh_, lstm_b_;
  Tensor<T> out_w_;
};

// Lexicon file: UTF-8, one word per line; blank lines ignored, words
// lowercased.
std::vector<std::string> load_lexicon(const std::string& path);

}  // namespace aon

#endif  // AON_DECODER_H_
