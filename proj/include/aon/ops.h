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

#ifndef AON_OPS_H_
#define AON_OPS_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "aon/tensor.h"

namespace aon {

// ---- convolution / pooling / normalization ---------------------------------

// 3x3 kernel, stride 1, pad 1. input [N,C,H,W], weight [O,C,3,3], bias [O].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

struct PoolSpec {
  Index kernel_h = 2, kernel_w = 2;
  Index stride_h = 2, stride_w = 2;
  bool ceil_mode = false;
};

// Output extent of an unpadded pooling axis. In ceil mode a final window that
// would start past the input is dropped.
Index pooled_extent(Index in, Index kernel, Index stride, bool ceil_mode);

// Max pooling over the last two axes of an [N,C,H,W] tensor.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, const PoolSpec& spec);

enum class BnMode { kTrain, kEval };

// Running moments owned by a batch-norm layer.
template <typename T>
struct BnMoments {
  Tensor<T> mean;
  Tensor<T> var;
  T momentum = T(0.9);
  T eps = T(1e-5);
};

// Train mode normalizes with batch statistics and folds them into `moments`
// (running = momentum * running + (1 - momentum) * batch, unbiased variance).
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BnMoments<T>& moments, BnMode mode);

// ---- elementwise -----------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
template <typename T>
Tensor<T> tanh(const Tensor<T>& x);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
// a + b where b's shape equals the trailing axes of a's shape.
template <typename T>
Tensor<T> add_trailing(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// Max-subtracted softmax along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// ---- reductions / linear algebra --------------------------------------------

template <typename T>
Tensor<T> sum(const Tensor<T>& x);
// [M,K] x [K,N] -> [M,N]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
// x[..., K] x w[K,N] (+ bias[N]) applied to the flattened leading axes.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias = {});

// ---- layout ----------------------------------------------------------------

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);
// out.shape[i] = x.shape[perm[i]]
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& perm);
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
// x[index] along axis 0, dropping that axis.
template <typename T>
Tensor<T> select(const Tensor<T>& x, Index index);
// Stacks equally shaped tensors along a new leading axis.
template <typename T>
Tensor<T> stack(const std::vector<Tensor<T>>& parts);
// Reverses frame order along axis 0. Pure permutation.
template <typename T>
Tensor<T> reverse_seq(const Tensor<T>& x);
// Counterclockwise quarter turn of every [S,S] plane of an [N,C,S,S] tensor:
// out[y][x] = in[x][S-1-y]. Pure permutation.
template <typename T>
Tensor<T> rot90(const Tensor<T>& x);

// ---- sequence model pieces ---------------------------------------------------

// Rows of table[V,E] gathered by ids; id < 0 yields a zero row.
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids);

// LSTM cell pointwise stage. gates [N,4H] pre-activation (i,f,g,o order),
// c_prev [N,H]. Returns (h, c).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_cell(const Tensor<T>& gates, const Tensor<T>& c_prev);

// out[n,:] = sum_j weights[j,n] * seq[j,n,:] for weights [L,N], seq [L,N,D].
template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& weights, const Tensor<T>& seq);

// sum_n w[n] * -log softmax(logits[n])[targets[n]] as a scalar; rows with
// w[n] == 0 are skipped.
template <typename T>
Tensor<T> softmax_nll(const Tensor<T>& logits, const std::vector<int>& targets,
                      const std::vector<T>& weights);

// While alive, folds the on/off pattern of every relu and the argmax choice
// of every max pool evaluated on this thread into a signature. Two forward
// passes with equal signatures lie on the same smooth piece of the model.
class KinkProbe {
 public:
  KinkProbe();
  ~KinkProbe();
  KinkProbe(const KinkProbe&) = delete;
  KinkProbe& operator=(const KinkProbe&) = delete;

  std::uint64_t signature() const { return hash_; }

 private:
  std::uint64_t hash_;
  std::uint64_t* previous_;
};

}  // namespace aon

#endif  // AON_OPS_H_
