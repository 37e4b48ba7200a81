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

#include "aon/blstm.h"

#include <cmath>
#include <memory>
#include <vector>

#include "aon/kernels.h"

namespace aon {

namespace {

// Activations of one direction kept for the backward pass.
template <typename T>
struct DirectionCache {
  std::vector<T> act;  // [L,N,4H] post-activation gates
  std::vector<T> c;    // [L,N,H]
  std::vector<T> h;    // [L,N,H]
};

template <typename T>
void check_weights(const LstmWeights<T>& w, Index din, const char* which) {
  const Index hidden = w.wh.defined() ? w.wh.dim(0) : 0;
  if (!w.wx.defined() || !w.wh.defined() || !w.b.defined() || w.wx.rank() != 2 ||
      w.wh.rank() != 2 || w.wx.dim(0) != din || w.wx.dim(1) != 4 * hidden ||
      w.wh.dim(1) != 4 * hidden || w.b.size() != 4 * hidden) {
    throw DimensionError(std::string("blstm: inconsistent ") + which + " weights for input dim " +
                         std::to_string(din));
  }
}

// Frame visited at step s of a direction.
inline Index frame(Index s, Index len, bool reverse) { return reverse ? len - 1 - s : s; }

template <typename T>
void run_direction(const T* x, Index len, Index n, Index din, const LstmWeights<T>& w,
                   bool reverse, DirectionCache<T>& cache) {
  const Index hidden = w.hidden(), g4 = 4 * hidden, rows = len * n;
  cache.act.assign(static_cast<std::size_t>(rows * g4), T(0));
  cache.c.assign(static_cast<std::size_t>(rows * hidden), T(0));
  cache.h.assign(static_cast<std::size_t>(rows * hidden), T(0));
  // Input projections for every frame in one product; act doubles as scratch.
  std::vector<T> pre(static_cast<std::size_t>(rows * g4));
  for (Index r = 0; r < rows; ++r) {
    std::copy(w.b.ptr(), w.b.ptr() + g4, pre.data() + r * g4);
  }
  kernels::gemm<T>(false, false, rows, g4, din, T(1), x, w.wx.ptr(), T(1), pre.data());
  const std::vector<T> zeros(static_cast<std::size_t>(n * hidden), T(0));
  for (Index s = 0; s < len; ++s) {
    const Index t = frame(s, len, reverse);
    T* gates = pre.data() + t * n * g4;
    const T* c_prev = zeros.data();
    if (s > 0) {
      const Index p = frame(s - 1, len, reverse);
      kernels::gemm<T>(false, false, n, g4, hidden, T(1), cache.h.data() + p * n * hidden,
                       w.wh.ptr(), T(1), gates);
      c_prev = cache.c.data() + p * n * hidden;
    }
    kernels::lstm_pointwise_forward(gates, c_prev, n, hidden, cache.act.data() + t * n * g4,
                                    cache.c.data() + t * n * hidden,
                                    cache.h.data() + t * n * hidden);
  }
}

template <typename T>
void backprop_direction(const Tensor<T>& seq, const LstmWeights<T>& w, bool reverse,
                        const DirectionCache<T>& cache, const T* dout, Index out_width,
                        Index offset) {
  const Index len = seq.dim(0), n = seq.dim(1), din = seq.dim(2);
  const Index hidden = w.hidden(), g4 = 4 * hidden, rows = len * n;
  std::vector<T> dpre(static_cast<std::size_t>(rows * g4));
  std::vector<T> dh(static_cast<std::size_t>(n * hidden));
  std::vector<T> dh_rec(static_cast<std::size_t>(n * hidden), T(0));
  std::vector<T> dc_rec(static_cast<std::size_t>(n * hidden), T(0));
  std::vector<T> dc_prev(static_cast<std::size_t>(n * hidden));
  const std::vector<T> zeros(static_cast<std::size_t>(n * hidden), T(0));
  T* dwh = w.wh.requires_grad() ? w.wh.grad_mut().data() : nullptr;
  for (Index s = len - 1; s >= 0; --s) {
    const Index t = frame(s, len, reverse);
    for (Index b = 0; b < n; ++b) {
      const T* src = dout + (t * n + b) * out_width + offset;
      for (Index j = 0; j < hidden; ++j) dh[b * hidden + j] = src[j] + dh_rec[b * hidden + j];
    }
    const T* c_prev = zeros.data();
    const T* h_prev = nullptr;
    if (s > 0) {
      const Index p = frame(s - 1, len, reverse);
      c_prev = cache.c.data() + p * n * hidden;
      h_prev = cache.h.data() + p * n * hidden;
    }
    T* dgates = dpre.data() + t * n * g4;
    kernels::lstm_pointwise_backward(cache.act.data() + t * n * g4, c_prev,
                                     cache.c.data() + t * n * hidden, dh.data(), dc_rec.data(),
                                     n, hidden, dgates, dc_prev.data());
    dc_rec.swap(dc_prev);
    if (h_prev) {
      kernels::gemm<T>(false, true, n, hidden, g4, T(1), dgates, w.wh.ptr(), T(0),
                       dh_rec.data());
      if (dwh) kernels::gemm<T>(true, false, hidden, g4, n, T(1), h_prev, dgates, T(1), dwh);
    }
  }
  if (w.wx.requires_grad()) {
    kernels::gemm<T>(true, false, din, g4, rows, T(1), seq.ptr(), dpre.data(), T(1),
                     w.wx.grad_mut().data());
  }
  if (w.b.requires_grad()) {
    T* db = w.b.grad_mut().data();
    for (Index r = 0; r < rows; ++r) {
      const T* src = dpre.data() + r * g4;
      for (Index k = 0; k < g4; ++k) db[k] += src[k];
    }
  }
  if (seq.requires_grad()) {
    kernels::gemm<T>(false, true, rows, din, g4, T(1), dpre.data(), w.wx.ptr(), T(1),
                     seq.grad_mut().data());
  }
}

}  // namespace

template <typename T>
Tensor<T> blstm(const Tensor<T>& seq, const LstmWeights<T>& fwd, const LstmWeights<T>& bwd) {
  if (!seq.defined() || seq.rank() != 3) {
    throw DimensionError("blstm: expected [L,N,D] sequence");
  }
  const Index len = seq.dim(0), n = seq.dim(1), din = seq.dim(2);
  check_weights(fwd, din, "forward");
  check_weights(bwd, din, "backward");
  const Index hf = fwd.hidden(), hb = bwd.hidden(), width = hf + hb;
  auto caches = std::make_shared<std::pair<DirectionCache<T>, DirectionCache<T>>>();
  run_direction(seq.ptr(), len, n, din, fwd, false, caches->first);
  run_direction(seq.ptr(), len, n, din, bwd, true, caches->second);
  Tensor<T> out(Shape{len, n, width});
  for (Index r = 0; r < len * n; ++r) {
    std::copy_n(caches->first.h.data() + r * hf, hf, out.ptr() + r * width);
    std::copy_n(caches->second.h.data() + r * hb, hb, out.ptr() + r * width + hf);
  }
  if (auto* tape = recording_tape<T>(
          {&seq, &fwd.wx, &fwd.wh, &fwd.b, &bwd.wx, &bwd.wh, &bwd.b})) {
    out.set_requires_grad(true);
    tape->record([seq, fwd, bwd, out, caches, width, hf]() {
      if (!out.has_grad()) return;
      backprop_direction(seq, fwd, false, caches->first, out.grad().data(), width, Index(0));
      backprop_direction(seq, bwd, true, caches->second, out.grad().data(), width, hf);
    });
  }
  return out;
}

template <typename T>
LstmWeights<T> make_lstm_weights(ParameterSet<T>& params, const std::string& prefix,
                                 Index input_dim, Index hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmWeights<T> w;
  w.wx = params.add(prefix + ".wx", uniform_tensor<T>(Shape{input_dim, 4 * hidden}, bound, rng));
  w.wh = params.add(prefix + ".wh", uniform_tensor<T>(Shape{hidden, 4 * hidden}, bound, rng));
  Tensor<T> b(Shape{4 * hidden});
  for (Index j = hidden; j < 2 * hidden; ++j) b[j] = T(1);
  w.b = params.add(prefix + ".b", b);
  return w;
}

#define AON_BLSTM_INSTANTIATE(T)                                                          \
  template Tensor<T> blstm<T>(const Tensor<T>&, const LstmWeights<T>&,                    \
                              const LstmWeights<T>&);                                     \
  template LstmWeights<T> make_lstm_weights<T>(ParameterSet<T>&, const std::string&, Index, \
                                               Index, Rng&);

AON_BLSTM_INSTANTIATE(float)
AON_BLSTM_INSTANTIATE(double)

}  // namespace aon
