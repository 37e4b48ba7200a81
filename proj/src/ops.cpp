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

#include "aon/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "aon/kernels.h"

namespace aon {

namespace {

constexpr Index kParallelThreshold = Index(1) << 15;

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op) {
  if (!t.defined() || t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + (t.defined() ? to_string(t.shape()) : "undefined"));
  }
}

thread_local std::uint64_t* g_kink_hash = nullptr;

inline void fold_kink(std::uint64_t value) {
  std::uint64_t& h = *g_kink_hash;
  h ^= value + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

// Tensor marked as an op output that will receive a gradient.
template <typename T>
Tensor<T> track(Tensor<T> out) {
  out.set_requires_grad(true);
  return out;
}

}  // namespace

// ---- convolution / pooling / normalization ---------------------------------

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  if (weight.dim(2) != 3 || weight.dim(3) != 3) {
    throw DimensionError("conv2d: kernel must be 3x3, got " + to_string(weight.shape()));
  }
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const Index o = weight.dim(0);
  if (weight.dim(1) != c) {
    throw DimensionError("conv2d: input has " + std::to_string(c) + " channels, weight expects " +
                         std::to_string(weight.dim(1)));
  }
  if (!bias.defined() || bias.size() != o) {
    throw DimensionError("conv2d: bias must have " + std::to_string(o) + " elements");
  }
  const Index hw = h * w;
  const Index cols = n * hw;
  const Index k = c * 9;
  auto col = std::make_shared<std::vector<T>>(static_cast<std::size_t>(k * cols));
  kernels::im2col3x3(input.ptr(), n, c, h, w, col->data());
  std::vector<T> out2(static_cast<std::size_t>(o * cols));
  kernels::gemm<T>(false, false, o, cols, k, T(1), weight.ptr(), col->data(), T(0), out2.data());

  Tensor<T> out(Shape{n, o, h, w});
  T* po = out.ptr();
  const T* pb = bias.ptr();
#pragma omp parallel for schedule(static) if (o * cols > kParallelThreshold)
  for (Index oc = 0; oc < o; ++oc) {
    for (Index nb = 0; nb < n; ++nb) {
      const T* src = out2.data() + oc * cols + nb * hw;
      T* dst = po + (nb * o + oc) * hw;
      for (Index p = 0; p < hw; ++p) dst[p] = src[p] + pb[oc];
    }
  }

  if (auto* tape = recording_tape<T>({&input, &weight, &bias})) {
    out = track(out);
    tape->record([input, weight, bias, out, col, n, c, h, w, o, hw, cols, k]() mutable {
      if (!out.has_grad()) return;
      const T* gout = out.grad().data();
      std::vector<T> g2(static_cast<std::size_t>(o * cols));
      for (Index oc = 0; oc < o; ++oc) {
        for (Index nb = 0; nb < n; ++nb) {
          std::copy_n(gout + (nb * o + oc) * hw, hw, g2.data() + oc * cols + nb * hw);
        }
      }
      if (weight.requires_grad()) {
        kernels::gemm<T>(false, true, o, k, cols, T(1), g2.data(), col->data(), T(1),
                         weight.grad_mut().data());
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad_mut();
        for (Index oc = 0; oc < o; ++oc) {
          T s = 0;
          for (Index j = 0; j < cols; ++j) s += g2[static_cast<std::size_t>(oc * cols + j)];
          gb[static_cast<std::size_t>(oc)] += s;
        }
      }
      if (input.requires_grad()) {
        std::vector<T> dcol(static_cast<std::size_t>(k * cols));
        kernels::gemm<T>(true, false, k, cols, o, T(1), weight.ptr(), g2.data(), T(0),
                         dcol.data());
        kernels::col2im3x3(dcol.data(), n, c, h, w, input.grad_mut().data());
      }
    });
  }
  return out;
}

Index pooled_extent(Index in, Index kernel, Index stride, bool ceil_mode) {
  if (kernel < 1 || stride < 1) throw DimensionError("pool: kernel and stride must be >= 1");
  if (kernel > in) {
    throw DimensionError("pool: kernel " + std::to_string(kernel) + " larger than input " +
                         std::to_string(in));
  }
  const Index span = in - kernel;
  Index out = ceil_mode ? (span + stride - 1) / stride + 1 : span / stride + 1;
  if (ceil_mode && (out - 1) * stride >= in) --out;
  return out;
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, const PoolSpec& spec) {
  require_rank(input, 4, "maxpool2d");
  kernels::PoolGeometry g{};
  g.in_h = input.dim(2);
  g.in_w = input.dim(3);
  g.kh = spec.kernel_h;
  g.kw = spec.kernel_w;
  g.sh = spec.stride_h;
  g.sw = spec.stride_w;
  g.out_h = pooled_extent(g.in_h, g.kh, g.sh, spec.ceil_mode);
  g.out_w = pooled_extent(g.in_w, g.kw, g.sw, spec.ceil_mode);
  const Index planes = input.dim(0) * input.dim(1);
  Tensor<T> out(Shape{input.dim(0), input.dim(1), g.out_h, g.out_w});
  auto argmax = std::make_shared<std::vector<std::int32_t>>(static_cast<std::size_t>(out.size()));
  kernels::maxpool_forward(input.ptr(), planes, g, out.ptr(), argmax->data());
  if (g_kink_hash) {
    for (std::int32_t a : *argmax) fold_kink(static_cast<std::uint64_t>(a));
  }
  if (auto* tape = recording_tape<T>({&input})) {
    out = track(out);
    tape->record([input, out, argmax, planes, g]() mutable {
      if (!out.has_grad()) return;
      kernels::maxpool_backward(out.grad().data(), argmax->data(), planes, g,
                                input.grad_mut().data());
    });
  }
  return out;
}

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BnMoments<T>& moments, BnMode mode) {
  require_rank(input, 4, "batchnorm");
  const Index n = input.dim(0), c = input.dim(1), spatial = input.dim(2) * input.dim(3);
  if (gamma.size() != c || beta.size() != c || moments.mean.size() != c ||
      moments.var.size() != c) {
    throw DimensionError("batchnorm: parameter size does not match " + std::to_string(c) +
                         " channels");
  }
  const Index count = n * spatial;
  auto mean = std::make_shared<std::vector<T>>(static_cast<std::size_t>(c));
  auto inv_std = std::make_shared<std::vector<T>>(static_cast<std::size_t>(c));
  if (mode == BnMode::kTrain) {
    if (count < 2) throw ContractError("batchnorm: train mode needs N*H*W >= 2 per channel");
    std::vector<T> var(static_cast<std::size_t>(c));
    kernels::channel_moments(input.ptr(), n, c, spatial, mean->data(), var.data());
    const T unbias = static_cast<T>(count) / static_cast<T>(count - 1);
    for (Index ch = 0; ch < c; ++ch) {
      const auto i = static_cast<std::size_t>(ch);
      (*inv_std)[i] = T(1) / std::sqrt(var[i] + moments.eps);
      moments.mean[ch] = moments.momentum * moments.mean[ch] + (T(1) - moments.momentum) * (*mean)[i];
      moments.var[ch] =
          moments.momentum * moments.var[ch] + (T(1) - moments.momentum) * var[i] * unbias;
    }
  } else {
    for (Index ch = 0; ch < c; ++ch) {
      const auto i = static_cast<std::size_t>(ch);
      (*mean)[i] = moments.mean[ch];
      (*inv_std)[i] = T(1) / std::sqrt(moments.var[ch] + moments.eps);
    }
  }

  Tensor<T> out(input.shape());
  const T* px = input.ptr();
  T* py = out.ptr();
#pragma omp parallel for schedule(static) if (input.size() > kParallelThreshold)
  for (Index ch = 0; ch < c; ++ch) {
    const auto i = static_cast<std::size_t>(ch);
    const T m = (*mean)[i], s = (*inv_std)[i], gm = gamma[ch], bt = beta[ch];
    for (Index nb = 0; nb < n; ++nb) {
      const Index base = (nb * c + ch) * spatial;
      for (Index p = 0; p < spatial; ++p) py[base + p] = gm * (px[base + p] - m) * s + bt;
    }
  }

  if (auto* tape = recording_tape<T>({&input, &gamma, &beta})) {
    out = track(out);
    const bool train = mode == BnMode::kTrain;
    tape->record([input, gamma, beta, out, mean, inv_std, n, c, spatial, count, train]() mutable {
      if (!out.has_grad()) return;
      const T* gy = out.grad().data();
      const T* px = input.ptr();
      T* gx = input.requires_grad() ? input.grad_mut().data() : nullptr;
      T* gg = gamma.requires_grad() ? gamma.grad_mut().data() : nullptr;
      T* gb = beta.requires_grad() ? beta.grad_mut().data() : nullptr;
#pragma omp parallel for schedule(static) if (input.size() > kParallelThreshold)
      for (Index ch = 0; ch < c; ++ch) {
        const auto i = static_cast<std::size_t>(ch);
        const T m = (*mean)[i], s = (*inv_std)[i], gm = gamma[ch];
        T sum_dy = 0, sum_dy_xhat = 0;
        for (Index nb = 0; nb < n; ++nb) {
          const Index base = (nb * c + ch) * spatial;
          for (Index p = 0; p < spatial; ++p) {
            sum_dy += gy[base + p];
            sum_dy_xhat += gy[base + p] * (px[base + p] - m) * s;
          }
        }
        if (gg) gg[ch] += sum_dy_xhat;
        if (gb) gb[ch] += sum_dy;
        if (!gx) continue;
        const T cnt = static_cast<T>(count);
        for (Index nb = 0; nb < n; ++nb) {
          const Index base = (nb * c + ch) * spatial;
          for (Index p = 0; p < spatial; ++p) {
            if (train) {
              const T xhat = (px[base + p] - m) * s;
              gx[base + p] += gm * s * (gy[base + p] - sum_dy / cnt - xhat * sum_dy_xhat / cnt);
            } else {
              gx[base + p] += gm * s * gy[base + p];
            }
          }
        }
      }
    });
  }
  return out;
}

// ---- elementwise -----------------------------------------------------------

namespace {

// Applies f elementwise; df(x, y) gives dy/dx from input and output values.
template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& x, F f, DF df) {
  Tensor<T> out(x.shape());
  const T* px = x.ptr();
  T* py = out.ptr();
  const Index n = x.size();
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (Index i = 0; i < n; ++i) py[i] = f(px[i]);
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out, df, n]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      const T* px = x.ptr();
      const T* py = out.ptr();
      T* gx = x.grad_mut().data();
      for (Index i = 0; i < n; ++i) gx[i] += g[i] * df(px[i], py[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  if (g_kink_hash) {
    std::uint64_t word = 0;
    Index bits = 0;
    for (T v : x.data()) {
      word = (word << 1) | (v > T(0) ? 1u : 0u);
      if (++bits == 64) {
        fold_kink(word);
        word = 0;
        bits = 0;
      }
    }
    fold_kink(word);
  }
  return unary(
      x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary(
      x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
  Tensor<T> out(a.shape());
  const Index n = a.size();
  for (Index i = 0; i < n; ++i) out[i] = a[i] + b[i];
  if (auto* tape = recording_tape<T>({&a, &b})) {
    out = track(out);
    tape->record([a, b, out, n]() mutable {
      if (!out.has_grad()) return;
      auto g = out.grad();
      for (const Tensor<T>* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        auto gt = t->grad_mut();
        for (Index i = 0; i < n; ++i) gt[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> add_trailing(const Tensor<T>& a, const Tensor<T>& b) {
  if (b.rank() > a.rank() ||
      !std::equal(b.shape().begin(), b.shape().end(), a.shape().end() - static_cast<std::ptrdiff_t>(b.rank()))) {
    throw DimensionError("add_trailing: " + to_string(b.shape()) + " is not a suffix of " +
                         to_string(a.shape()));
  }
  const Index inner = b.size();
  const Index outer = a.size() / inner;
  Tensor<T> out(a.shape());
  for (Index r = 0; r < outer; ++r) {
    for (Index j = 0; j < inner; ++j) out[r * inner + j] = a[r * inner + j] + b[j];
  }
  if (auto* tape = recording_tape<T>({&a, &b})) {
    out = track(out);
    tape->record([a, b, out, inner, outer]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      if (a.requires_grad()) {
        T* ga = a.grad_mut().data();
        for (Index i = 0; i < outer * inner; ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        T* gb = b.grad_mut().data();
        for (Index r = 0; r < outer; ++r) {
          for (Index j = 0; j < inner; ++j) gb[j] += g[r * inner + j];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
  Tensor<T> out(a.shape());
  const Index n = a.size();
  for (Index i = 0; i < n; ++i) out[i] = a[i] * b[i];
  if (auto* tape = recording_tape<T>({&a, &b})) {
    out = track(out);
    tape->record([a, b, out, n]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      if (a.requires_grad()) {
        T* ga = a.grad_mut().data();
        for (Index i = 0; i < n; ++i) ga[i] += g[i] * b[i];
      }
      if (b.requires_grad()) {
        T* gb = b.grad_mut().data();
        for (Index i = 0; i < n; ++i) gb[i] += g[i] * a[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         to_string(x.shape()));
  }
  Index outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  const Index len = x.dim(axis);
  Tensor<T> out(x.shape());
  const T* px = x.ptr();
  T* py = out.ptr();
  for (Index o = 0; o < outer; ++o) {
    for (Index in = 0; in < inner; ++in) {
      const Index base = o * len * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (Index j = 0; j < len; ++j) mx = std::max(mx, px[base + j * inner]);
      T total = 0;
      for (Index j = 0; j < len; ++j) {
        const T e = std::exp(px[base + j * inner] - mx);
        py[base + j * inner] = e;
        total += e;
      }
      for (Index j = 0; j < len; ++j) py[base + j * inner] /= total;
    }
  }
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out, outer, inner, len]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      const T* py = out.ptr();
      T* gx = x.grad_mut().data();
      for (Index o = 0; o < outer; ++o) {
        for (Index in = 0; in < inner; ++in) {
          const Index base = o * len * inner + in;
          T dot = 0;
          for (Index j = 0; j < len; ++j) dot += g[base + j * inner] * py[base + j * inner];
          for (Index j = 0; j < len; ++j) {
            gx[base + j * inner] += py[base + j * inner] * (g[base + j * inner] - dot);
          }
        }
      }
    });
  }
  return out;
}

// ---- reductions / linear algebra --------------------------------------------

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  Tensor<T> out = Tensor<T>::scalar(total);
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      const T g = out.grad()[0];
      for (T& v : x.grad_mut()) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents differ " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  Tensor<T> out(Shape{m, n});
  kernels::gemm<T>(false, false, m, n, k, T(1), a.ptr(), b.ptr(), T(0), out.ptr());
  if (auto* tape = recording_tape<T>({&a, &b})) {
    out = track(out);
    tape->record([a, b, out, m, n, k]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      if (a.requires_grad()) {
        kernels::gemm<T>(false, true, m, k, n, T(1), g, b.ptr(), T(1), a.grad_mut().data());
      }
      if (b.requires_grad()) {
        kernels::gemm<T>(true, false, k, n, m, T(1), a.ptr(), g, T(1), b.grad_mut().data());
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  require_rank(w, 2, "linear weight");
  const Index k = w.dim(0), n = w.dim(1);
  if (x.shape().back() != k) {
    throw DimensionError("linear: input " + to_string(x.shape()) + " incompatible with weight " +
                         to_string(w.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.size() != n) throw DimensionError("linear: bias size mismatch");
  const Index m = x.size() / k;
  Shape shape = x.shape();
  shape.back() = n;
  Tensor<T> out(shape);
  kernels::gemm<T>(false, false, m, n, k, T(1), x.ptr(), w.ptr(), T(0), out.ptr());
  if (has_bias) {
    T* po = out.ptr();
    for (Index r = 0; r < m; ++r) {
      for (Index j = 0; j < n; ++j) po[r * n + j] += bias[j];
    }
  }
  const bool record = has_bias ? recording_tape<T>({&x, &w, &bias}) != nullptr
                               : recording_tape<T>({&x, &w}) != nullptr;
  if (record) {
    out = track(out);
    Tape<T>::active()->record([x, w, bias, out, m, n, k, has_bias]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      if (x.requires_grad()) {
        kernels::gemm<T>(false, true, m, k, n, T(1), g, w.ptr(), T(1), x.grad_mut().data());
      }
      if (w.requires_grad()) {
        kernels::gemm<T>(true, false, k, n, m, T(1), x.ptr(), g, T(1), w.grad_mut().data());
      }
      if (has_bias && bias.requires_grad()) {
        T* gb = bias.grad_mut().data();
        for (Index r = 0; r < m; ++r) {
          for (Index j = 0; j < n; ++j) gb[j] += g[r * n + j];
        }
      }
    });
  }
  return out;
}

// ---- layout ----------------------------------------------------------------

namespace {

// Gradient of a pure permutation: gx[src[i]] += g[i].
template <typename T>
void record_gather(Tensor<T> x, Tensor<T>& out, std::shared_ptr<std::vector<Index>> src) {
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out, src]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      T* gx = x.grad_mut().data();
      const Index n = static_cast<Index>(src->size());
      for (Index i = 0; i < n; ++i) gx[(*src)[static_cast<std::size_t>(i)]] += g[i];
    });
  }
}

}  // namespace

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " +
                         to_string(shape));
  }
  Tensor<T> out(std::move(shape), std::vector<T>(x.data().begin(), x.data().end()));
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      auto g = out.grad();
      auto gx = x.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& perm) {
  const std::size_t r = x.rank();
  if (perm.size() != r) throw DimensionError("permute: permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw DimensionError("permute: invalid permutation");
    seen[p] = true;
  }
  Shape out_shape(r);
  std::vector<Index> in_strides(r, 1);
  for (std::size_t i = r - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * x.dim(i);
  std::vector<Index> strides(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = x.dim(perm[i]);
    strides[i] = in_strides[perm[i]];
  }
  Tensor<T> out(out_shape);
  auto src = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(x.size()));
  std::vector<Index> idx(r, 0);
  Index offset = 0;
  for (Index i = 0; i < out.size(); ++i) {
    (*src)[static_cast<std::size_t>(i)] = offset;
    out[i] = x[offset];
    for (std::size_t d = r; d-- > 0;) {
      offset += strides[d];
      if (++idx[d] < out_shape[d]) break;
      offset -= strides[d] * out_shape[d];
      idx[d] = 0;
    }
  }
  record_gather(x, out, src);
  return out;
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw DimensionError("concat: axis out of range");
  Shape out_shape = ref;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != ref.size()) throw DimensionError("concat: rank mismatch");
    for (std::size_t d = 0; d < ref.size(); ++d) {
      if (d != axis && p.dim(d) != ref[d]) {
        throw DimensionError("concat: extent mismatch " + to_string(p.shape()) + " vs " +
                             to_string(ref));
      }
    }
    out_shape[axis] += p.dim(axis);
  }
  Index outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= ref[d];
  for (std::size_t d = axis + 1; d < ref.size(); ++d) inner *= ref[d];
  const Index out_chunk = out_shape[axis] * inner;
  Tensor<T> out(out_shape);
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const Index chunk = p.dim(axis) * inner;
    for (Index o = 0; o < outer; ++o) {
      std::copy_n(p.ptr() + o * chunk, chunk, out.ptr() + o * out_chunk + off);
    }
    off += chunk;
  }
  if (auto* tape = recording_tape<T>(parts)) {
    out = track(out);
    tape->record([parts, out, offsets, outer, inner, out_chunk, axis]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i].requires_grad()) continue;
        const Index chunk = parts[i].dim(axis) * inner;
        T* gp = parts[i].grad_mut().data();
        for (Index o = 0; o < outer; ++o) {
          const T* src = g + o * out_chunk + offsets[i];
          for (Index j = 0; j < chunk; ++j) gp[o * chunk + j] += src[j];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> select(const Tensor<T>& x, Index index) {
  if (index < 0 || index >= x.dim(0)) {
    throw DimensionError("select: index " + std::to_string(index) + " out of range for " +
                         to_string(x.shape()));
  }
  Shape shape(x.shape().begin() + 1, x.shape().end());
  if (shape.empty()) shape = {1};
  const Index chunk = numel(shape);
  Tensor<T> out(shape, std::vector<T>(x.ptr() + index * chunk, x.ptr() + (index + 1) * chunk));
  if (auto* tape = recording_tape<T>({&x})) {
    out = track(out);
    tape->record([x, out, index, chunk]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      T* gx = x.grad_mut().data() + index * chunk;
      for (Index j = 0; j < chunk; ++j) gx[j] += g[j];
    });
  }
  return out;
}

template <typename T>
Tensor<T> stack(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw DimensionError("stack: no inputs");
  const Shape& ref = parts.front().shape();
  Shape shape{static_cast<Index>(parts.size())};
  shape.insert(shape.end(), ref.begin(), ref.end());
  const Index chunk = numel(ref);
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].shape() != ref) throw DimensionError("stack: shape mismatch");
    std::copy_n(parts[i].ptr(), chunk, out.ptr() + static_cast<Index>(i) * chunk);
  }
  if (auto* tape = recording_tape<T>(parts)) {
    out = track(out);
    tape->record([parts, out, chunk]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i].requires_grad()) continue;
        T* gp = parts[i].grad_mut().data();
        const T* src = g + static_cast<Index>(i) * chunk;
        for (Index j = 0; j < chunk; ++j) gp[j] += src[j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> reverse_seq(const Tensor<T>& x) {
  const Index len = x.dim(0);
  const Index chunk = x.size() / len;
  Tensor<T> out(x.shape());
  auto src = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(x.size()));
  for (Index t = 0; t < len; ++t) {
    const Index from = (len - 1 - t) * chunk;
    for (Index j = 0; j < chunk; ++j) {
      out[t * chunk + j] = x[from + j];
      (*src)[static_cast<std::size_t>(t * chunk + j)] = from + j;
    }
  }
  record_gather(x, out, src);
  return out;
}

template <typename T>
Tensor<T> rot90(const Tensor<T>& x) {
  require_rank(x, 4, "rot90");
  const Index s = x.dim(2);
  if (x.dim(3) != s) {
    throw DimensionError("rot90: feature maps must be square, got " + to_string(x.shape()));
  }
  const Index planes = x.dim(0) * x.dim(1);
  Tensor<T> out(x.shape());
  auto src = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(x.size()));
  for (Index p = 0; p < planes; ++p) {
    const Index base = p * s * s;
    for (Index y = 0; y < s; ++y) {
      for (Index xx = 0; xx < s; ++xx) {
        const Index from = base + xx * s + (s - 1 - y);
        out[base + y * s + xx] = x[from];
        (*src)[static_cast<std::size_t>(base + y * s + xx)] = from;
      }
    }
  }
  record_gather(x, out, src);
  return out;
}

// ---- sequence model pieces ---------------------------------------------------

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids) {
  require_rank(table, 2, "embedding");
  const Index vocab = table.dim(0), dim = table.dim(1);
  const Index n = static_cast<Index>(ids.size());
  Tensor<T> out(Shape{n, dim});
  for (Index r = 0; r < n; ++r) {
    const int id = ids[static_cast<std::size_t>(r)];
    if (id >= vocab) throw DimensionError("embedding: id out of range");
    if (id >= 0) std::copy_n(table.ptr() + id * dim, dim, out.ptr() + r * dim);
  }
  if (auto* tape = recording_tape<T>({&table})) {
    out = track(out);
    tape->record([table, out, ids, dim, n]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      T* gt = table.grad_mut().data();
      for (Index r = 0; r < n; ++r) {
        const int id = ids[static_cast<std::size_t>(r)];
        if (id < 0) continue;
        for (Index j = 0; j < dim; ++j) gt[id * dim + j] += g[r * dim + j];
      }
    });
  }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_cell(const Tensor<T>& gates, const Tensor<T>& c_prev) {
  require_rank(gates, 2, "lstm_cell gates");
  require_rank(c_prev, 2, "lstm_cell state");
  const Index n = gates.dim(0), hidden = c_prev.dim(1);
  if (gates.dim(1) != 4 * hidden || c_prev.dim(0) != n) {
    throw DimensionError("lstm_cell: gates " + to_string(gates.shape()) + " vs state " +
                         to_string(c_prev.shape()));
  }
  auto act = std::make_shared<std::vector<T>>(static_cast<std::size_t>(gates.size()));
  Tensor<T> h(Shape{n, hidden});
  Tensor<T> c(Shape{n, hidden});
  kernels::lstm_pointwise_forward(gates.ptr(), c_prev.ptr(), n, hidden, act->data(), c.ptr(),
                                  h.ptr());
  if (auto* tape = recording_tape<T>({&gates, &c_prev})) {
    h = track(h);
    c = track(c);
    tape->record([gates, c_prev, h, c, act, n, hidden]() mutable {
      if (!h.has_grad() && !c.has_grad()) return;
      std::vector<T> dgates(static_cast<std::size_t>(n * 4 * hidden));
      std::vector<T> dc_prev(static_cast<std::size_t>(n * hidden));
      kernels::lstm_pointwise_backward(act->data(), c_prev.ptr(), c.ptr(),
                                       h.has_grad() ? h.grad().data() : nullptr,
                                       c.has_grad() ? c.grad().data() : nullptr, n, hidden,
                                       dgates.data(), dc_prev.data());
      if (gates.requires_grad()) {
        T* g = gates.grad_mut().data();
        for (std::size_t i = 0; i < dgates.size(); ++i) g[i] += dgates[i];
      }
      if (c_prev.requires_grad()) {
        T* g = c_prev.grad_mut().data();
        for (std::size_t i = 0; i < dc_prev.size(); ++i) g[i] += dc_prev[i];
      }
    });
  }
  return {h, c};
}

template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& weights, const Tensor<T>& seq) {
  require_rank(weights, 2, "weighted_sum weights");
  require_rank(seq, 3, "weighted_sum sequence");
  const Index len = seq.dim(0), n = seq.dim(1), d = seq.dim(2);
  if (weights.dim(0) != len || weights.dim(1) != n) {
    throw DimensionError("weighted_sum: weights " + to_string(weights.shape()) +
                         " vs sequence " + to_string(seq.shape()));
  }
  Tensor<T> out(Shape{n, d});
  for (Index j = 0; j < len; ++j) {
    for (Index b = 0; b < n; ++b) {
      const T a = weights[j * n + b];
      const T* src = seq.ptr() + (j * n + b) * d;
      T* dst = out.ptr() + b * d;
      for (Index k = 0; k < d; ++k) dst[k] += a * src[k];
    }
  }
  if (auto* tape = recording_tape<T>({&weights, &seq})) {
    out = track(out);
    tape->record([weights, seq, out, len, n, d]() mutable {
      if (!out.has_grad()) return;
      const T* g = out.grad().data();
      T* gw = weights.requires_grad() ? weights.grad_mut().data() : nullptr;
      T* gs = seq.requires_grad() ? seq.grad_mut().data() : nullptr;
      for (Index j = 0; j < len; ++j) {
        for (Index b = 0; b < n; ++b) {
          const T* src = seq.ptr() + (j * n + b) * d;
          const T* gb = g + b * d;
          if (gw) {
            T dot = 0;
            for (Index k = 0; k < d; ++k) dot += gb[k] * src[k];
            gw[j * n + b] += dot;
          }
          if (gs) {
            const T a = weights[j * n + b];
            T* dst = gs + (j * n + b) * d;
            for (Index k = 0; k < d; ++k) dst[k] += a * gb[k];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax_nll(const Tensor<T>& logits, const std::vector<int>& targets,
                      const std::vector<T>& weights) {
  require_rank(logits, 2, "softmax_nll");
  const Index n = logits.dim(0), k = logits.dim(1);
  if (static_cast<Index>(targets.size()) != n || static_cast<Index>(weights.size()) != n) {
    throw DimensionError("softmax_nll: targets/weights must have one entry per row");
  }
  auto probs = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n * k));
  T total = 0;
  for (Index r = 0; r < n; ++r) {
    const T w = weights[static_cast<std::size_t>(r)];
    if (w == T(0)) continue;
    const int tgt = targets[static_cast<std::size_t>(r)];
    if (tgt < 0 || tgt >= k) throw DimensionError("softmax_nll: target out of range");
    const T* row = logits.ptr() + r * k;
    const T mx = *std::max_element(row, row + k);
    T z = 0;
    for (Index j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const T log_z = std::log(z) + mx;
    for (Index j = 0; j < k; ++j) (*probs)[static_cast<std::size_t>(r * k + j)] = std::exp(row[j] - log_z);
    total += w * (log_z - row[tgt]);
  }
  Tensor<T> out = Tensor<T>::scalar(total);
  if (auto* tape = recording_tape<T>({&logits})) {
    out = track(out);
    tape->record([logits, out, probs, targets, weights, n, k]() mutable {
      if (!out.has_grad()) return;
      const T g = out.grad()[0];
      T* gl = logits.grad_mut().data();
      for (Index r = 0; r < n; ++r) {
        const T w = weights[static_cast<std::size_t>(r)];
        if (w == T(0)) continue;
        for (Index j = 0; j < k; ++j) {
          gl[r * k + j] += g * w * (*probs)[static_cast<std::size_t>(r * k + j)];
        }
        gl[r * k + targets[static_cast<std::size_t>(r)]] -= g * w;
      }
    });
  }
  return out;
}

KinkProbe::KinkProbe() : hash_(0), previous_(std::exchange(g_kink_hash, &hash_)) {}

KinkProbe::~KinkProbe() { g_kink_hash = previous_; }

#define AON_OPS_INSTANTIATE(T)                                                                  \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> maxpool2d<T>(const Tensor<T>&, const PoolSpec&);                          \
  template Tensor<T> batchnorm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                  BnMoments<T>&, BnMode);                                      \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                \
  template Tensor<T> tanh<T>(const Tensor<T>&);                                                \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                             \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                            \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> add_trailing<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> softmax<T>(const Tensor<T>&, std::size_t);                                \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                 \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                      \
  template Tensor<T> permute<T>(const Tensor<T>&, const std::vector<std::size_t>&);            \
  template Tensor<T> concat<T>(const std::vector<Tensor<T>>&, std::size_t);                    \
  template Tensor<T> select<T>(const Tensor<T>&, Index);                                       \
  template Tensor<T> stack<T>(const std::vector<Tensor<T>>&);                                  \
  template Tensor<T> reverse_seq<T>(const Tensor<T>&);                                         \
  template Tensor<T> rot90<T>(const Tensor<T>&);                                               \
  template Tensor<T> embedding<T>(const Tensor<T>&, const std::vector<int>&);                  \
  template std::pair<Tensor<T>, Tensor<T>> lstm_cell<T>(const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> weighted_sum<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> softmax_nll<T>(const Tensor<T>&, const std::vector<int>&,                 \
                                    const std::vector<T>&);

AON_OPS_INSTANTIATE(float)
AON_OPS_INSTANTIATE(double)

}  // namespace aon
