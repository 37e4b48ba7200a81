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

#include "aon/kernels.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace aon::kernels {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, Index m, Index n, Index k, T alpha, const T* a,
          const T* b, T beta, T* c) {
  MutMap<T> cm(c, m, n);
  if (beta == T(0)) {
    cm.setZero();
  } else if (beta != T(1)) {
    cm *= beta;
  }
  if (k == 0) return;
  ConstMap<T> am(a, trans_a ? k : m, trans_a ? m : k);
  ConstMap<T> bm(b, trans_b ? n : k, trans_b ? k : n);
  if (!trans_a && !trans_b) {
    cm.noalias() += alpha * am * bm;
  } else if (trans_a && !trans_b) {
    cm.noalias() += alpha * am.transpose() * bm;
  } else if (!trans_a && trans_b) {
    cm.noalias() += alpha * am * bm.transpose();
  } else {
    cm.noalias() += alpha * am.transpose() * bm.transpose();
  }
}

template <typename T>
void im2col3x3(const T* input, Index batch, Index channels, Index h, Index w, T* col) {
  const Index hw = h * w;
  const Index cols = batch * hw;
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < channels; ++c) {
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        T* row = col + (c * 9 + ky * 3 + kx) * cols;
        for (Index nb = 0; nb < batch; ++nb) {
          const T* plane = input + (nb * channels + c) * hw;
          T* dst = row + nb * hw;
          for (Index y = 0; y < h; ++y) {
            const Index sy = y + ky - 1;
            if (sy < 0 || sy >= h) {
              std::fill(dst + y * w, dst + (y + 1) * w, T(0));
              continue;
            }
            const T* src = plane + sy * w;
            for (Index x = 0; x < w; ++x) {
              const Index sx = x + kx - 1;
              dst[y * w + x] = (sx >= 0 && sx < w) ? src[sx] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im3x3(const T* col, Index batch, Index channels, Index h, Index w, T* input_grad) {
  const Index hw = h * w;
  const Index cols = batch * hw;
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < channels; ++c) {
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        const T* row = col + (c * 9 + ky * 3 + kx) * cols;
        for (Index nb = 0; nb < batch; ++nb) {
          T* plane = input_grad + (nb * channels + c) * hw;
          const T* src = row + nb * hw;
          for (Index y = 0; y < h; ++y) {
            const Index sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            T* dst = plane + sy * w;
            for (Index x = 0; x < w; ++x) {
              const Index sx = x + kx - 1;
              if (sx >= 0 && sx < w) dst[sx] += src[y * w + x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const T* input, Index planes, const PoolGeometry& g, T* output,
                     std::int32_t* argmax) {
  const Index in_plane = g.in_h * g.in_w;
  const Index out_plane = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < planes; ++p) {
    const T* src = input + p * in_plane;
    T* dst = output + p * out_plane;
    std::int32_t* arg = argmax + p * out_plane;
    for (Index oy = 0; oy < g.out_h; ++oy) {
      const Index y0 = oy * g.sh;
      const Index y1 = std::min(y0 + g.kh, g.in_h);
      for (Index ox = 0; ox < g.out_w; ++ox) {
        const Index x0 = ox * g.sw;
        const Index x1 = std::min(x0 + g.kw, g.in_w);
        Index best = y0 * g.in_w + x0;
        T best_v = src[best];
        for (Index y = y0; y < y1; ++y) {
          for (Index x = x0; x < x1; ++x) {
            const T v = src[y * g.in_w + x];
            if (v > best_v) {
              best_v = v;
              best = y * g.in_w + x;
            }
          }
        }
        dst[oy * g.out_w + ox] = best_v;
        arg[oy * g.out_w + ox] = static_cast<std::int32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool_backward(const T* out_grad, const std::int32_t* argmax, Index planes,
                      const PoolGeometry& g, T* in_grad) {
  const Index in_plane = g.in_h * g.in_w;
  const Index out_plane = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < planes; ++p) {
    T* dst = in_grad + p * in_plane;
    const T* src = out_grad + p * out_plane;
    const std::int32_t* arg = argmax + p * out_plane;
    for (Index o = 0; o < out_plane; ++o) dst[arg[o]] += src[o];
  }
}

template <typename T>
void channel_moments(const T* input, Index batch, Index channels, Index spatial, T* mean,
                     T* var) {
  const T count = static_cast<T>(batch * spatial);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < channels; ++c) {
    T sum = 0;
    for (Index nb = 0; nb < batch; ++nb) {
      const T* p = input + (nb * channels + c) * spatial;
      for (Index i = 0; i < spatial; ++i) sum += p[i];
    }
    const T mu = sum / count;
    T sq = 0;
    for (Index nb = 0; nb < batch; ++nb) {
      const T* p = input + (nb * channels + c) * spatial;
      for (Index i = 0; i < spatial; ++i) {
        const T d = p[i] - mu;
        sq += d * d;
      }
    }
    mean[c] = mu;
    var[c] = sq / count;
  }
}

template <typename T>
void lstm_pointwise_forward(const T* gates, const T* c_prev, Index n, Index hidden, T* act,
                            T* c_out, T* h_out) {
  const Index g4 = 4 * hidden;
#pragma omp parallel for schedule(static) if (n * hidden > 4096)
  for (Index r = 0; r < n; ++r) {
    const T* a = gates + r * g4;
    T* z = act + r * g4;
    for (Index j = 0; j < hidden; ++j) {
      const T i = sigmoid(a[j]);
      const T f = sigmoid(a[hidden + j]);
      const T g = std::tanh(a[2 * hidden + j]);
      const T o = sigmoid(a[3 * hidden + j]);
      z[j] = i;
      z[hidden + j] = f;
      z[2 * hidden + j] = g;
      z[3 * hidden + j] = o;
      const T c = f * c_prev[r * hidden + j] + i * g;
      c_out[r * hidden + j] = c;
      h_out[r * hidden + j] = o * std::tanh(c);
    }
  }
}

template <typename T>
void lstm_pointwise_backward(const T* act, const T* c_prev, const T* c_out, const T* dh,
                             const T* dc, Index n, Index hidden, T* dgates, T* dc_prev) {
  const Index g4 = 4 * hidden;
#pragma omp parallel for schedule(static) if (n * hidden > 4096)
  for (Index r = 0; r < n; ++r) {
    const T* z = act + r * g4;
    T* dz = dgates + r * g4;
    for (Index j = 0; j < hidden; ++j) {
      const Index k = r * hidden + j;
      const T i = z[j], f = z[hidden + j], g = z[2 * hidden + j], o = z[3 * hidden + j];
      const T tc = std::tanh(c_out[k]);
      const T dh_k = dh ? dh[k] : T(0);
      const T dct = (dc ? dc[k] : T(0)) + dh_k * o * (T(1) - tc * tc);
      dz[j] = dct * g * i * (T(1) - i);
      dz[hidden + j] = dct * c_prev[k] * f * (T(1) - f);
      dz[2 * hidden + j] = dct * i * (T(1) - g * g);
      dz[3 * hidden + j] = dh_k * tc * o * (T(1) - o);
      dc_prev[k] = dct * f;
    }
  }
}

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, Index m, Index n, Index k, T alpha, const T* a,
          const T* b, T beta, T* c) {
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      T acc = 0;
      for (Index p = 0; p < k; ++p) {
        const T av = trans_a ? a[p * m + i] : a[i * k + p];
        const T bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = alpha * acc + (beta == T(0) ? T(0) : beta * c[i * n + j]);
    }
  }
}

template <typename T>
void conv3x3(const T* input, const T* weight, const T* bias, Index batch, Index in_ch,
             Index out_ch, Index h, Index w, T* output) {
  for (Index nb = 0; nb < batch; ++nb) {
    for (Index o = 0; o < out_ch; ++o) {
      for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
          T acc = bias ? bias[o] : T(0);
          for (Index c = 0; c < in_ch; ++c) {
            for (Index ky = 0; ky < 3; ++ky) {
              for (Index kx = 0; kx < 3; ++kx) {
                const Index sy = y + ky - 1, sx = x + kx - 1;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                acc += input[((nb * in_ch + c) * h + sy) * w + sx] *
                       weight[((o * in_ch + c) * 3 + ky) * 3 + kx];
              }
            }
          }
          output[((nb * out_ch + o) * h + y) * w + x] = acc;
        }
      }
    }
  }
}

template <typename T>
void im2col3x3(const T* input, Index batch, Index channels, Index h, Index w, T* col) {
  const Index cols = batch * h * w;
  for (Index c = 0; c < channels; ++c) {
    for (Index k = 0; k < 9; ++k) {
      const Index ky = k / 3, kx = k % 3;
      for (Index nb = 0; nb < batch; ++nb) {
        for (Index y = 0; y < h; ++y) {
          for (Index x = 0; x < w; ++x) {
            const Index sy = y + ky - 1, sx = x + kx - 1;
            const bool inside = sy >= 0 && sy < h && sx >= 0 && sx < w;
            col[(c * 9 + k) * cols + (nb * h + y) * w + x] =
                inside ? input[((nb * channels + c) * h + sy) * w + sx] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im3x3(const T* col, Index batch, Index channels, Index h, Index w, T* input_grad) {
  const Index cols = batch * h * w;
  for (Index c = 0; c < channels; ++c) {
    for (Index k = 0; k < 9; ++k) {
      const Index ky = k / 3, kx = k % 3;
      for (Index nb = 0; nb < batch; ++nb) {
        for (Index y = 0; y < h; ++y) {
          for (Index x = 0; x < w; ++x) {
            const Index sy = y + ky - 1, sx = x + kx - 1;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
            input_grad[((nb * channels + c) * h + sy) * w + sx] +=
                col[(c * 9 + k) * cols + (nb * h + y) * w + x];
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const T* input, Index planes, const PoolGeometry& g, T* output,
                     std::int32_t* argmax) {
  for (Index p = 0; p < planes; ++p) {
    for (Index oy = 0; oy < g.out_h; ++oy) {
      for (Index ox = 0; ox < g.out_w; ++ox) {
        Index best = -1;
        for (Index y = oy * g.sh; y < std::min(oy * g.sh + g.kh, g.in_h); ++y) {
          for (Index x = ox * g.sw; x < std::min(ox * g.sw + g.kw, g.in_w); ++x) {
            const Index idx = y * g.in_w + x;
            if (best < 0 || input[p * g.in_h * g.in_w + idx] >
                                input[p * g.in_h * g.in_w + best]) {
              best = idx;
            }
          }
        }
        const Index o = p * g.out_h * g.out_w + oy * g.out_w + ox;
        output[o] = input[p * g.in_h * g.in_w + best];
        argmax[o] = static_cast<std::int32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool_backward(const T* out_grad, const std::int32_t* argmax, Index planes,
                      const PoolGeometry& g, T* in_grad) {
  for (Index p = 0; p < planes; ++p) {
    for (Index o = 0; o < g.out_h * g.out_w; ++o) {
      in_grad[p * g.in_h * g.in_w + argmax[p * g.out_h * g.out_w + o]] +=
          out_grad[p * g.out_h * g.out_w + o];
    }
  }
}

template <typename T>
void channel_moments(const T* input, Index batch, Index channels, Index spatial, T* mean,
                     T* var) {
  for (Index c = 0; c < channels; ++c) {
    T sum = 0;
    for (Index nb = 0; nb < batch; ++nb) {
      for (Index i = 0; i < spatial; ++i) sum += input[(nb * channels + c) * spatial + i];
    }
    mean[c] = sum / static_cast<T>(batch * spatial);
    T sq = 0;
    for (Index nb = 0; nb < batch; ++nb) {
      for (Index i = 0; i < spatial; ++i) {
        const T d = input[(nb * channels + c) * spatial + i] - mean[c];
        sq += d * d;
      }
    }
    var[c] = sq / static_cast<T>(batch * spatial);
  }
}

template <typename T>
void lstm_pointwise_forward(const T* gates, const T* c_prev, Index n, Index hidden, T* act,
                            T* c_out, T* h_out) {
  for (Index r = 0; r < n; ++r) {
    for (Index j = 0; j < hidden; ++j) {
      const Index base = r * 4 * hidden;
      for (Index q = 0; q < 4; ++q) {
        const T v = gates[base + q * hidden + j];
        act[base + q * hidden + j] = q == 2 ? std::tanh(v) : sigmoid(v);
      }
      const T i = act[base + j], f = act[base + hidden + j];
      const T g = act[base + 2 * hidden + j], o = act[base + 3 * hidden + j];
      c_out[r * hidden + j] = f * c_prev[r * hidden + j] + i * g;
      h_out[r * hidden + j] = o * std::tanh(c_out[r * hidden + j]);
    }
  }
}

template <typename T>
void lstm_pointwise_backward(const T* act, const T* c_prev, const T* c_out, const T* dh,
                             const T* dc, Index n, Index hidden, T* dgates, T* dc_prev) {
  for (Index r = 0; r < n; ++r) {
    for (Index j = 0; j < hidden; ++j) {
      const Index base = r * 4 * hidden;
      const Index k = r * hidden + j;
      const T i = act[base + j], f = act[base + hidden + j];
      const T g = act[base + 2 * hidden + j], o = act[base + 3 * hidden + j];
      const T tc = std::tanh(c_out[k]);
      const T dhk = dh ? dh[k] : T(0);
      const T dct = (dc ? dc[k] : T(0)) + dhk * o * (T(1) - tc * tc);
      dgates[base + j] = dct * g * i * (T(1) - i);
      dgates[base + hidden + j] = dct * c_prev[k] * f * (T(1) - f);
      dgates[base + 2 * hidden + j] = dct * i * (T(1) - g * g);
      dgates[base + 3 * hidden + j] = dhk * tc * o * (T(1) - o);
      dc_prev[k] = dct * f;
    }
  }
}

}  // namespace reference

#define AON_KERNELS_INSTANTIATE(NS, T)                                                     \
  template void NS::gemm<T>(bool, bool, Index, Index, Index, T, const T*, const T*, T,     \
                            T*);                                                           \
  template void NS::im2col3x3<T>(const T*, Index, Index, Index, Index, T*);                \
  template void NS::col2im3x3<T>(const T*, Index, Index, Index, Index, T*);                \
  template void NS::maxpool_forward<T>(const T*, Index, const PoolGeometry&, T*,           \
                                       std::int32_t*);                                     \
  template void NS::maxpool_backward<T>(const T*, const std::int32_t*, Index,              \
                                        const PoolGeometry&, T*);                          \
  template void NS::channel_moments<T>(const T*, Index, Index, Index, T*, T*);             \
  template void NS::lstm_pointwise_forward<T>(const T*, const T*, Index, Index, T*, T*,    \
                                              T*);                                         \
  template void NS::lstm_pointwise_backward<T>(const T*, const T*, const T*, const T*,     \
                                               const T*, Index, Index, T*, T*);

namespace prod = ::aon::kernels;
namespace ref = ::aon::kernels::reference;
AON_KERNELS_INSTANTIATE(prod, float)
AON_KERNELS_INSTANTIATE(prod, double)
AON_KERNELS_INSTANTIATE(ref, float)
AON_KERNELS_INSTANTIATE(ref, double)
template void reference::conv3x3<float>(const float*, const float*, const float*, Index, Index,
                                        Index, Index, Index, float*);
template void reference::conv3x3<double>(const double*, const double*, const double*, Index,
                                         Index, Index, Index, Index, double*);

}  // namespace aon::kernels
