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

#ifndef AON_KERNELS_H_
#define AON_KERNELS_H_

// Raw-buffer compute kernels behind the differentiable ops. The functions in
// aon::kernels are the production versions (OpenMP over independent outputs,
// Eigen for matrix products); aon::kernels::reference holds plain serial
// loops with the same contracts, used by the tests and the benchmark.
//
// Every parallel loop writes disjoint outputs and performs no cross-thread
// reduction, so results do not depend on the thread count.

#include <cstdint>

#include "aon/tensor.h"

namespace aon::kernels {

// C[m,n] = alpha * op(A)[m,k] * op(B)[k,n] + beta * C. Row-major buffers;
// op(X) is X or its transpose as stored.
template <typename T>
void gemm(bool trans_a, bool trans_b, Index m, Index n, Index k, T alpha, const T* a,
          const T* b, T beta, T* c);

// 3x3 / stride 1 / pad 1 patch extraction. `col` is [channels*9, batch*h*w],
// column index = n*h*w + y*w + x.
template <typename T>
void im2col3x3(const T* input, Index batch, Index channels, Index h, Index w, T* col);
// Adjoint of im2col3x3: accumulates `col` back into `input_grad`.
template <typename T>
void col2im3x3(const T* col, Index batch, Index channels, Index h, Index w, T* input_grad);

struct PoolGeometry {
  Index in_h, in_w, out_h, out_w;
  Index kh, kw, sh, sw;
};

// Max over each window; `argmax` receives the flat in-plane index of the first
// maximal element in row-major scan order.
template <typename T>
void maxpool_forward(const T* input, Index planes, const PoolGeometry& g, T* output,
                     std::int32_t* argmax);
template <typename T>
void maxpool_backward(const T* out_grad, const std::int32_t* argmax, Index planes,
                      const PoolGeometry& g, T* in_grad);

// Per-channel mean and biased variance over (batch, spatial) of NCHW data.
template <typename T>
void channel_moments(const T* input, Index batch, Index channels, Index spatial, T* mean,
                     T* var);

// LSTM pointwise stage. gates is [n, 4h] in (input, forget, cell, output)
// order, pre-activation. act receives post-activation gates.
template <typename T>
void lstm_pointwise_forward(const T* gates, const T* c_prev, Index n, Index hidden, T* act,
                            T* c_out, T* h_out);
template <typename T>
void lstm_pointwise_backward(const T* act, const T* c_prev, const T* c_out, const T* dh,
                             const T* dc, Index n, Index hidden, T* dgates, T* dc_prev);

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, Index m, Index n, Index k, T alpha, const T* a,
          const T* b, T beta, T* c);
// Direct 3x3 convolution, NCHW, pad 1.
template <typename T>
void conv3x3(const T* input, const T* weight, const T* bias, Index batch, Index in_ch,
             Index out_ch, Index h, Index w, T* output);
template <typename T>
void im2col3x3(const T* input, Index batch, Index channels, Index h, Index w, T* col);
template <typename T>
void col2im3x3(const T* col, Index batch, Index channels, Index h, Index w, T* input_grad);
template <typename T>
void maxpool_forward(const T* input, Index planes, const PoolGeometry& g, T* output,
                     std::int32_t* argmax);
template <typename T>
void maxpool_backward(const T* out_grad, const std::int32_t* argmax, Index planes,
                      const PoolGeometry& g, T* in_grad);
template <typename T>
void channel_moments(const T* input, Index batch, Index channels, Index spatial, T* mean,
                     T* var);
template <typename T>
void lstm_pointwise_forward(const T* gates, const T* c_prev, Index n, Index hidden, T* act,
                            T* c_out, T* h_out);
template <typename T>
void lstm_pointwise_backward(const T* act, const T* c_prev, const T* c_out, const T* dh,
                             const T* dc, Index n, Index hidden, T* dgates, T* dc_prev);

}  // namespace reference

}  // namespace aon::kernels

#endif  // AON_KERNELS_H_
