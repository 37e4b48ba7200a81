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

#include "aon/filter_gate.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace aon {

namespace {

// Ascending sort of four values with a fixed compare-exchange network.
template <typename T>
inline T ordered_sum(std::array<T, 4> p) {
  auto cx = [&p](int a, int b) {
    if (p[b] < p[a]) std::swap(p[a], p[b]);
  };
  cx(0, 1);
  cx(2, 3);
  cx(0, 2);
  cx(1, 3);
  cx(1, 2);
  return ((p[0] + p[1]) + p[2]) + p[3];
}

}  // namespace

template <typename T>
Tensor<T> fuse(const FourDirectionFeatures<T>& f, const Tensor<T>& clues) {
  const std::array<const Tensor<T>*, 4> dirs = {&f.fwd_h, &f.rev_h, &f.fwd_v, &f.rev_v};
  for (const Tensor<T>* d : dirs) {
    if (!d->defined() || d->rank() != 3 || d->shape() != f.fwd_h.shape()) {
      throw DimensionError("fuse: direction sequences must share one [L,N,D] shape");
    }
  }
  const Index len = f.fwd_h.dim(0), n = f.fwd_h.dim(1), d = f.fwd_h.dim(2);
  if (!clues.defined() || clues.shape() != Shape{len, n, 4}) {
    throw DimensionError("fuse: clues " + (clues.defined() ? to_string(clues.shape()) : "[]") +
                         " do not match features " + to_string(f.fwd_h.shape()));
  }
  Tensor<T> out(Shape{len, n, d});
  // tanh rounds to +-1 for large arguments; keep the range open.
  const T hi = std::nextafter(T(1), T(0));
  for (Index r = 0; r < len * n; ++r) {
    const T* c = clues.ptr() + r * 4;
    for (Index k = 0; k < d; ++k) {
      const Index e = r * d + k;
      const T y = std::tanh(ordered_sum<T>({c[0] * (*dirs[0])[e], c[1] * (*dirs[1])[e],
                                            c[2] * (*dirs[2])[e], c[3] * (*dirs[3])[e]}));
      out[e] = std::clamp(y, -hi, hi);
    }
  }
  const Tensor<T>& a = f.fwd_h;
  const Tensor<T>& b = f.rev_h;
  const Tensor<T>& v = f.fwd_v;
  const Tensor<T>& w = f.rev_v;
  if (auto* tape = recording_tape<T>({&a, &b, &v, &w, &clues})) {
    out.set_requires_grad(true);
    tape->record([f, clues, out, len, n, d]() {
      if (!out.has_grad()) return;
      const std::array<Tensor<T>, 4> ds = {f.fwd_h, f.rev_h, f.fwd_v, f.rev_v};
      std::array<T*, 4> gd{};
      for (int j = 0; j < 4; ++j) {
        gd[j] = ds[j].requires_grad() ? ds[j].grad_mut().data() : nullptr;
      }
      T* gc = clues.requires_grad() ? clues.grad_mut().data() : nullptr;
      const T* go = out.grad().data();
      for (Index r = 0; r < len * n; ++r) {
        const T* c = clues.ptr() + r * 4;
        for (Index k = 0; k < d; ++k) {
          const Index e = r * d + k;
          const T y = out[e];
          const T dpre = go[e] * (T(1) - y * y);
          for (int j = 0; j < 4; ++j) {
            if (gd[j]) gd[j][e] += dpre * c[j];
            if (gc) gc[r * 4 + j] += dpre * ds[j][e];
          }
        }
      }
    });
  }
  return out;
}

template Tensor<float> fuse<float>(const FourDirectionFeatures<float>&, const Tensor<float>&);
template Tensor<double> fuse<double>(const FourDirectionFeatures<double>&, const Tensor<double>&);

}  // namespace aon
