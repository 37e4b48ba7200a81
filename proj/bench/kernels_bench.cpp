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

// Parallel kernels against their serial reference versions at shapes taken
// from the toy model (batch 32, 32x32 input).
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aon/kernels.h"

namespace {

using aon::Index;
namespace k = aon::kernels;
namespace ref = aon::kernels::reference;

std::vector<float> random_buffer(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = dist(rng);
  return v;
}

// Conv-as-gemm: [out_ch, in_ch*9] x [in_ch*9, batch*h*w].
template <bool kParallel>
void BM_Gemm(benchmark::State& state) {
  const Index m = state.range(0), n = state.range(1), kk = state.range(2);
  const auto a = random_buffer(static_cast<std::size_t>(m * kk), 1);
  const auto b = random_buffer(static_cast<std::size_t>(kk * n), 2);
  std::vector<float> c(static_cast<std::size_t>(m * n));
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::gemm(false, false, m, n, kk, 1.0f, a.data(), b.data(), 0.0f, c.data());
    } else {
      ref::gemm(false, false, m, n, kk, 1.0f, a.data(), b.data(), 0.0f, c.data());
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m * n * kk);
}
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Args({64, 2048, 288})->Args({128, 512, 576});
BENCHMARK(BM_Gemm<false>)->Name("gemm/reference")->Args({64, 2048, 288})->Args({128, 512, 576});

template <bool kParallel>
void BM_Im2col(benchmark::State& state) {
  const Index batch = 32, ch = state.range(0), hw = state.range(1);
  const auto in = random_buffer(static_cast<std::size_t>(batch * ch * hw * hw), 3);
  std::vector<float> col(static_cast<std::size_t>(ch * 9 * batch * hw * hw));
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::im2col3x3(in.data(), batch, ch, hw, hw, col.data());
    } else {
      ref::im2col3x3(in.data(), batch, ch, hw, hw, col.data());
    }
    benchmark::DoNotOptimize(col.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(col.size() * 4));
}
BENCHMARK(BM_Im2col<true>)->Name("im2col3x3/parallel")->Args({16, 32})->Args({64, 8});
BENCHMARK(BM_Im2col<false>)->Name("im2col3x3/reference")->Args({16, 32})->Args({64, 8});

template <bool kParallel>
void BM_Maxpool(benchmark::State& state) {
  const Index planes = 32 * 32, hw = state.range(0);
  const k::PoolGeometry g{hw, hw, hw / 2, hw / 2, 2, 2, 2, 2};
  const auto in = random_buffer(static_cast<std::size_t>(planes * hw * hw), 4);
  std::vector<float> out(static_cast<std::size_t>(planes * g.out_h * g.out_w));
  std::vector<std::int32_t> argmax(out.size());
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::maxpool_forward(in.data(), planes, g, out.data(), argmax.data());
    } else {
      ref::maxpool_forward(in.data(), planes, g, out.data(), argmax.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(in.size() * 4));
}
BENCHMARK(BM_Maxpool<true>)->Name("maxpool/parallel")->Arg(32)->Arg(16);
BENCHMARK(BM_Maxpool<false>)->Name("maxpool/reference")->Arg(32)->Arg(16);

template <bool kParallel>
void BM_ChannelMoments(benchmark::State& state) {
  const Index batch = 32, ch = state.range(0), spatial = state.range(1);
  const auto in = random_buffer(static_cast<std::size_t>(batch * ch * spatial), 5);
  std::vector<float> mean(static_cast<std::size_t>(ch)), var(static_cast<std::size_t>(ch));
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::channel_moments(in.data(), batch, ch, spatial, mean.data(), var.data());
    } else {
      ref::channel_moments(in.data(), batch, ch, spatial, mean.data(), var.data());
    }
    benchmark::DoNotOptimize(var.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(in.size() * 4));
}
BENCHMARK(BM_ChannelMoments<true>)->Name("channel_moments/parallel")->Args({16, 1024})->Args({64, 64});
BENCHMARK(BM_ChannelMoments<false>)->Name("channel_moments/reference")->Args({16, 1024})->Args({64, 64});

template <bool kParallel>
void BM_LstmPointwise(benchmark::State& state) {
  const Index n = state.range(0), hidden = state.range(1);
  const auto gates = random_buffer(static_cast<std::size_t>(n * 4 * hidden), 6);
  const auto c_prev = random_buffer(static_cast<std::size_t>(n * hidden), 7);
  std::vector<float> act(gates.size()), c(c_prev.size()), h(c_prev.size());
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::lstm_pointwise_forward(gates.data(), c_prev.data(), n, hidden, act.data(), c.data(),
                                h.data());
    } else {
      ref::lstm_pointwise_forward(gates.data(), c_prev.data(), n, hidden, act.data(), c.data(),
                                  h.data());
    }
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(state.iterations() * n * hidden);
}
BENCHMARK(BM_LstmPointwise<true>)->Name("lstm_pointwise/parallel")->Args({32, 64})->Args({512, 64});
BENCHMARK(BM_LstmPointwise<false>)->Name("lstm_pointwise/reference")->Args({32, 64})->Args({512, 64});

}  // namespace

BENCHMARK_MAIN();
