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

#ifndef AON_INIT_H_
#define AON_INIT_H_

#include <cstdint>
#include <random>

#include "aon/tensor.h"

namespace aon {

// Every stochastic component draws from this engine so runs replay exactly.
using Rng = std::mt19937_64;

// Values drawn from U(-bound, bound) in row-major order.
template <typename T>
Tensor<T> uniform_tensor(Shape shape, double bound, Rng& rng);

// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace aon

#endif  // AON_INIT_H_
