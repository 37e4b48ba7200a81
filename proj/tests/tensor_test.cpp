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

#include "aon/tensor.h"

#include <limits>

#include "aon/ops.h"
#include "doctest.h"

using aon::Shape;
using aon::Tensor;

TEST_CASE("element count equals product of extents") {
  Tensor<float> t(Shape{2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(aon::numel(t.shape()) == 24);
  CHECK_THROWS_AS(Tensor<float>(Shape{2, 0}), aon::DimensionError);
  CHECK_THROWS_AS(Tensor<float>(Shape{2, 2}, std::vector<float>{1, 2, 3}), aon::DimensionError);
}

TEST_CASE("gradient buffer mirrors value shape") {
  Tensor<double> t(Shape{3, 2}, 1.0);
  CHECK_FALSE(t.has_grad());
  auto g = t.grad_mut();
  CHECK(g.size() == 6);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("copies share storage and clone does not") {
  Tensor<float> a(Shape{2}, 1.0f);
  Tensor<float> b = a;
  Tensor<float> c = a.clone();
  a[0] = 5.0f;
  CHECK(b[0] == 5.0f);
  CHECK(c[0] == 1.0f);
}

TEST_CASE("parameter set keeps registration order and unique names") {
  aon::ParameterSet<float> params;
  params.add("z", Tensor<float>(Shape{1}));
  params.add("a", Tensor<float>(Shape{2}));
  params.add("m", Tensor<float>(Shape{3}));
  std::vector<std::string> names;
  for (const auto& [name, t] : params) {
    names.push_back(name);
    CHECK(t.requires_grad());
  }
  CHECK(names == std::vector<std::string>{"z", "a", "m"});
  CHECK(params.total_elements() == 6);
  CHECK_THROWS_AS(params.add("a", Tensor<float>(Shape{1})), aon::ConfigError);
}

TEST_CASE("backward of sum gives ones") {
  Tensor<double> x(Shape{4}, std::vector<double>{1, -2, 3, 0.5});
  x.set_requires_grad(true);
  aon::Tape<double> tape;
  aon::ScopedTape<double> scope(tape);
  auto loss = aon::sum(x);
  tape.backward(loss);
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of sum of squares gives 2x") {
  Tensor<double> x(Shape{3}, std::vector<double>{1.5, -2, 0.25});
  x.set_requires_grad(true);
  aon::Tape<double> tape;
  aon::ScopedTape<double> scope(tape);
  auto loss = aon::sum(aon::mul(x, x));
  tape.backward(loss);
  for (aon::Index i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(2 * x[i]));
}

TEST_CASE("backward rejects non-scalar and detached losses") {
  Tensor<double> x(Shape{3}, 1.0);
  x.set_requires_grad(true);
  aon::Tape<double> tape;
  aon::ScopedTape<double> scope(tape);
  auto y = aon::tanh(x);
  CHECK_THROWS_AS(tape.backward(y), aon::ContractError);
  Tensor<double> c = Tensor<double>::scalar(2.0);
  CHECK_THROWS_AS(tape.backward(c), aon::ContractError);
}

TEST_CASE("unreachable parameters keep a zero gradient") {
  aon::ParameterSet<double> params;
  auto used = params.add("used", Tensor<double>(Shape{2}, 1.0));
  auto unused = params.add("unused", Tensor<double>(Shape{2}, 1.0));
  params.zero_grad();
  aon::Tape<double> tape;
  aon::ScopedTape<double> scope(tape);
  auto loss = aon::sum(used);
  tape.backward(loss);
  CHECK(used.grad()[0] == 1.0);
  CHECK(unused.grad()[0] == 0.0);
  CHECK(unused.grad()[1] == 0.0);
}

TEST_CASE("no tape means no recording") {
  Tensor<float> x(Shape{2}, 1.0f);
  x.set_requires_grad(true);
  auto y = aon::tanh(x);
  CHECK_FALSE(y.requires_grad());
  aon::Tape<float> tape;
  aon::ScopedTape<float> scope(tape);
  {
    aon::NoGradScope<float> off;
    auto z = aon::tanh(x);
    CHECK_FALSE(z.requires_grad());
  }
  auto w = aon::tanh(x);
  CHECK(w.requires_grad());
  CHECK(tape.size() == 1);
}

TEST_CASE("check_finite flags NaN and Inf") {
  std::vector<float> ok{1, 2, 3};
  std::vector<float> bad{1, std::numeric_limits<float>::infinity()};
  CHECK_NOTHROW(aon::check_finite<float>(ok, "ok"));
  CHECK_THROWS_AS(aon::check_finite<float>(bad, "bad"), aon::NumericError);
}
