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

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aon {

Index numel(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {
void validate_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (Index e : shape) {
    if (e < 1) throw DimensionError("tensor extents must be positive: " + to_string(shape));
  }
}
}  // namespace

template <typename T>
Tensor<T>::Tensor() = default;

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<detail::TensorNode<T>>()) {
  validate_shape(shape);
  node_->value.assign(static_cast<std::size_t>(numel(shape)), fill);
  node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : node_(std::make_shared<detail::TensorNode<T>>()) {
  validate_shape(shape);
  if (static_cast<Index>(values.size()) != numel(shape)) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + to_string(shape));
  }
  node_->value = std::move(values);
  node_->shape = std::move(shape);
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ContractError("item() on non-scalar tensor " + to_string(shape()));
  return node_->value[0];
}

template <typename T>
std::span<T> Tensor<T>::grad_mut() const {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), T(0));
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() const {
  node_->grad.assign(node_->value.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor<T>(node_->shape, node_->value);
}

namespace {
template <typename T>
thread_local Tape<T>* g_active_tape = nullptr;
}

template <typename T>
void Tape<T>::record(std::function<void()> backward_fn) {
  entries_.push_back(std::move(backward_fn));
}

template <typename T>
void Tape<T>::backward(Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() requires a scalar loss");
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward() loss is not connected to any trainable tensor");
  }
  check_finite<T>(loss.data(), "loss");
  loss.grad_mut()[0] += T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  entries_.clear();
}

template <typename T>
Tape<T>* Tape<T>::active() {
  return g_active_tape<T>;
}

template <typename T>
Tape<T>* Tape<T>::exchange_active(Tape* tape) {
  return std::exchange(g_active_tape<T>, tape);
}

template <typename T>
ScopedTape<T>::ScopedTape(Tape<T>& tape) : previous_(Tape<T>::exchange_active(&tape)) {}

template <typename T>
ScopedTape<T>::~ScopedTape() {
  Tape<T>::exchange_active(previous_);
}

template <typename T>
NoGradScope<T>::NoGradScope() : previous_(Tape<T>::exchange_active(nullptr)) {}

template <typename T>
NoGradScope<T>::~NoGradScope() {
  Tape<T>::exchange_active(previous_);
}

template <typename T>
Tape<T>* recording_tape(std::initializer_list<const Tensor<T>*> inputs) {
  Tape<T>* tape = Tape<T>::active();
  if (!tape) return nullptr;
  for (const Tensor<T>* t : inputs) {
    if (t->defined() && t->requires_grad()) return tape;
  }
  return nullptr;
}

template <typename T>
Tape<T>* recording_tape(const std::vector<Tensor<T>>& inputs) {
  Tape<T>* tape = Tape<T>::active();
  if (!tape) return nullptr;
  for (const Tensor<T>& t : inputs) {
    if (t.defined() && t.requires_grad()) return tape;
  }
  return nullptr;
}

template <typename T>
Tensor<T> NamedTensors<T>::add(const std::string& name, Tensor<T> tensor) {
  if (contains(name)) throw ConfigError("duplicate tensor name: " + name);
  entries_.emplace_back(name, std::move(tensor));
  return entries_.back().second;
}

template <typename T>
bool NamedTensors<T>::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.first == name; });
}

template <typename T>
Tensor<T>& NamedTensors<T>::at(const std::string& name) {
  for (auto& e : entries_) {
    if (e.first == name) return e.second;
  }
  throw ConfigError("unknown tensor name: " + name);
}

template <typename T>
const Tensor<T>& NamedTensors<T>::at(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return e.second;
  }
  throw ConfigError("unknown tensor name: " + name);
}

template <typename T>
Index NamedTensors<T>::total_elements() const {
  Index n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
Tensor<T> ParameterSet<T>::add(const std::string& name, Tensor<T> tensor) {
  tensor.set_requires_grad(true);
  return NamedTensors<T>::add(name, std::move(tensor));
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : this->entries_) e.second.zero_grad();
}

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void check_finite(std::span<const T> values, const std::string& what) {
  if (!all_finite<T>(values)) throw NumericError("non-finite value in " + what);
}

#define AON_INSTANTIATE(T)                                                       \
  template class Tensor<T>;                                                      \
  template class Tape<T>;                                                        \
  template class ScopedTape<T>;                                                  \
  template class NoGradScope<T>;                                                 \
  template class NamedTensors<T>;                                                \
  template class ParameterSet<T>;                                                \
  template Tape<T>* recording_tape<T>(std::initializer_list<const Tensor<T>*>);  \
  template Tape<T>* recording_tape<T>(const std::vector<Tensor<T>>&);            \
  template bool all_finite<T>(std::span<const T>);                               \
  template void check_finite<T>(std::span<const T>, const std::string&);

AON_INSTANTIATE(float)
AON_INSTANTIATE(double)

}  // namespace aon
