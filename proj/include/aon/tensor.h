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

#ifndef AON_TENSOR_H_
#define AON_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aon {

using Index = std::ptrdiff_t;
using Shape = std::vector<Index>;

// Error taxonomy shared by every module.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {
template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
};
}  // namespace detail

// Dense row-major tensor handle. Copies share storage; use clone() for a
// deep copy. Gradients are allocated lazily.
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor();
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  Index size() const { return static_cast<Index>(node_->value.size()); }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  T* ptr() { return node_->value.data(); }
  const T* ptr() const { return node_->value.data(); }
  T& operator[](Index i) { return node_->value[static_cast<std::size_t>(i)]; }
  T operator[](Index i) const { return node_->value[static_cast<std::size_t>(i)]; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) const { node_->requires_grad = on; }

  // Gradient storage belongs to the shared node, so these are callable through
  // const handles. grad_mut() allocates a zero gradient when absent.
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<T> grad_mut() const;
  std::span<const T> grad() const { return node_->grad; }
  void zero_grad() const;
  void clear_grad() const { node_->grad.clear(); }

  // Values-only copy, detached from any graph.
  Tensor clone() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<detail::TensorNode<T>> node_;
};

// Ordered record of differentiable operations. Ops register a closure when a
// tape is active on the calling thread and at least one input requires grad.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> backward_fn);
  // Seeds d(loss)/d(loss) = 1 and replays the record in reverse.
  void backward(Tensor<T>& loss);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  static Tape* active();
  // Installs `tape` as the thread's active tape and returns the previous one.
  static Tape* exchange_active(Tape* tape);

 private:
  std::vector<std::function<void()>> entries_;
};

// Makes a tape active on the current thread for the lifetime of the scope.
template <typename T>
class ScopedTape {
 public:
  explicit ScopedTape(Tape<T>& tape);
  ~ScopedTape();
  ScopedTape(const ScopedTape&) = delete;
  ScopedTape& operator=(const ScopedTape&) = delete;

 private:
  Tape<T>* previous_;
};

// Suspends recording for the current thread.
template <typename T>
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Returns the active tape when any of the inputs requires grad, else null.
template <typename T>
Tape<T>* recording_tape(std::initializer_list<const Tensor<T>*> inputs);
template <typename T>
Tape<T>* recording_tape(const std::vector<Tensor<T>>& inputs);

// Ordered, uniquely named tensors. Iteration follows registration order.
template <typename T>
class NamedTensors {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  // Returns a handle sharing storage with the stored tensor.
  Tensor<T> add(const std::string& name, Tensor<T> tensor);
  bool contains(const std::string& name) const;
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  Index total_elements() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 protected:
  std::vector<Entry> entries_;
};

// Trainable parameters; every member requires grad.
template <typename T>
class ParameterSet : public NamedTensors<T> {
 public:
  Tensor<T> add(const std::string& name, Tensor<T> tensor);
  void zero_grad();
};

template <typename T>
bool all_finite(std::span<const T> values);
// Throws NumericError naming `what` when any value is NaN or infinite.
template <typename T>
void check_finite(std::span<const T> values, const std::string& what);

}  // namespace aon

#endif  // AON_TENSOR_H_
