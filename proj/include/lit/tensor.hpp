// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lit/error.hpp"

namespace lit {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

template <typename T>
struct Storage {
  Shape shape;
  std::shared_ptr<std::vector<T>> values;  // shared so detach can alias
  std::vector<T> grad;                     // empty until first accumulation
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.empty()) grad.assign(values->size(), T(0));
  }
};

// Dense row-major n-d array. Handle semantics: copies share the buffer,
// clone() deep-copies. Gradients live beside the values and are filled by
// backward() on the recording tape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) {
    for (auto d : shape)
      if (d <= 0) fail(ErrorKind::Dimension, "tensor extents must be positive, got " + shape_str(shape));
    auto n = static_cast<std::size_t>(shape_numel(shape));
    s_ = std::make_shared<Storage<T>>();
    s_->shape = std::move(shape);
    s_->values = std::make_shared<std::vector<T>>(n, T(0));
  }

  Tensor(Shape shape, std::vector<T> values) : Tensor(std::move(shape)) {
    if (values.size() != s_->values->size())
      fail(ErrorKind::Dimension, "value count " + std::to_string(values.size()) +
                                     " does not match shape " + shape_str(s_->shape));
    *s_->values = std::move(values);
  }

  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  bool defined() const { return static_cast<bool>(s_); }
  const Shape& shape() const { return s_->shape; }
  int64_t numel() const { return static_cast<int64_t>(s_->values->size()); }
  int64_t dim(std::size_t i) const { return s_->shape.at(i); }
  std::size_t rank() const { return s_->shape.size(); }

  std::span<T> values() { return {s_->values->data(), s_->values->size()}; }
  std::span<const T> values() const { return {s_->values->data(), s_->values->size()}; }
  T* data() { return s_->values->data(); }
  const T* data() const { return s_->values->data(); }

  bool requires_grad() const { return s_ && s_->requires_grad; }
  Tensor& set_requires_grad(bool v) {
    s_->requires_grad = v;
    return *this;
  }

  bool has_grad() const { return s_ && !s_->grad.empty(); }
  std::span<const T> grad() const { return {s_->grad.data(), s_->grad.size()}; }
  std::span<T> grad_mut() {
    s_->ensure_grad();
    return {s_->grad.data(), s_->grad.size()};
  }
  void zero_grad() {
    if (s_) s_->grad.clear();
  }

  T item() const {
    if (numel() != 1) fail(ErrorKind::Usage, "item() on non-scalar tensor " + shape_str(shape()));
    return (*s_->values)[0];
  }

  // Shares the value buffer; severed from any tape, never accumulates gradient.
  Tensor detach() const {
    Tensor t;
    t.s_ = std::make_shared<Storage<T>>();
    t.s_->shape = s_->shape;
    t.s_->values = s_->values;
    return t;
  }

  Tensor clone() const {
    Tensor t(s_->shape, *s_->values);
    return t;
  }

  std::shared_ptr<Storage<T>> storage() const { return s_; }

 private:
  std::shared_ptr<Storage<T>> s_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape();
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!same_shape(a, b))
    fail(ErrorKind::Dimension, std::string(what) + ": shapes " + shape_str(a.shape()) + " and " +
                                   shape_str(b.shape()) + " differ");
}

}  // namespace lit
