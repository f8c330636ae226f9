// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lit/error.hpp"
#include "lit/tensor.hpp"

namespace lit {

namespace detail {
inline thread_local int nograd_depth = 0;
}

// Suppresses recording for its lifetime (teacher forward passes, evaluation).
class NoGradScope {
 public:
  NoGradScope() { ++detail::nograd_depth; }
  ~NoGradScope() { --detail::nograd_depth; }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;
};

// Records one training step's operations in execution order (which is a
// topological order of the DAG). backward() replays the closures in reverse
// exactly once, then the tape is consumed.
template <typename T>
class Tape {
 public:
  struct Node {
    const char* op;
    std::function<void()> backward;
  };

  void record(const char* op, std::function<void()> fn) {
    nodes_.push_back({op, std::move(fn)});
  }

  std::size_t size() const { return nodes_.size(); }

  void run_backward() {
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
    nodes_.clear();
  }

  static Tape*& active_slot() {
    thread_local Tape* active = nullptr;
    return active;
  }
  static Tape* active() { return active_slot(); }

  // Recording is on when a tape is active and no NoGradScope is open.
  static bool recording() { return active_slot() != nullptr && detail::nograd_depth == 0; }

 private:
  std::vector<Node> nodes_;
};

// Owns a tape and makes it the active one for the current thread.
template <typename T>
class TapeScope {
 public:
  TapeScope() : prev_(Tape<T>::active_slot()) { Tape<T>::active_slot() = &tape_; }
  ~TapeScope() { Tape<T>::active_slot() = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

  Tape<T>& tape() { return tape_; }

 private:
  Tape<T> tape_;
  Tape<T>* prev_;
};

// Seeds d(loss)/d(loss) = 1 and replays the active tape in reverse. Consumes
// the tape; gradients are accumulated into every reachable requires-grad
// tensor's grad buffer.
template <typename T>
void backward(Tensor<T>& loss) {
  if (loss.numel() != 1)
    fail(ErrorKind::Usage, "backward() needs a scalar loss, got " + shape_str(loss.shape()));
  if (!loss.requires_grad())
    fail(ErrorKind::Usage, "backward() loss is not connected to any requires-grad tensor");
  auto* tape = Tape<T>::active();
  if (!tape) fail(ErrorKind::Usage, "backward() called with no active tape");
  loss.grad_mut()[0] = T(1);
  tape->run_backward();
}

}  // namespace lit
