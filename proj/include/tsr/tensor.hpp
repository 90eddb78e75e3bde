#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsr {

struct TensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major tensor. Tensor objects are cheap handles sharing storage;
// copying a handle aliases the same values and gradient. The element type is
// float in production and double in the high-precision checking mode.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, T fill = T(0)) {
    s_ = std::make_shared<Storage>();
    s_->shape = std::move(shape);
    int64_t n = 1;
    for (int d : s_->shape) {
      if (d < 1) throw TensorError("tensor dimensions must be positive");
      n *= d;
    }
    s_->value.assign(static_cast<size_t>(n), fill);
  }

  static Tensor from(std::vector<int> shape, std::vector<T> data) {
    Tensor t(std::move(shape));
    if (data.size() != t.value_vec().size())
      throw TensorError("tensor data size does not match its shape");
    t.value_vec() = std::move(data);
    return t;
  }

  bool defined() const { return s_ != nullptr; }
  const std::vector<int>& shape() const { return s_->shape; }
  int dim(int i) const { return s_->shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(s_->shape.size()); }
  int64_t numel() const { return static_cast<int64_t>(s_->value.size()); }

  T* data() const { return s_->value.data(); }
  std::vector<T>& value_vec() const { return s_->value; }

  bool requires_grad() const { return s_ && s_->requires_grad; }
  void set_requires_grad(bool on) const {
    s_->requires_grad = on;
    if (on && s_->grad.size() != s_->value.size()) s_->grad.assign(s_->value.size(), T(0));
  }
  T* grad() const {
    if (!requires_grad()) throw TensorError("tensor has no gradient buffer");
    return s_->grad.data();
  }
  std::vector<T>& grad_vec() const { return s_->grad; }
  void zero_grad() const {
    if (requires_grad()) std::fill(s_->grad.begin(), s_->grad.end(), T(0));
  }

  T item() const {
    if (numel() != 1) throw TensorError("item() requires a single-element tensor");
    return s_->value[0];
  }

  // Deep copy of values (gradient buffer not carried over).
  Tensor clone() const { return from(s_->shape, s_->value); }

  bool same_storage(const Tensor& other) const { return s_ == other.s_; }

 private:
  struct Storage {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

// Reverse-mode tape. Operations append one backward step per forward call in
// execution order; backward() replays them in reverse, accumulating into the
// gradient buffers of every tensor that requires a gradient.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> step) { steps_.push_back(std::move(step)); }

  size_t size() const { return steps_.size(); }

  void backward(const Tensor<T>& loss) {
    if (loss.numel() != 1) throw TensorError("backward() expects a scalar loss");
    if (!loss.requires_grad())
      throw TensorError("backward() expects a loss connected to the tape");
    loss.grad()[0] += T(1);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  void clear() { steps_.clear(); }

 private:
  std::vector<std::function<void()>> steps_;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace tsr
