#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tsr/tensor.hpp"

namespace tsr {

// Compares reverse-mode gradients against central finite differences.
// `build` must construct the forward pass from scratch on every call and
// return a scalar loss; it receives a tape when gradients should be recorded
// and nullptr during the finite-difference probes. Returns the largest
// relative error over every element of every tensor in `wrt`, where the
// error is |analytic - numeric| / max(1, |analytic|, |numeric|).
template <typename T>
T grad_check(const std::function<Tensor<T>(Tape<T>*)>& build,
             const std::vector<Tensor<T>>& wrt, T eps = static_cast<T>(1e-3)) {
  for (const Tensor<T>& t : wrt) {
    if (!t.requires_grad()) throw TensorError("grad_check target does not require gradients");
    t.zero_grad();
  }

  Tape<T> tape;
  Tensor<T> loss = build(&tape);
  if (loss.numel() != 1) throw TensorError("grad_check needs a scalar loss");
  tape.backward(loss);

  std::vector<std::vector<T>> analytic;
  analytic.reserve(wrt.size());
  for (const Tensor<T>& t : wrt)
    analytic.emplace_back(t.grad(), t.grad() + t.numel());

  T worst = T(0);
  for (size_t ti = 0; ti < wrt.size(); ++ti) {
    T* data = wrt[ti].data();
    const int64_t n = wrt[ti].numel();
    for (int64_t i = 0; i < n; ++i) {
      const T saved = data[i];
      data[i] = saved + eps;
      const T up = build(nullptr).item();
      data[i] = saved - eps;
      const T down = build(nullptr).item();
      data[i] = saved;
      const T numeric = (up - down) / (T(2) * eps);
      const T a = analytic[ti][static_cast<size_t>(i)];
      const T denom = std::max(T(1), std::max(std::abs(a), std::abs(numeric)));
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace tsr
