#pragma once

#include <cmath>
#include <vector>

#include "tsr/layers.hpp"

namespace tsr {

// AdamW: Adam with bias-corrected moments and weight decay decoupled from the
// gradient, applied directly to the parameters each step.
template <typename T>
struct AdamW {
  T lr = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);
  T weight_decay = T(0);
  int64_t step_count = 0;

  void zero_grad(const std::vector<Param<T>*>& params) {
    for (Param<T>* p : params) p->tensor.zero_grad();
  }

  void step(const std::vector<Param<T>*>& params) {
    ++step_count;
    const T bc1 = T(1) - std::pow(beta1, static_cast<T>(step_count));
    const T bc2 = T(1) - std::pow(beta2, static_cast<T>(step_count));
    for (Param<T>* p : params) {
      const size_t n = static_cast<size_t>(p->tensor.numel());
      if (p->m.size() != n) p->m.assign(n, T(0));
      if (p->v.size() != n) p->v.assign(n, T(0));
      T* theta = p->tensor.data();
      const T* g = p->tensor.grad();
      for (size_t i = 0; i < n; ++i) {
        theta[i] -= lr * weight_decay * theta[i];
        p->m[i] = beta1 * p->m[i] + (T(1) - beta1) * g[i];
        p->v[i] = beta2 * p->v[i] + (T(1) - beta2) * g[i] * g[i];
        const T mhat = p->m[i] / bc1;
        const T vhat = p->v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

}  // namespace tsr
