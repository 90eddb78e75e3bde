#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tsr/ops.hpp"
#include "tsr/rng.hpp"
#include "tsr/tensor.hpp"

namespace tsr {

// Learnable tensor plus its optimizer state. Moment buffers are sized lazily
// by the first optimizer step and travel with checkpoints.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> tensor;
  std::vector<T> m;  // first moment
  std::vector<T> v;  // second moment
};

// He/Kaiming uniform fan-in initialization, drawn through the portable Rng so
// a given seed reproduces weights everywhere.
template <typename T>
void kaiming_uniform(Rng& rng, const Tensor<T>& tensor, int64_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  T* data = tensor.data();
  const int64_t n = tensor.numel();
  for (int64_t i = 0; i < n; ++i) data[i] = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
struct Conv2d {
  Param<T> weight;  // [F,C,3,3]
  Param<T> bias;    // [F]

  void init(Rng& rng, int in_channels, int out_channels, const std::string& prefix) {
    weight.name = prefix + ".weight";
    weight.tensor = Tensor<T>({out_channels, in_channels, 3, 3});
    kaiming_uniform(rng, weight.tensor, static_cast<int64_t>(in_channels) * 9);
    weight.tensor.set_requires_grad(true);
    bias.name = prefix + ".bias";
    bias.tensor = Tensor<T>({out_channels});
    bias.tensor.set_requires_grad(true);
  }

  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x) const {
    return ops::conv2d(tape, x, weight.tensor, bias.tensor);
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

template <typename T>
struct Linear {
  Param<T> weight;  // [O,D]
  Param<T> bias;    // [O]

  void init(Rng& rng, int in_features, int out_features, const std::string& prefix) {
    weight.name = prefix + ".weight";
    weight.tensor = Tensor<T>({out_features, in_features});
    kaiming_uniform(rng, weight.tensor, in_features);
    weight.tensor.set_requires_grad(true);
    bias.name = prefix + ".bias";
    bias.tensor = Tensor<T>({out_features});
    bias.tensor.set_requires_grad(true);
  }

  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x) const {
    return ops::linear(tape, x, weight.tensor, bias.tensor);
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

// Batch normalization over [N,C,H,W] with per-channel affine parameters.
// Training normalizes with batch statistics (biased variance) and maintains
// exponential running statistics (unbiased variance, momentum towards the
// fresh batch). Evaluation requires initialized running statistics.
template <typename T>
struct BatchNorm2d {
  static constexpr double kMomentum = 0.1;
  static constexpr double kEps = 1e-5;

  Param<T> gamma;
  Param<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  bool initialized = false;
  std::string prefix;

  void init(int channels, const std::string& name_prefix) {
    prefix = name_prefix;
    gamma.name = prefix + ".gamma";
    gamma.tensor = Tensor<T>({channels}, T(1));
    gamma.tensor.set_requires_grad(true);
    beta.name = prefix + ".beta";
    beta.tensor = Tensor<T>({channels});
    beta.tensor.set_requires_grad(true);
    running_mean.assign(static_cast<size_t>(channels), T(0));
    running_var.assign(static_cast<size_t>(channels), T(1));
  }

  int channels() const { return gamma.tensor.dim(0); }

  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x, bool training) {
    ops::detail::expect<T>(x.ndim() == 4, "batchnorm input must be [N,C,H,W]");
    ops::detail::expect<T>(x.dim(1) == channels(), "batchnorm channel mismatch");
    const int n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor<T> y(x.shape());

    if (!training) {
      if (!initialized)
        throw TensorError("batchnorm evaluated before any training step or checkpoint load");
      kernels::bn_forward_eval(x.data(), gamma.tensor.data(), beta.tensor.data(),
                               running_mean.data(), running_var.data(), static_cast<T>(kEps),
                               y.data(), n, c, hw);
      if (tape && ops::detail::any_grad<T>({x, gamma.tensor, beta.tensor})) {
        y.set_requires_grad(true);
        // Running statistics are constants here, so the backward pass is a
        // per-channel affine map.
        auto rmean = std::make_shared<std::vector<T>>(running_mean);
        auto rvar = std::make_shared<std::vector<T>>(running_var);
        Tensor<T> g = gamma.tensor, b = beta.tensor;
        tape->record([x, g, b, y, rmean, rvar, n, c, hw]() {
          for (int ch = 0; ch < c; ++ch) {
            const T invstd = T(1) / std::sqrt((*rvar)[ch] + static_cast<T>(kEps));
            T sg = T(0), sb = T(0);
            for (int s = 0; s < n; ++s) {
              const size_t base = (static_cast<size_t>(s) * c + ch) * hw;
              for (int i = 0; i < hw; ++i) {
                const T gy = y.grad()[base + i];
                sb += gy;
                sg += gy * (x.data()[base + i] - (*rmean)[ch]) * invstd;
                if (x.requires_grad()) x.grad()[base + i] += gy * g.data()[ch] * invstd;
              }
            }
            if (g.requires_grad()) g.grad()[ch] += sg;
            if (b.requires_grad()) b.grad()[ch] += sb;
          }
        });
      }
      return y;
    }

    const int64_t m = static_cast<int64_t>(n) * hw;
    ops::detail::expect<T>(m > 1, "batchnorm training needs more than one value per channel");
    Tensor<T> xhat(x.shape());
    auto mean = std::make_shared<std::vector<T>>(static_cast<size_t>(c));
    auto var = std::make_shared<std::vector<T>>(static_cast<size_t>(c));
    auto invstd = std::make_shared<std::vector<T>>(static_cast<size_t>(c));
    kernels::bn_forward_train(x.data(), gamma.tensor.data(), beta.tensor.data(),
                              static_cast<T>(kEps), y.data(), xhat.data(), mean->data(),
                              var->data(), invstd->data(), n, c, hw);

    const T mom = static_cast<T>(kMomentum);
    const T unbias = static_cast<T>(m) / static_cast<T>(m - 1);
    for (int ch = 0; ch < c; ++ch) {
      running_mean[ch] = (T(1) - mom) * running_mean[ch] + mom * (*mean)[ch];
      running_var[ch] = (T(1) - mom) * running_var[ch] + mom * (*var)[ch] * unbias;
    }
    initialized = true;

    if (tape && ops::detail::any_grad<T>({x, gamma.tensor, beta.tensor})) {
      y.set_requires_grad(true);
      Tensor<T> g = gamma.tensor;
      Tensor<T> b = beta.tensor;
      tape->record([x, g, b, y, xhat, invstd, n, c, hw]() {
        // The kernel accumulates all three gradients; route the ones that are
        // not tracked into scratch.
        std::vector<T> scratch_x, scratch_g, scratch_b;
        T* gx = nullptr;
        if (x.requires_grad()) {
          gx = x.grad();
        } else {
          scratch_x.assign(static_cast<size_t>(x.numel()), T(0));
          gx = scratch_x.data();
        }
        T* gg = nullptr;
        if (g.requires_grad()) {
          gg = g.grad();
        } else {
          scratch_g.assign(static_cast<size_t>(c), T(0));
          gg = scratch_g.data();
        }
        T* gb = nullptr;
        if (b.requires_grad()) {
          gb = b.grad();
        } else {
          scratch_b.assign(static_cast<size_t>(c), T(0));
          gb = scratch_b.data();
        }
        kernels::bn_backward(y.grad(), xhat.data(), invstd->data(), g.data(), gx, gg, gb, n, c,
                             hw);
      });
    }
    return y;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }
};

}  // namespace tsr
