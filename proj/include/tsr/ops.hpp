#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "tsr/kernels.hpp"
#include "tsr/tensor.hpp"

namespace tsr::ops {

namespace detail {

template <typename T>
bool any_grad(std::initializer_list<Tensor<T>> ts) {
  for (const Tensor<T>& t : ts)
    if (t.requires_grad()) return true;
  return false;
}

template <typename T>
void expect(bool ok, const char* what) {
  if (!ok) throw TensorError(what);
}

}  // namespace detail

// 3x3 convolution, stride 1, zero padding 1; spatial size is preserved.
// x: [N,C,H,W], w: [F,C,3,3], b: [F] -> [N,F,H,W]
template <typename T>
Tensor<T> conv2d(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  detail::expect<T>(x.ndim() == 4, "conv2d input must be [N,C,H,W]");
  detail::expect<T>(w.ndim() == 4 && w.dim(2) == 3 && w.dim(3) == 3,
                    "conv2d weight must be [F,C,3,3]");
  detail::expect<T>(b.ndim() == 1 && b.dim(0) == w.dim(0), "conv2d bias must be [F]");
  detail::expect<T>(x.dim(1) == w.dim(1), "conv2d channel mismatch");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3), f = w.dim(0);

  Tensor<T> y({n, f, h, wd});
  kernels::conv3x3_forward(x.data(), w.data(), b.data(), y.data(), n, c, h, wd, f);
  if (tape && detail::any_grad<T>({x, w, b})) {
    y.set_requires_grad(true);
    tape->record([x, w, b, y, n, c, h, wd, f]() {
      if (x.requires_grad())
        kernels::conv3x3_backward_input(y.grad(), w.data(), x.grad(), n, c, h, wd, f);
      if (w.requires_grad() || b.requires_grad())
        kernels::conv3x3_backward_filter(y.grad(), x.data(), w.grad(), b.grad(), n, c, h, wd, f);
    });
  }
  return y;
}

template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  kernels::relu_forward(x.data(), y.data(), static_cast<size_t>(x.numel()));
  if (tape && x.requires_grad()) {
    y.set_requires_grad(true);
    tape->record([x, y]() {
      kernels::relu_backward(y.grad(), x.data(), x.grad(), static_cast<size_t>(x.numel()));
    });
  }
  return y;
}

template <typename T>
Tensor<T> sigmoid(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  kernels::sigmoid_forward(x.data(), y.data(), static_cast<size_t>(x.numel()));
  if (tape && x.requires_grad()) {
    y.set_requires_grad(true);
    tape->record([x, y]() {
      kernels::sigmoid_backward(y.grad(), y.data(), x.grad(), static_cast<size_t>(x.numel()));
    });
  }
  return y;
}

// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
// Ties route the gradient to the first maximum in row-major window order.
template <typename T>
Tensor<T> maxpool2(Tape<T>* tape, const Tensor<T>& x) {
  detail::expect<T>(x.ndim() == 4, "maxpool2 input must be [N,C,H,W]");
  detail::expect<T>(x.dim(2) >= 2 && x.dim(3) >= 2, "maxpool2 needs at least 2x2 input");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  Tensor<T> y({n, c, h / 2, wd / 2});
  auto argmax = std::make_shared<std::vector<int32_t>>(static_cast<size_t>(y.numel()));
  kernels::maxpool2_forward(x.data(), y.data(), argmax->data(), n * c, h, wd);
  if (tape && x.requires_grad()) {
    y.set_requires_grad(true);
    tape->record([x, y, argmax]() {
      kernels::maxpool2_backward(y.grad(), argmax->data(), x.grad(),
                                 static_cast<size_t>(y.numel()));
    });
  }
  return y;
}

// x: [N,D], w: [O,D], b: [O] -> [N,O]
template <typename T>
Tensor<T> linear(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  detail::expect<T>(x.ndim() == 2, "linear input must be [N,D]");
  detail::expect<T>(w.ndim() == 2, "linear weight must be [O,D]");
  detail::expect<T>(b.ndim() == 1 && b.dim(0) == w.dim(0), "linear bias must be [O]");
  detail::expect<T>(x.dim(1) == w.dim(1), "linear feature size mismatch");
  const int n = x.dim(0), d = x.dim(1), o = w.dim(0);
  Tensor<T> y({n, o});
  kernels::linear_forward(x.data(), w.data(), b.data(), y.data(), n, d, o);
  if (tape && detail::any_grad<T>({x, w, b})) {
    y.set_requires_grad(true);
    tape->record([x, w, b, y, n, d, o]() {
      if (x.requires_grad()) kernels::linear_backward_input(y.grad(), w.data(), x.grad(), n, d, o);
      if (w.requires_grad() || b.requires_grad())
        kernels::linear_backward_params(y.grad(), x.data(), w.grad(), b.grad(), n, d, o);
    });
  }
  return y;
}

template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  detail::expect<T>(a.shape() == b.shape(), "add requires identical shapes");
  Tensor<T> y(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) py[i] = pa[i] + pb[i];
  if (tape && detail::any_grad<T>({a, b})) {
    y.set_requires_grad(true);
    tape->record([a, b, y, n]() {
      const T* g = y.grad();
      if (a.requires_grad()) {
        T* ga = a.grad();
        for (int64_t i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        T* gb = b.grad();
        for (int64_t i = 0; i < n; ++i) gb[i] += g[i];
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  detail::expect<T>(a.shape() == b.shape(), "mul requires identical shapes");
  Tensor<T> y(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) py[i] = pa[i] * pb[i];
  if (tape && detail::any_grad<T>({a, b})) {
    y.set_requires_grad(true);
    tape->record([a, b, y, n]() {
      const T* g = y.grad();
      if (a.requires_grad()) {
        T* ga = a.grad();
        const T* pb2 = b.data();
        for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * pb2[i];
      }
      if (b.requires_grad()) {
        T* gb = b.grad();
        const T* pa2 = a.data();
        for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * pa2[i];
      }
    });
  }
  return y;
}

// Copying reshape; gradients flow through element by element.
template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& x, std::vector<int> shape) {
  Tensor<T> y(std::move(shape));
  detail::expect<T>(y.numel() == x.numel(), "reshape must preserve the element count");
  std::copy(x.data(), x.data() + x.numel(), y.data());
  if (tape && x.requires_grad()) {
    y.set_requires_grad(true);
    tape->record([x, y]() {
      const T* g = y.grad();
      T* gx = x.grad();
      const int64_t n = x.numel();
      for (int64_t i = 0; i < n; ++i) gx[i] += g[i];
    });
  }
  return y;
}

// Conditional attention gate: channel weights times spatial weights applied
// to a feature map. ca: [N,C,1,1], sp: [N,1,H,W], feat: [N,C,H,W].
template <typename T>
Tensor<T> attention_gate(Tape<T>* tape, const Tensor<T>& ca, const Tensor<T>& sp,
                         const Tensor<T>& feat) {
  detail::expect<T>(feat.ndim() == 4, "attention_gate feature must be [N,C,H,W]");
  const int n = feat.dim(0), c = feat.dim(1), h = feat.dim(2), wd = feat.dim(3);
  detail::expect<T>(ca.ndim() == 4 && ca.dim(0) == n && ca.dim(1) == c && ca.dim(2) == 1 &&
                        ca.dim(3) == 1,
                    "attention_gate channel weights must be [N,C,1,1]");
  detail::expect<T>(sp.ndim() == 4 && sp.dim(0) == n && sp.dim(1) == 1 && sp.dim(2) == h &&
                        sp.dim(3) == wd,
                    "attention_gate spatial weights must be [N,1,H,W]");
  const int hw = h * wd;
  Tensor<T> y({n, c, h, wd});
  kernels::attention_gate_forward(ca.data(), sp.data(), feat.data(), y.data(), n, c, hw);
  if (tape && detail::any_grad<T>({ca, sp, feat})) {
    y.set_requires_grad(true);
    tape->record([ca, sp, feat, y, n, c, hw]() {
      if (ca.requires_grad())
        kernels::attention_gate_backward_ca(y.grad(), sp.data(), feat.data(), ca.grad(), n, c, hw);
      if (sp.requires_grad())
        kernels::attention_gate_backward_sp(y.grad(), ca.data(), feat.data(), sp.grad(), n, c, hw);
      if (feat.requires_grad())
        kernels::attention_gate_backward_feat(y.grad(), ca.data(), sp.data(), feat.grad(), n, c,
                                              hw);
    });
  }
  return y;
}

// Row-wise softmax, numerically stabilized by subtracting the row maximum.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  detail::expect<T>(logits.ndim() == 2, "softmax_rows expects [N,K]");
  const int n = logits.dim(0), k = logits.dim(1);
  Tensor<T> p({n, k});
  for (int s = 0; s < n; ++s) {
    const T* row = logits.data() + static_cast<size_t>(s) * k;
    T* out = p.data() + static_cast<size_t>(s) * k;
    T m = row[0];
    for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
    T sum = T(0);
    for (int j = 0; j < k; ++j) {
      out[j] = std::exp(row[j] - m);
      sum += out[j];
    }
    for (int j = 0; j < k; ++j) out[j] /= sum;
  }
  return p;
}

// Predicted class per row; ties resolve to the lowest class index.
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& logits) {
  detail::expect<T>(logits.ndim() == 2, "argmax_rows expects [N,K]");
  const int n = logits.dim(0), k = logits.dim(1);
  std::vector<int> out(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s) {
    const T* row = logits.data() + static_cast<size_t>(s) * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;
    out[static_cast<size_t>(s)] = best;
  }
  return out;
}

// Weighted mean cross-entropy between softmax(logits) and integer labels:
// sum_s w[y_s]*CE_s / sum_s w[y_s]. Pass class_weights = nullptr (or the
// unweighted overload below) for the plain mean. The backward pass is
// w[y_s]/W * (softmax - one_hot) scaled by the upstream gradient.
template <typename T>
Tensor<T> softmax_cross_entropy(Tape<T>* tape, const Tensor<T>& logits,
                                const std::vector<int>& labels,
                                const std::vector<T>* class_weights) {
  detail::expect<T>(logits.ndim() == 2, "softmax_cross_entropy expects [N,K] logits");
  const int n = logits.dim(0), k = logits.dim(1);
  detail::expect<T>(static_cast<int>(labels.size()) == n,
                    "softmax_cross_entropy needs one label per row");
  for (int label : labels)
    detail::expect<T>(label >= 0 && label < k, "label outside the class range");
  if (class_weights) {
    detail::expect<T>(static_cast<int>(class_weights->size()) == k,
                      "softmax_cross_entropy needs one weight per class");
    for (T w : *class_weights) detail::expect<T>(w > T(0), "class weights must be positive");
  }
  auto weight_of = [class_weights](int label) {
    return class_weights ? (*class_weights)[static_cast<size_t>(label)] : T(1);
  };

  Tensor<T> probs = softmax_rows(logits);
  T total = T(0), weight_sum = T(0);
  for (int s = 0; s < n; ++s) {
    const int y = labels[static_cast<size_t>(s)];
    const T p = probs.data()[static_cast<size_t>(s) * k + y];
    total -= weight_of(y) * std::log(p);
    weight_sum += weight_of(y);
  }
  Tensor<T> loss({1});
  loss.data()[0] = total / weight_sum;

  if (tape && logits.requires_grad()) {
    loss.set_requires_grad(true);
    auto labels_copy = std::make_shared<std::vector<int>>(labels);
    auto weights_copy = std::make_shared<std::vector<T>>(
        class_weights ? *class_weights : std::vector<T>(static_cast<size_t>(k), T(1)));
    tape->record([logits, probs, loss, labels_copy, weights_copy, weight_sum, n, k]() {
      const T g = loss.grad()[0] / weight_sum;
      T* gl = logits.grad();
      const T* p = probs.data();
      for (int s = 0; s < n; ++s) {
        const int y = (*labels_copy)[static_cast<size_t>(s)];
        const T gw = g * (*weights_copy)[static_cast<size_t>(y)];
        for (int j = 0; j < k; ++j) {
          const T one = j == y ? T(1) : T(0);
          gl[static_cast<size_t>(s) * k + j] += gw * (p[static_cast<size_t>(s) * k + j] - one);
        }
      }
    });
  }
  return loss;
}

template <typename T>
Tensor<T> softmax_cross_entropy(Tape<T>* tape, const Tensor<T>& logits,
                                const std::vector<int>& labels) {
  return softmax_cross_entropy<T>(tape, logits, labels, nullptr);
}

// Scalar sum of all elements.
template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> y({1});
  const T* px = x.data();
  T acc = T(0);
  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) acc += px[i];
  y.data()[0] = acc;
  if (tape && x.requires_grad()) {
    y.set_requires_grad(true);
    tape->record([x, y, n]() {
      const T g = y.grad()[0];
      T* gx = x.grad();
      for (int64_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return y;
}

}  // namespace tsr::ops
