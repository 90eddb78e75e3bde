#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// The serial and OpenMP kernels promise bit-identical results. That only
// holds if both run the very same machine code per output element: once the
// compiler inlines (or ipa-clones) a helper into two different call sites it
// is free to make different fp-contraction (FMA) choices in each, and the
// bits drift. Hence every floating-point accumulation lives in a detail::
// helper pinned to a single copy — gcc needs noipa, since plain noinline
// still allows constprop clones.
#if defined(_MSC_VER)
#define TSR_NOINLINE __declspec(noinline)
#elif defined(__GNUC__) && !defined(__clang__)
#define TSR_NOINLINE __attribute__((noipa))
#else
#define TSR_NOINLINE __attribute__((noinline))
#endif

namespace tsr::kernels {

// Runtime switch between the serial reference kernels and the OpenMP ones.
// Both compute every output element with the same inner accumulation order,
// so results are bit-identical regardless of the switch or the thread count;
// the tests assert exactly that.
struct ExecConfig {
  bool parallel =
#ifdef _OPENMP
      true;
#else
      false;
#endif
};

inline ExecConfig& exec() {
  static ExecConfig config;
  return config;
}

namespace detail {

// Zero-pads each HxW plane by one pixel on every side.
template <typename T>
std::vector<T> pad1(const T* src, int planes, int h, int w) {
  const int ph = h + 2, pw = w + 2;
  std::vector<T> dst(static_cast<size_t>(planes) * ph * pw, T(0));
  for (int p = 0; p < planes; ++p) {
    const T* in = src + static_cast<size_t>(p) * h * w;
    T* out = dst.data() + static_cast<size_t>(p) * ph * pw;
    for (int y = 0; y < h; ++y)
      std::copy(in + static_cast<size_t>(y) * w, in + static_cast<size_t>(y + 1) * w,
                out + static_cast<size_t>(y + 1) * pw + 1);
  }
  return dst;
}

// 3x3 convolution of one padded input plane set into one output plane.
// Shared by the serial and parallel kernels: parallelism is only ever over
// independent output planes, never over this accumulation.
template <typename T>
TSR_NOINLINE void conv3x3_plane(const T* padded, int channels, int h, int w, const T* weights, T bias,
                   T* out) {
  const int pw = w + 2;
  const size_t plane = static_cast<size_t>(h + 2) * pw;
  std::fill(out, out + static_cast<size_t>(h) * w, bias);
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const T wv = weights[(static_cast<size_t>(c) * 3 + ky) * 3 + kx];
        const T* src = padded + c * plane + static_cast<size_t>(ky) * pw + kx;
        for (int y = 0; y < h; ++y) {
          const T* s = src + static_cast<size_t>(y) * pw;
          T* d = out + static_cast<size_t>(y) * w;
          for (int x = 0; x < w; ++x) d[x] += wv * s[x];
        }
      }
}

// Gradient w.r.t. one input plane: full correlation of the padded output
// gradient with the kernel rotated by 180 degrees, summed over filters.
template <typename T>
TSR_NOINLINE void conv3x3_input_grad_plane(const T* gout_padded, int filters, int h, int w, const T* weights,
                              int channels, int channel, T* gin) {
  const int pw = w + 2;
  const size_t plane = static_cast<size_t>(h + 2) * pw;
  for (int f = 0; f < filters; ++f)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const T wv = weights[((static_cast<size_t>(f) * channels + channel) * 3 + (2 - ky)) * 3 +
                             (2 - kx)];
        const T* src = gout_padded + f * plane + static_cast<size_t>(ky) * pw + kx;
        for (int y = 0; y < h; ++y) {
          const T* s = src + static_cast<size_t>(y) * pw;
          T* d = gin + static_cast<size_t>(y) * w;
          for (int x = 0; x < w; ++x) d[x] += wv * s[x];
        }
      }
}

// Gradient w.r.t. one filter tap: dot product over every sample and pixel.
template <typename T>
TSR_NOINLINE T conv3x3_tap_grad(const T* gout, const T* in_padded, int n, int h, int w, int filters,
                   int channels, int f, int c, int ky, int kx) {
  const int pw = w + 2;
  const size_t out_plane = static_cast<size_t>(h) * w;
  const size_t in_plane = static_cast<size_t>(h + 2) * pw;
  T acc = T(0);
  for (int s = 0; s < n; ++s) {
    const T* g = gout + (static_cast<size_t>(s) * filters + f) * out_plane;
    const T* src = in_padded + (static_cast<size_t>(s) * channels + c) * in_plane +
                   static_cast<size_t>(ky) * pw + kx;
    for (int y = 0; y < h; ++y) {
      const T* gr = g + static_cast<size_t>(y) * w;
      const T* sr = src + static_cast<size_t>(y) * pw;
      for (int x = 0; x < w; ++x) acc += gr[x] * sr[x];
    }
  }
  return acc;
}

template <typename T>
TSR_NOINLINE void maxpool2_plane(const T* in, int h, int w, T* out, int32_t* argmax, size_t in_offset) {
  const int oh = h / 2, ow = w / 2;
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      // Fixed scan order; the first maximum wins ties.
      size_t best = static_cast<size_t>(2 * y) * w + 2 * x;
      T bv = in[best];
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const size_t idx = static_cast<size_t>(2 * y + dy) * w + (2 * x + dx);
          if (in[idx] > bv) {
            bv = in[idx];
            best = idx;
          }
        }
      out[static_cast<size_t>(y) * ow + x] = bv;
      argmax[static_cast<size_t>(y) * ow + x] = static_cast<int32_t>(in_offset + best);
    }
}

// Per-channel batch statistics and normalization for one channel.
template <typename T>
TSR_NOINLINE void bn_channel_train(const T* x, int n, int c_total, int c, int hw, T gamma, T beta, T eps,
                      T* y, T* xhat, T* mean_out, T* var_out, T* invstd_out) {
  const size_t plane = static_cast<size_t>(hw);
  const T m = static_cast<T>(n) * static_cast<T>(hw);
  T sum = T(0);
  for (int s = 0; s < n; ++s) {
    const T* px = x + (static_cast<size_t>(s) * c_total + c) * plane;
    for (int i = 0; i < hw; ++i) sum += px[i];
  }
  const T mean = sum / m;
  T varsum = T(0);
  for (int s = 0; s < n; ++s) {
    const T* px = x + (static_cast<size_t>(s) * c_total + c) * plane;
    for (int i = 0; i < hw; ++i) {
      const T d = px[i] - mean;
      varsum += d * d;
    }
  }
  const T var = varsum / m;
  const T invstd = T(1) / std::sqrt(var + eps);
  for (int s = 0; s < n; ++s) {
    const T* px = x + (static_cast<size_t>(s) * c_total + c) * plane;
    T* py = y + (static_cast<size_t>(s) * c_total + c) * plane;
    T* ph = xhat + (static_cast<size_t>(s) * c_total + c) * plane;
    for (int i = 0; i < hw; ++i) {
      ph[i] = (px[i] - mean) * invstd;
      py[i] = gamma * ph[i] + beta;
    }
  }
  *mean_out = mean;
  *var_out = var;
  *invstd_out = invstd;
}

// One output row of a fully connected layer: bias plus dot product.
template <typename T>
TSR_NOINLINE T linear_out(const T* x, const T* w, T bias, int d) {
  T acc = bias;
  for (int i = 0; i < d; ++i) acc += x[i] * w[i];
  return acc;
}

// dst[i] += scale * src[i]
template <typename T>
TSR_NOINLINE void axpy(T* dst, const T* src, T scale, int count) {
  for (int i = 0; i < count; ++i) dst[i] += scale * src[i];
}

// Gradient of one weight row (and its bias) of a fully connected layer.
template <typename T>
TSR_NOINLINE T linear_param_row(const T* gy, const T* x, T* pw, int j, int n, int d, int o) {
  T accb = T(0);
  for (int s = 0; s < n; ++s) {
    const T g = gy[static_cast<size_t>(s) * o + j];
    const T* px = x + static_cast<size_t>(s) * d;
    for (int i = 0; i < d; ++i) pw[i] += g * px[i];
    accb += g;
  }
  return accb;
}

template <typename T>
TSR_NOINLINE void bn_eval_plane(const T* x, T* y, int hw, T gamma, T mean, T invstd, T beta) {
  for (int i = 0; i < hw; ++i) y[i] = gamma * (x[i] - mean) * invstd + beta;
}

template <typename T>
TSR_NOINLINE void relu_span(const T* x, T* y, size_t count) {
  for (size_t i = 0; i < count; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
TSR_NOINLINE void relu_grad_span(const T* gy, const T* x, T* gx, size_t count) {
  for (size_t i = 0; i < count; ++i) gx[i] += x[i] > T(0) ? gy[i] : T(0);
}

template <typename T>
TSR_NOINLINE void sigmoid_span(const T* x, T* y, size_t count) {
  for (size_t i = 0; i < count; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <typename T>
TSR_NOINLINE void sigmoid_grad_span(const T* gy, const T* y, T* gx, size_t count) {
  for (size_t i = 0; i < count; ++i) gx[i] += gy[i] * y[i] * (T(1) - y[i]);
}

template <typename T>
TSR_NOINLINE void attn_forward_plane(T a, const T* sp, const T* feat, T* out, int hw) {
  for (int i = 0; i < hw; ++i) out[i] = a * sp[i] * feat[i];
}

template <typename T>
TSR_NOINLINE T attn_ca_grad(const T* g, const T* sp, const T* feat, int hw) {
  T acc = T(0);
  for (int i = 0; i < hw; ++i) acc += g[i] * sp[i] * feat[i];
  return acc;
}

template <typename T>
TSR_NOINLINE void attn_sp_accum(const T* g, const T* feat, T a, T* gsp, int hw) {
  for (int i = 0; i < hw; ++i) gsp[i] += g[i] * a * feat[i];
}

template <typename T>
TSR_NOINLINE void attn_feat_accum(const T* g, const T* sp, T a, T* gfeat, int hw) {
  for (int i = 0; i < hw; ++i) gfeat[i] += g[i] * a * sp[i];
}

template <typename T>
TSR_NOINLINE void bn_channel_backward(const T* gy, const T* xhat, T invstd, T gamma, int n, int c_total,
                         int c, int hw, T* gx, T* ggamma, T* gbeta) {
  const size_t plane = static_cast<size_t>(hw);
  const T m = static_cast<T>(n) * static_cast<T>(hw);
  T s1 = T(0), s2 = T(0);
  for (int s = 0; s < n; ++s) {
    const T* pg = gy + (static_cast<size_t>(s) * c_total + c) * plane;
    const T* ph = xhat + (static_cast<size_t>(s) * c_total + c) * plane;
    for (int i = 0; i < hw; ++i) {
      s1 += pg[i];
      s2 += pg[i] * ph[i];
    }
  }
  const T mean_g = s1 / m;
  const T mean_gh = s2 / m;
  for (int s = 0; s < n; ++s) {
    const T* pg = gy + (static_cast<size_t>(s) * c_total + c) * plane;
    const T* ph = xhat + (static_cast<size_t>(s) * c_total + c) * plane;
    T* px = gx + (static_cast<size_t>(s) * c_total + c) * plane;
    for (int i = 0; i < hw; ++i)
      px[i] += gamma * invstd * (pg[i] - mean_g - ph[i] * mean_gh);
  }
  *ggamma += s2;
  *gbeta += s1;
}

}  // namespace detail

// ------------------------------------------------------------------
// Serial reference kernels: the plainest correct loops. These are the
// ground truth that the OpenMP kernels and the benchmark compare against.
// ------------------------------------------------------------------
namespace serial {

template <typename T>
void conv3x3_forward(const T* in, const T* w, const T* bias, T* out, int n, int c, int h,
                     int w_dim, int f) {
  const std::vector<T> padded = detail::pad1(in, n * c, h, w_dim);
  const size_t in_block = static_cast<size_t>(c) * (h + 2) * (w_dim + 2);
  const size_t out_plane = static_cast<size_t>(h) * w_dim;
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < f; ++k)
      detail::conv3x3_plane(padded.data() + s * in_block, c, h, w_dim,
                            w + static_cast<size_t>(k) * c * 9, bias[k],
                            out + (static_cast<size_t>(s) * f + k) * out_plane);
}

template <typename T>
void conv3x3_backward_input(const T* gout, const T* w, T* gin, int n, int c, int h, int w_dim,
                            int f) {
  const std::vector<T> gpad = detail::pad1(gout, n * f, h, w_dim);
  const size_t g_block = static_cast<size_t>(f) * (h + 2) * (w_dim + 2);
  const size_t in_plane = static_cast<size_t>(h) * w_dim;
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      detail::conv3x3_input_grad_plane(gpad.data() + s * g_block, f, h, w_dim, w, c, ch,
                                       gin + (static_cast<size_t>(s) * c + ch) * in_plane);
}

template <typename T>
void conv3x3_backward_filter(const T* gout, const T* in, T* gw, T* gbias, int n, int c, int h,
                             int w_dim, int f) {
  const std::vector<T> padded = detail::pad1(in, n * c, h, w_dim);
  for (int k = 0; k < f; ++k)
    for (int ch = 0; ch < c; ++ch)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx)
          gw[((static_cast<size_t>(k) * c + ch) * 3 + ky) * 3 + kx] +=
              detail::conv3x3_tap_grad(gout, padded.data(), n, h, w_dim, f, c, k, ch, ky, kx);
  const size_t out_plane = static_cast<size_t>(h) * w_dim;
  for (int k = 0; k < f; ++k) {
    T acc = T(0);
    for (int s = 0; s < n; ++s) {
      const T* g = gout + (static_cast<size_t>(s) * f + k) * out_plane;
      for (size_t i = 0; i < out_plane; ++i) acc += g[i];
    }
    gbias[k] += acc;
  }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* b, T* y, int n, int d, int o) {
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < o; ++j)
      y[static_cast<size_t>(s) * o + j] =
          detail::linear_out(x + static_cast<size_t>(s) * d, w + static_cast<size_t>(j) * d,
                             b[j], d);
}

template <typename T>
void linear_backward_input(const T* gy, const T* w, T* gx, int n, int d, int o) {
  for (int s = 0; s < n; ++s) {
    T* px = gx + static_cast<size_t>(s) * d;
    for (int j = 0; j < o; ++j)
      detail::axpy(px, w + static_cast<size_t>(j) * d, gy[static_cast<size_t>(s) * o + j], d);
  }
}

template <typename T>
void linear_backward_params(const T* gy, const T* x, T* gw, T* gb, int n, int d, int o) {
  for (int j = 0; j < o; ++j)
    gb[j] += detail::linear_param_row(gy, x, gw + static_cast<size_t>(j) * d, j, n, d, o);
}

template <typename T>
void maxpool2_forward(const T* in, T* out, int32_t* argmax, int planes, int h, int w) {
  const size_t in_plane = static_cast<size_t>(h) * w;
  const size_t out_plane = static_cast<size_t>(h / 2) * (w / 2);
  for (int p = 0; p < planes; ++p)
    detail::maxpool2_plane(in + p * in_plane, h, w, out + p * out_plane, argmax + p * out_plane,
                           p * in_plane);
}

template <typename T>
void maxpool2_backward(const T* gout, const int32_t* argmax, T* gin, size_t out_count) {
  for (size_t i = 0; i < out_count; ++i) gin[argmax[i]] += gout[i];
}

template <typename T>
void bn_forward_train(const T* x, const T* gamma, const T* beta, T eps, T* y, T* xhat, T* mean,
                      T* var, T* invstd, int n, int c, int hw) {
  for (int ch = 0; ch < c; ++ch)
    detail::bn_channel_train(x, n, c, ch, hw, gamma[ch], beta[ch], eps, y, xhat, &mean[ch],
                             &var[ch], &invstd[ch]);
}

template <typename T>
void bn_forward_eval(const T* x, const T* gamma, const T* beta, const T* rmean, const T* rvar,
                     T eps, T* y, int n, int c, int hw) {
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch) {
      const T invstd = T(1) / std::sqrt(rvar[ch] + eps);
      detail::bn_eval_plane(x + (static_cast<size_t>(s) * c + ch) * hw,
                            y + (static_cast<size_t>(s) * c + ch) * hw, hw, gamma[ch], rmean[ch],
                            invstd, beta[ch]);
    }
}

template <typename T>
void bn_backward(const T* gy, const T* xhat, const T* invstd, const T* gamma, T* gx, T* ggamma,
                 T* gbeta, int n, int c, int hw) {
  for (int ch = 0; ch < c; ++ch)
    detail::bn_channel_backward(gy, xhat, invstd[ch], gamma[ch], n, c, ch, hw, gx, &ggamma[ch],
                                &gbeta[ch]);
}

template <typename T>
void relu_forward(const T* x, T* y, size_t count) {
  detail::relu_span(x, y, count);
}

template <typename T>
void relu_backward(const T* gy, const T* x, T* gx, size_t count) {
  detail::relu_grad_span(gy, x, gx, count);
}

template <typename T>
void sigmoid_forward(const T* x, T* y, size_t count) {
  detail::sigmoid_span(x, y, count);
}

template <typename T>
void sigmoid_backward(const T* gy, const T* y, T* gx, size_t count) {
  detail::sigmoid_grad_span(gy, y, gx, count);
}

// out[s,c,i] = ca[s,c] * sp[s,i] * feat[s,c,i]  (i ranges over the plane)
template <typename T>
void attention_gate_forward(const T* ca, const T* sp, const T* feat, T* out, int n, int c,
                            int hw) {
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      detail::attn_forward_plane(ca[static_cast<size_t>(s) * c + ch],
                                 sp + static_cast<size_t>(s) * hw,
                                 feat + (static_cast<size_t>(s) * c + ch) * hw,
                                 out + (static_cast<size_t>(s) * c + ch) * hw, hw);
}

template <typename T>
void attention_gate_backward_ca(const T* g, const T* sp, const T* feat, T* gca, int n, int c,
                                int hw) {
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      gca[static_cast<size_t>(s) * c + ch] +=
          detail::attn_ca_grad(g + (static_cast<size_t>(s) * c + ch) * hw,
                               sp + static_cast<size_t>(s) * hw,
                               feat + (static_cast<size_t>(s) * c + ch) * hw, hw);
}

template <typename T>
void attention_gate_backward_sp(const T* g, const T* ca, const T* feat, T* gsp, int n, int c,
                                int hw) {
  for (int s = 0; s < n; ++s) {
    T* po = gsp + static_cast<size_t>(s) * hw;
    for (int ch = 0; ch < c; ++ch)
      detail::attn_sp_accum(g + (static_cast<size_t>(s) * c + ch) * hw,
                            feat + (static_cast<size_t>(s) * c + ch) * hw,
                            ca[static_cast<size_t>(s) * c + ch], po, hw);
  }
}

template <typename T>
void attention_gate_backward_feat(const T* g, const T* ca, const T* sp, T* gfeat, int n, int c,
                                  int hw) {
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      detail::attn_feat_accum(g + (static_cast<size_t>(s) * c + ch) * hw,
                              sp + static_cast<size_t>(s) * hw,
                              ca[static_cast<size_t>(s) * c + ch],
                              gfeat + (static_cast<size_t>(s) * c + ch) * hw, hw);
}

}  // namespace serial

// ------------------------------------------------------------------
// OpenMP kernels: same arithmetic, with the independent outer dimension
// distributed across threads. Every reduction stays inside one thread in
// the reference order, so results match the serial kernels bit for bit.
// ------------------------------------------------------------------
namespace par {

template <typename T>
void conv3x3_forward(const T* in, const T* w, const T* bias, T* out, int n, int c, int h,
                     int w_dim, int f) {
  const std::vector<T> padded = detail::pad1(in, n * c, h, w_dim);
  const size_t in_block = static_cast<size_t>(c) * (h + 2) * (w_dim + 2);
  const size_t out_plane = static_cast<size_t>(h) * w_dim;
#pragma omp parallel for schedule(static)
  for (int sk = 0; sk < n * f; ++sk) {
    const int s = sk / f, k = sk % f;
    detail::conv3x3_plane(padded.data() + s * in_block, c, h, w_dim,
                          w + static_cast<size_t>(k) * c * 9, bias[k],
                          out + (static_cast<size_t>(s) * f + k) * out_plane);
  }
}

template <typename T>
void conv3x3_backward_input(const T* gout, const T* w, T* gin, int n, int c, int h, int w_dim,
                            int f) {
  const std::vector<T> gpad = detail::pad1(gout, n * f, h, w_dim);
  const size_t g_block = static_cast<size_t>(f) * (h + 2) * (w_dim + 2);
  const size_t in_plane = static_cast<size_t>(h) * w_dim;
#pragma omp parallel for schedule(static)
  for (int sc = 0; sc < n * c; ++sc) {
    const int s = sc / c, ch = sc % c;
    detail::conv3x3_input_grad_plane(gpad.data() + s * g_block, f, h, w_dim, w, c, ch,
                                     gin + (static_cast<size_t>(s) * c + ch) * in_plane);
  }
}

template <typename T>
void conv3x3_backward_filter(const T* gout, const T* in, T* gw, T* gbias, int n, int c, int h,
                             int w_dim, int f) {
  const std::vector<T> padded = detail::pad1(in, n * c, h, w_dim);
#pragma omp parallel for schedule(static)
  for (int kc = 0; kc < f * c; ++kc) {
    const int k = kc / c, ch = kc % c;
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx)
        gw[((static_cast<size_t>(k) * c + ch) * 3 + ky) * 3 + kx] +=
            detail::conv3x3_tap_grad(gout, padded.data(), n, h, w_dim, f, c, k, ch, ky, kx);
  }
  const size_t out_plane = static_cast<size_t>(h) * w_dim;
#pragma omp parallel for schedule(static)
  for (int k = 0; k < f; ++k) {
    T acc = T(0);
    for (int s = 0; s < n; ++s) {
      const T* g = gout + (static_cast<size_t>(s) * f + k) * out_plane;
      for (size_t i = 0; i < out_plane; ++i) acc += g[i];
    }
    gbias[k] += acc;
  }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* b, T* y, int n, int d, int o) {
#pragma omp parallel for schedule(static)
  for (int sj = 0; sj < n * o; ++sj) {
    const int s = sj / o, j = sj % o;
    y[static_cast<size_t>(s) * o + j] =
        detail::linear_out(x + static_cast<size_t>(s) * d, w + static_cast<size_t>(j) * d, b[j],
                           d);
  }
}

template <typename T>
void linear_backward_input(const T* gy, const T* w, T* gx, int n, int d, int o) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    T* px = gx + static_cast<size_t>(s) * d;
    for (int j = 0; j < o; ++j)
      detail::axpy(px, w + static_cast<size_t>(j) * d, gy[static_cast<size_t>(s) * o + j], d);
  }
}

template <typename T>
void linear_backward_params(const T* gy, const T* x, T* gw, T* gb, int n, int d, int o) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < o; ++j)
    gb[j] += detail::linear_param_row(gy, x, gw + static_cast<size_t>(j) * d, j, n, d, o);
}

template <typename T>
void maxpool2_forward(const T* in, T* out, int32_t* argmax, int planes, int h, int w) {
  const size_t in_plane = static_cast<size_t>(h) * w;
  const size_t out_plane = static_cast<size_t>(h / 2) * (w / 2);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p)
    detail::maxpool2_plane(in + p * in_plane, h, w, out + p * out_plane, argmax + p * out_plane,
                           p * in_plane);
}

template <typename T>
void maxpool2_backward(const T* gout, const int32_t* argmax, T* gin, size_t out_count) {
  // Pool windows are disjoint, so argmax targets never collide.
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < static_cast<int64_t>(out_count); ++i) gin[argmax[i]] += gout[i];
}

template <typename T>
void bn_forward_train(const T* x, const T* gamma, const T* beta, T eps, T* y, T* xhat, T* mean,
                      T* var, T* invstd, int n, int c, int hw) {
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch)
    detail::bn_channel_train(x, n, c, ch, hw, gamma[ch], beta[ch], eps, y, xhat, &mean[ch],
                             &var[ch], &invstd[ch]);
}

template <typename T>
void bn_forward_eval(const T* x, const T* gamma, const T* beta, const T* rmean, const T* rvar,
                     T eps, T* y, int n, int c, int hw) {
#pragma omp parallel for schedule(static)
  for (int sc = 0; sc < n * c; ++sc) {
    const int s = sc / c, ch = sc % c;
    const T invstd = T(1) / std::sqrt(rvar[ch] + eps);
    detail::bn_eval_plane(x + (static_cast<size_t>(s) * c + ch) * hw,
                          y + (static_cast<size_t>(s) * c + ch) * hw, hw, gamma[ch], rmean[ch],
                          invstd, beta[ch]);
  }
}

template <typename T>
void bn_backward(const T* gy, const T* xhat, const T* invstd, const T* gamma, T* gx, T* ggamma,
                 T* gbeta, int n, int c, int hw) {
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch)
    detail::bn_channel_backward(gy, xhat, invstd[ch], gamma[ch], n, c, ch, hw, gx, &ggamma[ch],
                                &gbeta[ch]);
}

inline constexpr size_t kSpanChunk = 16384;

template <typename T>
void relu_forward(const T* x, T* y, size_t count) {
  const int64_t chunks = static_cast<int64_t>((count + kSpanChunk - 1) / kSpanChunk);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < chunks; ++t) {
    const size_t lo = static_cast<size_t>(t) * kSpanChunk;
    detail::relu_span(x + lo, y + lo, std::min(kSpanChunk, count - lo));
  }
}

template <typename T>
void relu_backward(const T* gy, const T* x, T* gx, size_t count) {
  const int64_t chunks = static_cast<int64_t>((count + kSpanChunk - 1) / kSpanChunk);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < chunks; ++t) {
    const size_t lo = static_cast<size_t>(t) * kSpanChunk;
    detail::relu_grad_span(gy + lo, x + lo, gx + lo, std::min(kSpanChunk, count - lo));
  }
}

template <typename T>
void sigmoid_forward(const T* x, T* y, size_t count) {
  const int64_t chunks = static_cast<int64_t>((count + kSpanChunk - 1) / kSpanChunk);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < chunks; ++t) {
    const size_t lo = static_cast<size_t>(t) * kSpanChunk;
    detail::sigmoid_span(x + lo, y + lo, std::min(kSpanChunk, count - lo));
  }
}

template <typename T>
void sigmoid_backward(const T* gy, const T* y, T* gx, size_t count) {
  const int64_t chunks = static_cast<int64_t>((count + kSpanChunk - 1) / kSpanChunk);
#pragma omp parallel for schedule(static)
  for (int64_t t = 0; t < chunks; ++t) {
    const size_t lo = static_cast<size_t>(t) * kSpanChunk;
    detail::sigmoid_grad_span(gy + lo, y + lo, gx + lo, std::min(kSpanChunk, count - lo));
  }
}

template <typename T>
void attention_gate_forward(const T* ca, const T* sp, const T* feat, T* out, int n, int c,
                            int hw) {
#pragma omp parallel for schedule(static)
  for (int sc = 0; sc < n * c; ++sc) {
    const int s = sc / c, ch = sc % c;
    detail::attn_forward_plane(ca[static_cast<size_t>(s) * c + ch],
                               sp + static_cast<size_t>(s) * hw,
                               feat + (static_cast<size_t>(s) * c + ch) * hw,
                               out + (static_cast<size_t>(s) * c + ch) * hw, hw);
  }
}

template <typename T>
void attention_gate_backward_ca(const T* g, const T* sp, const T* feat, T* gca, int n, int c,
                                int hw) {
#pragma omp parallel for schedule(static)
  for (int sc = 0; sc < n * c; ++sc) {
    const int s = sc / c, ch = sc % c;
    gca[static_cast<size_t>(s) * c + ch] +=
        detail::attn_ca_grad(g + (static_cast<size_t>(s) * c + ch) * hw,
                             sp + static_cast<size_t>(s) * hw,
                             feat + (static_cast<size_t>(s) * c + ch) * hw, hw);
  }
}

template <typename T>
void attention_gate_backward_sp(const T* g, const T* ca, const T* feat, T* gsp, int n, int c,
                                int hw) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    T* po = gsp + static_cast<size_t>(s) * hw;
    for (int ch = 0; ch < c; ++ch)
      detail::attn_sp_accum(g + (static_cast<size_t>(s) * c + ch) * hw,
                            feat + (static_cast<size_t>(s) * c + ch) * hw,
                            ca[static_cast<size_t>(s) * c + ch], po, hw);
  }
}

template <typename T>
void attention_gate_backward_feat(const T* g, const T* ca, const T* sp, T* gfeat, int n, int c,
                                  int hw) {
#pragma omp parallel for schedule(static)
  for (int sc = 0; sc < n * c; ++sc) {
    const int s = sc / c, ch = sc % c;
    detail::attn_feat_accum(g + (static_cast<size_t>(s) * c + ch) * hw,
                            sp + static_cast<size_t>(s) * hw,
                            ca[static_cast<size_t>(s) * c + ch],
                            gfeat + (static_cast<size_t>(s) * c + ch) * hw, hw);
  }
}

}  // namespace par

// Dispatch: route to the OpenMP kernels unless the serial reference was
// requested (or OpenMP is unavailable, in which case par == serial anyway).
#define TSR_DISPATCH(fn, ...) \
  do {                        \
    if (exec().parallel)      \
      par::fn(__VA_ARGS__);   \
    else                      \
      serial::fn(__VA_ARGS__); \
  } while (0)

template <typename T>
void conv3x3_forward(const T* in, const T* w, const T* bias, T* out, int n, int c, int h,
                     int w_dim, int f) {
  TSR_DISPATCH(conv3x3_forward, in, w, bias, out, n, c, h, w_dim, f);
}
template <typename T>
void conv3x3_backward_input(const T* gout, const T* w, T* gin, int n, int c, int h, int w_dim,
                            int f) {
  TSR_DISPATCH(conv3x3_backward_input, gout, w, gin, n, c, h, w_dim, f);
}
template <typename T>
void conv3x3_backward_filter(const T* gout, const T* in, T* gw, T* gbias, int n, int c, int h,
                             int w_dim, int f) {
  TSR_DISPATCH(conv3x3_backward_filter, gout, in, gw, gbias, n, c, h, w_dim, f);
}
template <typename T>
void linear_forward(const T* x, const T* w, const T* b, T* y, int n, int d, int o) {
  TSR_DISPATCH(linear_forward, x, w, b, y, n, d, o);
}
template <typename T>
void linear_backward_input(const T* gy, const T* w, T* gx, int n, int d, int o) {
  TSR_DISPATCH(linear_backward_input, gy, w, gx, n, d, o);
}
template <typename T>
void linear_backward_params(const T* gy, const T* x, T* gw, T* gb, int n, int d, int o) {
  TSR_DISPATCH(linear_backward_params, gy, x, gw, gb, n, d, o);
}
template <typename T>
void maxpool2_forward(const T* in, T* out, int32_t* argmax, int planes, int h, int w) {
  TSR_DISPATCH(maxpool2_forward, in, out, argmax, planes, h, w);
}
template <typename T>
void maxpool2_backward(const T* gout, const int32_t* argmax, T* gin, size_t out_count) {
  TSR_DISPATCH(maxpool2_backward, gout, argmax, gin, out_count);
}
template <typename T>
void bn_forward_train(const T* x, const T* gamma, const T* beta, T eps, T* y, T* xhat, T* mean,
                      T* var, T* invstd, int n, int c, int hw) {
  TSR_DISPATCH(bn_forward_train, x, gamma, beta, eps, y, xhat, mean, var, invstd, n, c, hw);
}
template <typename T>
void bn_forward_eval(const T* x, const T* gamma, const T* beta, const T* rmean, const T* rvar,
                     T eps, T* y, int n, int c, int hw) {
  TSR_DISPATCH(bn_forward_eval, x, gamma, beta, rmean, rvar, eps, y, n, c, hw);
}
template <typename T>
void bn_backward(const T* gy, const T* xhat, const T* invstd, const T* gamma, T* gx, T* ggamma,
                 T* gbeta, int n, int c, int hw) {
  TSR_DISPATCH(bn_backward, gy, xhat, invstd, gamma, gx, ggamma, gbeta, n, c, hw);
}
template <typename T>
void relu_forward(const T* x, T* y, size_t count) {
  TSR_DISPATCH(relu_forward, x, y, count);
}
template <typename T>
void relu_backward(const T* gy, const T* x, T* gx, size_t count) {
  TSR_DISPATCH(relu_backward, gy, x, gx, count);
}
template <typename T>
void sigmoid_forward(const T* x, T* y, size_t count) {
  TSR_DISPATCH(sigmoid_forward, x, y, count);
}
template <typename T>
void sigmoid_backward(const T* gy, const T* y, T* gx, size_t count) {
  TSR_DISPATCH(sigmoid_backward, gy, y, gx, count);
}
template <typename T>
void attention_gate_forward(const T* ca, const T* sp, const T* feat, T* out, int n, int c,
                            int hw) {
  TSR_DISPATCH(attention_gate_forward, ca, sp, feat, out, n, c, hw);
}
template <typename T>
void attention_gate_backward_ca(const T* g, const T* sp, const T* feat, T* gca, int n, int c,
                                int hw) {
  TSR_DISPATCH(attention_gate_backward_ca, g, sp, feat, gca, n, c, hw);
}
template <typename T>
void attention_gate_backward_sp(const T* g, const T* ca, const T* feat, T* gsp, int n, int c,
                                int hw) {
  TSR_DISPATCH(attention_gate_backward_sp, g, ca, feat, gsp, n, c, hw);
}
template <typename T>
void attention_gate_backward_feat(const T* g, const T* ca, const T* sp, T* gfeat, int n, int c,
                                  int hw) {
  TSR_DISPATCH(attention_gate_backward_feat, g, ca, sp, gfeat, n, c, hw);
}

#undef TSR_DISPATCH

}  // namespace tsr::kernels
