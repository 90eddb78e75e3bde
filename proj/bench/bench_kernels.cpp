// Times the serial reference kernels against the OpenMP ones on the shapes
// the pair classifier actually runs, and verifies both produce identical
// bits. Usage: bench_kernels [reps]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tsr/kernels.hpp"
#include "tsr/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::vector<float> random_vec(tsr::Rng& rng, int64_t n) {
  std::vector<float> v(static_cast<size_t>(n));
  for (float& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

struct Case {
  std::string name;
  double serial_ms = 0, parallel_ms = 0;
  bool identical = false;
};

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  tsr::Rng rng(7);
  std::vector<Case> cases;

  // Convolution blocks at every spatial stage of the 84px embedding stack.
  struct ConvShape {
    int n, c, h, w, f;
  };
  const ConvShape conv_shapes[] = {{8, 1, 84, 84, 64}, {8, 64, 42, 42, 64},
                                   {8, 64, 21, 21, 64}, {8, 64, 10, 10, 64}};
  for (const ConvShape& s : conv_shapes) {
    const auto x = random_vec(rng, static_cast<int64_t>(s.n) * s.c * s.h * s.w);
    const auto w = random_vec(rng, static_cast<int64_t>(s.f) * s.c * 9);
    const auto b = random_vec(rng, s.f);
    std::vector<float> out_s(static_cast<size_t>(s.n) * s.f * s.h * s.w);
    std::vector<float> out_p(out_s.size());
    Case c;
    c.name = "conv3x3 " + std::to_string(s.n) + "x" + std::to_string(s.c) + "x" +
             std::to_string(s.h) + "x" + std::to_string(s.w) + " -> " + std::to_string(s.f);
    c.serial_ms = time_ms(
        [&]() {
          tsr::kernels::serial::conv3x3_forward(x.data(), w.data(), b.data(), out_s.data(), s.n, s.c, s.h,
                                       s.w, s.f);
        },
        reps);
    c.parallel_ms = time_ms(
        [&]() {
          tsr::kernels::par::conv3x3_forward(x.data(), w.data(), b.data(), out_p.data(), s.n, s.c, s.h,
                                    s.w, s.f);
        },
        reps);
    c.identical = same_bits(out_s, out_p);
    cases.push_back(c);

    // Matching backward pass over the input.
    const auto gout = random_vec(rng, out_s.size());
    std::vector<float> gx_s(x.size(), 0.0f), gx_p(x.size(), 0.0f);
    Case cb;
    cb.name = c.name + " backward";
    cb.serial_ms = time_ms(
        [&]() {
          std::fill(gx_s.begin(), gx_s.end(), 0.0f);
          tsr::kernels::serial::conv3x3_backward_input(gout.data(), w.data(), gx_s.data(), s.n, s.c, s.h,
                                              s.w, s.f);
        },
        reps);
    cb.parallel_ms = time_ms(
        [&]() {
          std::fill(gx_p.begin(), gx_p.end(), 0.0f);
          tsr::kernels::par::conv3x3_backward_input(gout.data(), w.data(), gx_p.data(), s.n, s.c, s.h, s.w,
                                           s.f);
        },
        reps);
    cb.identical = same_bits(gx_s, gx_p);
    cases.push_back(cb);
  }

  {
    const int n = 32, d = 1600, o = 512;
    const auto x = random_vec(rng, static_cast<int64_t>(n) * d);
    const auto w = random_vec(rng, static_cast<int64_t>(o) * d);
    const auto b = random_vec(rng, o);
    std::vector<float> out_s(static_cast<size_t>(n) * o), out_p(out_s.size());
    Case c;
    c.name = "linear 32x1600 -> 512";
    c.serial_ms = time_ms(
        [&]() { tsr::kernels::serial::linear_forward(x.data(), w.data(), b.data(), out_s.data(), n, d, o); },
        reps);
    c.parallel_ms = time_ms(
        [&]() { tsr::kernels::par::linear_forward(x.data(), w.data(), b.data(), out_p.data(), n, d, o); },
        reps);
    c.identical = same_bits(out_s, out_p);
    cases.push_back(c);
  }

  {
    const int n = 8, ch = 64, h = 42, w = 42;
    const auto x = random_vec(rng, static_cast<int64_t>(n) * ch * h * w);
    std::vector<float> y_s(x.size()), y_p(x.size());
    std::vector<float> mean_s(ch), var_s(ch), xhat_s(x.size()), invstd_s(ch);
    std::vector<float> mean_p(ch), var_p(ch), xhat_p(x.size()), invstd_p(ch);
    std::vector<float> gamma(ch, 1.0f), beta(ch, 0.0f);
    Case c;
    c.name = "batchnorm train 8x64x42x42";
    c.serial_ms = time_ms(
        [&]() {
          tsr::kernels::serial::bn_forward_train(x.data(), gamma.data(), beta.data(), 1e-5f, y_s.data(),
                                        xhat_s.data(), mean_s.data(), var_s.data(),
                                        invstd_s.data(), n, ch, h * w);
        },
        reps);
    c.parallel_ms = time_ms(
        [&]() {
          tsr::kernels::par::bn_forward_train(x.data(), gamma.data(), beta.data(), 1e-5f, y_p.data(),
                                     xhat_p.data(), mean_p.data(), var_p.data(), invstd_p.data(),
                                     n, ch, h * w);
        },
        reps);
    c.identical = same_bits(y_s, y_p);
    cases.push_back(c);
  }

  int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
#endif
  std::printf("kernel benchmark, %d reps, %d omp thread(s)\n\n", reps, threads);
  std::printf("%-38s %12s %12s %9s %6s\n", "case", "serial ms", "parallel ms", "speedup",
              "bits");
  bool all_same = true;
  for (const Case& c : cases) {
    std::printf("%-38s %12.3f %12.3f %8.2fx %6s\n", c.name.c_str(), c.serial_ms, c.parallel_ms,
                c.serial_ms / c.parallel_ms, c.identical ? "same" : "DIFF");
    all_same = all_same && c.identical;
  }
  if (!all_same) {
    std::printf("\nserial and parallel kernels disagree\n");
    return 1;
  }
  return 0;
}
