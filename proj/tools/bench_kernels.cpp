// Benchmarks the OpenMP kernel paths against the serial references on
// shapes representative of the SR generator and the classifier stages.

#include <chrono>
#include <cstdio>
#include <functional>

#include "echosr/kernels.hpp"
#include "echosr/rng.hpp"
#include "echosr/tensor.hpp"

using namespace echosr;
namespace K = echosr::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_conv(const char* label, const K::Conv2dShape& s, int reps) {
  Rng rng(1);
  Tensor x(s.n, s.c_in, s.h_in, s.w_in);
  Tensor w(s.c_out, s.c_in, s.ksize, s.ksize);
  Tensor b = Tensor::vec(s.c_out);
  for (double& v : x.v) v = rng.uniform();
  for (double& v : w.v) v = rng.uniform(-0.2, 0.2);
  Tensor y(s.n, s.c_out, s.h_out(), s.w_out());
  Tensor gx(s.n, s.c_in, s.h_in, s.w_in);
  Tensor gw(s.c_out, s.c_in, s.ksize, s.ksize);
  Tensor gb = Tensor::vec(s.c_out);

  const double fwd_ser =
      time_ms([&] { K::conv2d_forward_ref(x.data(), w.data(), b.data(), y.data(), s); }, reps);
  const double fwd_par =
      time_ms([&] { K::conv2d_forward_omp(x.data(), w.data(), b.data(), y.data(), s); }, reps);
  const double bwd_ser = time_ms(
      [&] {
        K::conv2d_grad_input_ref(y.data(), w.data(), gx.data(), s);
        gw.zero();
        gb.zero();
        K::conv2d_grad_params_ref(x.data(), y.data(), gw.data(), gb.data(), s);
      },
      reps);
  const double bwd_par = time_ms(
      [&] {
        K::conv2d_grad_input_omp(y.data(), w.data(), gx.data(), s);
        gw.zero();
        gb.zero();
        K::conv2d_grad_params_omp(x.data(), y.data(), gw.data(), gb.data(), s);
      },
      reps);

  std::printf("%-28s fwd %8.3f ms -> %8.3f ms (x%.2f)   bwd %8.3f ms -> %8.3f ms (x%.2f)\n",
              label, fwd_ser, fwd_par, fwd_ser / fwd_par, bwd_ser, bwd_par, bwd_ser / bwd_par);
}

void bench_resample(const char* label, int in_size, int out_size, int reps) {
  Rng rng(2);
  Image src(in_size, in_size);
  for (double& v : src.px) v = rng.uniform();
  const double ser =
      time_ms([&] { (void)K::resample_bicubic_ref(src, out_size, out_size); }, reps);
  const double par =
      time_ms([&] { (void)K::resample_bicubic_omp(src, out_size, out_size); }, reps);
  std::printf("%-28s      %8.3f ms -> %8.3f ms (x%.2f)\n", label, ser, par, ser / par);
}

}  // namespace

int main() {
  std::printf("serial reference vs OpenMP kernels (lower is better)\n\n");
  bench_conv("conv 32ch 3x3 @64x64", {1, 32, 64, 64, 32, 3, 1, 1}, 5);
  bench_conv("conv 9x9 head @64x64", {1, 1, 64, 64, 32, 9, 1, 4}, 5);
  bench_conv("conv 16ch 3x3 s2 @96x96", {4, 16, 96, 96, 32, 3, 2, 1}, 5);
  bench_conv("conv batch8 8ch @32x32", {8, 8, 32, 32, 8, 3, 1, 1}, 10);
  std::printf("\n");
  bench_resample("bicubic 512 -> 128", 512, 128, 10);
  bench_resample("bicubic 128 -> 512", 128, 512, 10);
  bench_resample("bicubic 584 -> 96", 584, 96, 10);
  return 0;
}
