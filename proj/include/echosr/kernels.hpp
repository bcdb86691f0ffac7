#pragma once

#include "echosr/image.hpp"

namespace echosr::kernels {

/// Execution mode for the hot kernels. `parallel` is the OpenMP path and
/// the default; `serial` selects the naive reference implementations that
/// the tests and the benchmark compare against.
enum class ExecMode { serial, parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

/// Shape descriptor for a 2D convolution over NCHW tensors.
struct Conv2dShape {
  int n = 1;
  int c_in = 1;
  int h_in = 0;
  int w_in = 0;
  int c_out = 1;
  int ksize = 3;
  int stride = 1;
  int pad = 0;

  int h_out() const { return (h_in + 2 * pad - ksize) / stride + 1; }
  int w_out() const { return (w_in + 2 * pad - ksize) / stride + 1; }
};

// Dispatching entry points (honor exec_mode()).
// x: n*c_in*h_in*w_in, w: c_out*c_in*k*k, b: c_out (may be null), y: n*c_out*h_out*w_out
void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dShape& s);
// gx accumulates nothing; it is fully overwritten.
void conv2d_grad_input(const double* gy, const double* w, double* gx, const Conv2dShape& s);
// gw and gb are accumulated into (callers zero them between steps).
void conv2d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        const Conv2dShape& s);

// Naive single-thread reference implementations, kept as oracles.
void conv2d_forward_ref(const double* x, const double* w, const double* b, double* y,
                        const Conv2dShape& s);
void conv2d_grad_input_ref(const double* gy, const double* w, double* gx, const Conv2dShape& s);
void conv2d_grad_params_ref(const double* x, const double* gy, double* gw, double* gb,
                            const Conv2dShape& s);

// OpenMP implementations (row/plane ownership, deterministic for any
// thread count).
void conv2d_forward_omp(const double* x, const double* w, const double* b, double* y,
                        const Conv2dShape& s);
void conv2d_grad_input_omp(const double* gy, const double* w, double* gx, const Conv2dShape& s);
void conv2d_grad_params_omp(const double* x, const double* gy, double* gw, double* gb,
                            const Conv2dShape& s);

/// Catmull-Rom (a = -0.5) bicubic resampling to an arbitrary output size.
/// When an axis shrinks, the kernel support is stretched by the scale
/// factor (anti-aliased). Weights are renormalized at the borders. Output
/// is NOT clamped here; callers clamp per their contracts.
Image resample_bicubic(const Image& src, int out_h, int out_w);

/// Direct (non-separable) reference evaluation of the same resampling.
Image resample_bicubic_ref(const Image& src, int out_h, int out_w);

/// Separable OpenMP implementation.
Image resample_bicubic_omp(const Image& src, int out_h, int out_w);

}  // namespace echosr::kernels
