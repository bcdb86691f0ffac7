#include "echosr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace echosr::kernels {

namespace {

ExecMode g_mode = ExecMode::parallel;

inline std::size_t idx4(int a, int b, int c, int d, int db, int dc, int dd) {
  return ((static_cast<std::size_t>(a) * db + b) * dc + c) * dd + d;
}

}  // namespace

ExecMode exec_mode() { return g_mode; }
void set_exec_mode(ExecMode mode) { g_mode = mode; }

// ---------------------------------------------------------------------------
// Convolution, reference path: the textbook quadruple loop. Kept as the
// oracle the parallel path is tested against.
// ---------------------------------------------------------------------------

void conv2d_forward_ref(const double* x, const double* w, const double* b, double* y,
                        const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  for (int n = 0; n < s.n; ++n)
    for (int co = 0; co < s.c_out; ++co)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double acc = b ? b[co] : 0.0;
          for (int ci = 0; ci < s.c_in; ++ci)
            for (int ky = 0; ky < s.ksize; ++ky)
              for (int kx = 0; kx < s.ksize; ++kx) {
                const int iy = oy * s.stride + ky - s.pad;
                const int ix = ox * s.stride + kx - s.pad;
                if (iy < 0 || iy >= s.h_in || ix < 0 || ix >= s.w_in) continue;
                acc += w[idx4(co, ci, ky, kx, s.c_in, s.ksize, s.ksize)] *
                       x[idx4(n, ci, iy, ix, s.c_in, s.h_in, s.w_in)];
              }
          y[idx4(n, co, oy, ox, s.c_out, ho, wo)] = acc;
        }
}

void conv2d_grad_input_ref(const double* gy, const double* w, double* gx,
                           const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  std::fill(gx, gx + static_cast<std::size_t>(s.n) * s.c_in * s.h_in * s.w_in, 0.0);
  for (int n = 0; n < s.n; ++n)
    for (int ci = 0; ci < s.c_in; ++ci)
      for (int iy = 0; iy < s.h_in; ++iy)
        for (int ix = 0; ix < s.w_in; ++ix) {
          double acc = 0.0;
          for (int co = 0; co < s.c_out; ++co)
            for (int ky = 0; ky < s.ksize; ++ky)
              for (int kx = 0; kx < s.ksize; ++kx) {
                const int ty = iy + s.pad - ky;
                const int tx = ix + s.pad - kx;
                if (ty % s.stride != 0 || tx % s.stride != 0) continue;
                const int oy = ty / s.stride;
                const int ox = tx / s.stride;
                if (oy < 0 || oy >= ho || ox < 0 || ox >= wo) continue;
                acc += w[idx4(co, ci, ky, kx, s.c_in, s.ksize, s.ksize)] *
                       gy[idx4(n, co, oy, ox, s.c_out, ho, wo)];
              }
          gx[idx4(n, ci, iy, ix, s.c_in, s.h_in, s.w_in)] = acc;
        }
}

void conv2d_grad_params_ref(const double* x, const double* gy, double* gw, double* gb,
                            const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  for (int co = 0; co < s.c_out; ++co)
    for (int ci = 0; ci < s.c_in; ++ci)
      for (int ky = 0; ky < s.ksize; ++ky)
        for (int kx = 0; kx < s.ksize; ++kx) {
          double acc = 0.0;
          for (int n = 0; n < s.n; ++n)
            for (int oy = 0; oy < ho; ++oy)
              for (int ox = 0; ox < wo; ++ox) {
                const int iy = oy * s.stride + ky - s.pad;
                const int ix = ox * s.stride + kx - s.pad;
                if (iy < 0 || iy >= s.h_in || ix < 0 || ix >= s.w_in) continue;
                acc += x[idx4(n, ci, iy, ix, s.c_in, s.h_in, s.w_in)] *
                       gy[idx4(n, co, oy, ox, s.c_out, ho, wo)];
              }
          gw[idx4(co, ci, ky, kx, s.c_in, s.ksize, s.ksize)] += acc;
        }
  if (gb) {
    for (int co = 0; co < s.c_out; ++co) {
      double acc = 0.0;
      for (int n = 0; n < s.n; ++n)
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox)
            acc += gy[idx4(n, co, oy, ox, s.c_out, ho, wo)];
      gb[co] += acc;
    }
  }
}

// ---------------------------------------------------------------------------
// Convolution, OpenMP path. Work is partitioned so every output element is
// written by exactly one thread with a fixed inner summation order, which
// makes the result independent of the thread count.
// ---------------------------------------------------------------------------

void conv2d_forward_omp(const double* x, const double* w, const double* b, double* y,
                        const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  const std::size_t in_plane = static_cast<std::size_t>(s.h_in) * s.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < s.n; ++n)
    for (int co = 0; co < s.c_out; ++co) {
      double* out = y + (static_cast<std::size_t>(n) * s.c_out + co) * out_plane;
      const double bias = b ? b[co] : 0.0;
      std::fill(out, out + out_plane, bias);
      for (int ci = 0; ci < s.c_in; ++ci) {
        const double* in = x + (static_cast<std::size_t>(n) * s.c_in + ci) * in_plane;
        const double* wk = w + idx4(co, ci, 0, 0, s.c_in, s.ksize, s.ksize);
        for (int ky = 0; ky < s.ksize; ++ky)
          for (int kx = 0; kx < s.ksize; ++kx) {
            const double wv = wk[ky * s.ksize + kx];
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * s.stride + ky - s.pad;
              if (iy < 0 || iy >= s.h_in) continue;
              // ox range with ix = ox*stride + kx - pad inside [0, w_in)
              int ox_lo = 0;
              if (kx - s.pad < 0)
                ox_lo = (s.pad - kx + s.stride - 1) / s.stride;
              int ox_hi = wo;  // exclusive
              {
                const int max_ix = s.w_in - 1 - (kx - s.pad);
                if (max_ix < 0)
                  ox_hi = 0;
                else
                  ox_hi = std::min(wo, max_ix / s.stride + 1);
              }
              double* orow = out + static_cast<std::size_t>(oy) * wo;
              const double* irow = in + static_cast<std::size_t>(iy) * s.w_in + (kx - s.pad);
              if (s.stride == 1) {
                for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[ox];
              } else {
                for (int ox = ox_lo; ox < ox_hi; ++ox)
                  orow[ox] += wv * irow[static_cast<std::size_t>(ox) * s.stride];
              }
            }
          }
      }
    }
}

void conv2d_grad_input_omp(const double* gy, const double* w, double* gx,
                           const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  const std::size_t in_plane = static_cast<std::size_t>(s.h_in) * s.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < s.n; ++n)
    for (int ci = 0; ci < s.c_in; ++ci) {
      double* gin = gx + (static_cast<std::size_t>(n) * s.c_in + ci) * in_plane;
      std::fill(gin, gin + in_plane, 0.0);
      for (int co = 0; co < s.c_out; ++co) {
        const double* gout = gy + (static_cast<std::size_t>(n) * s.c_out + co) * out_plane;
        const double* wk = w + idx4(co, ci, 0, 0, s.c_in, s.ksize, s.ksize);
        for (int ky = 0; ky < s.ksize; ++ky)
          for (int kx = 0; kx < s.ksize; ++kx) {
            const double wv = wk[ky * s.ksize + kx];
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * s.stride + ky - s.pad;
              if (iy < 0 || iy >= s.h_in) continue;
              int ox_lo = 0;
              if (kx - s.pad < 0)
                ox_lo = (s.pad - kx + s.stride - 1) / s.stride;
              int ox_hi = wo;
              {
                const int max_ix = s.w_in - 1 - (kx - s.pad);
                if (max_ix < 0)
                  ox_hi = 0;
                else
                  ox_hi = std::min(wo, max_ix / s.stride + 1);
              }
              double* grow = gin + static_cast<std::size_t>(iy) * s.w_in + (kx - s.pad);
              const double* orow = gout + static_cast<std::size_t>(oy) * wo;
              if (s.stride == 1) {
                for (int ox = ox_lo; ox < ox_hi; ++ox) grow[ox] += wv * orow[ox];
              } else {
                for (int ox = ox_lo; ox < ox_hi; ++ox)
                  grow[static_cast<std::size_t>(ox) * s.stride] += wv * orow[ox];
              }
            }
          }
      }
    }
}

void conv2d_grad_params_omp(const double* x, const double* gy, double* gw, double* gb,
                            const Conv2dShape& s) {
  const int ho = s.h_out(), wo = s.w_out();
  const std::size_t in_plane = static_cast<std::size_t>(s.h_in) * s.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;

#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.c_out; ++co) {
    for (int ci = 0; ci < s.c_in; ++ci)
      for (int ky = 0; ky < s.ksize; ++ky)
        for (int kx = 0; kx < s.ksize; ++kx) {
          double acc = 0.0;
          for (int n = 0; n < s.n; ++n) {
            const double* in = x + (static_cast<std::size_t>(n) * s.c_in + ci) * in_plane;
            const double* gout = gy + (static_cast<std::size_t>(n) * s.c_out + co) * out_plane;
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * s.stride + ky - s.pad;
              if (iy < 0 || iy >= s.h_in) continue;
              int ox_lo = 0;
              if (kx - s.pad < 0)
                ox_lo = (s.pad - kx + s.stride - 1) / s.stride;
              int ox_hi = wo;
              {
                const int max_ix = s.w_in - 1 - (kx - s.pad);
                if (max_ix < 0)
                  ox_hi = 0;
                else
                  ox_hi = std::min(wo, max_ix / s.stride + 1);
              }
              const double* irow = in + static_cast<std::size_t>(iy) * s.w_in + (kx - s.pad);
              const double* orow = gout + static_cast<std::size_t>(oy) * wo;
              if (s.stride == 1) {
                for (int ox = ox_lo; ox < ox_hi; ++ox) acc += irow[ox] * orow[ox];
              } else {
                for (int ox = ox_lo; ox < ox_hi; ++ox)
                  acc += irow[static_cast<std::size_t>(ox) * s.stride] * orow[ox];
              }
            }
          }
          gw[idx4(co, ci, ky, kx, s.c_in, s.ksize, s.ksize)] += acc;
        }
    if (gb) {
      double acc = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const double* gout = gy + (static_cast<std::size_t>(n) * s.c_out + co) * out_plane;
        for (std::size_t i = 0; i < out_plane; ++i) acc += gout[i];
      }
      gb[co] += acc;
    }
  }
}

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dShape& s) {
  if (g_mode == ExecMode::serial)
    conv2d_forward_ref(x, w, b, y, s);
  else
    conv2d_forward_omp(x, w, b, y, s);
}

void conv2d_grad_input(const double* gy, const double* w, double* gx, const Conv2dShape& s) {
  if (g_mode == ExecMode::serial)
    conv2d_grad_input_ref(gy, w, gx, s);
  else
    conv2d_grad_input_omp(gy, w, gx, s);
}

void conv2d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        const Conv2dShape& s) {
  if (g_mode == ExecMode::serial)
    conv2d_grad_params_ref(x, gy, gw, gb, s);
  else
    conv2d_grad_params_omp(x, gy, gw, gb, s);
}

// ---------------------------------------------------------------------------
// Bicubic resampling, Catmull-Rom kernel (a = -0.5).
// ---------------------------------------------------------------------------

namespace {

inline double catmull_rom(double t) {
  t = std::fabs(t);
  if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

struct TapSet {
  // For one output coordinate: first source index and contiguous weights.
  int first;
  int count;
  int offset;  // starting position in the shared weight pool
};

// Precomputes renormalized taps along one axis. `support_scale` stretches
// the kernel when minifying (anti-aliasing).
void build_taps(int in_size, int out_size, std::vector<TapSet>& taps,
                std::vector<double>& pool) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double support_scale = std::max(1.0, scale);
  const double radius = 2.0 * support_scale;
  taps.resize(out_size);
  pool.clear();
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) * scale - 0.5;
    int lo = static_cast<int>(std::ceil(center - radius));
    int hi = static_cast<int>(std::floor(center + radius));
    lo = std::max(lo, 0);
    hi = std::min(hi, in_size - 1);
    TapSet t{lo, hi - lo + 1, static_cast<int>(pool.size())};
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double wv = catmull_rom((i - center) / support_scale);
      pool.push_back(wv);
      sum += wv;
    }
    if (sum != 0.0)
      for (int i = 0; i < t.count; ++i) pool[t.offset + i] /= sum;
    taps[o] = t;
  }
}

}  // namespace

Image resample_bicubic_ref(const Image& src, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("resample_bicubic: non-positive output dims");
  // Direct 2D evaluation; independent of the separable path.
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  const double ssy = std::max(1.0, sy);
  const double ssx = std::max(1.0, sx);
  Image out(out_h, out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    const double cy = (oy + 0.5) * sy - 0.5;
    const int y_lo = std::max(0, static_cast<int>(std::ceil(cy - 2.0 * ssy)));
    const int y_hi = std::min(src.height - 1, static_cast<int>(std::floor(cy + 2.0 * ssy)));
    for (int ox = 0; ox < out_w; ++ox) {
      const double cx = (ox + 0.5) * sx - 0.5;
      const int x_lo = std::max(0, static_cast<int>(std::ceil(cx - 2.0 * ssx)));
      const int x_hi = std::min(src.width - 1, static_cast<int>(std::floor(cx + 2.0 * ssx)));
      double acc = 0.0, wsum = 0.0;
      for (int iy = y_lo; iy <= y_hi; ++iy) {
        const double wy = catmull_rom((iy - cy) / ssy);
        for (int ix = x_lo; ix <= x_hi; ++ix) {
          const double wv = wy * catmull_rom((ix - cx) / ssx);
          acc += wv * src.at(iy, ix);
          wsum += wv;
        }
      }
      out.at(oy, ox) = wsum != 0.0 ? acc / wsum : 0.0;
    }
  }
  return out;
}

Image resample_bicubic_omp(const Image& src, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("resample_bicubic: non-positive output dims");
  std::vector<TapSet> xtaps, ytaps;
  std::vector<double> xpool, ypool;
  build_taps(src.width, out_w, xtaps, xpool);
  build_taps(src.height, out_h, ytaps, ypool);

  // Horizontal pass then vertical pass.
  Image tmp(src.height, out_w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height; ++y) {
    const double* row = src.px.data() + static_cast<std::size_t>(y) * src.width;
    double* trow = tmp.px.data() + static_cast<std::size_t>(y) * out_w;
    for (int ox = 0; ox < out_w; ++ox) {
      const TapSet& t = xtaps[ox];
      double acc = 0.0;
      for (int i = 0; i < t.count; ++i) acc += xpool[t.offset + i] * row[t.first + i];
      trow[ox] = acc;
    }
  }

  Image out(out_h, out_w);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_h; ++oy) {
    const TapSet& t = ytaps[oy];
    double* orow = out.px.data() + static_cast<std::size_t>(oy) * out_w;
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < t.count; ++i)
        acc += ypool[t.offset + i] * tmp.at(t.first + i, x);
      orow[x] = acc;
    }
  }
  return out;
}

Image resample_bicubic(const Image& src, int out_h, int out_w) {
  return g_mode == ExecMode::serial ? resample_bicubic_ref(src, out_h, out_w)
                                    : resample_bicubic_omp(src, out_h, out_w);
}

}  // namespace echosr::kernels
