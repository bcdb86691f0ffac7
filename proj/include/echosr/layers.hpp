#pragma once

#include <string>
#include <vector>

#include "echosr/kernels.hpp"
#include "echosr/rng.hpp"
#include "echosr/tensor.hpp"

namespace echosr {

/// Named view onto one parameter tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

inline void zero_grads(const std::vector<ParamRef>& params) {
  for (const auto& p : params) p.grad->zero();
}

/// 2D convolution layer. Forward caches the input for the backward pass.
struct Conv2d {
  int c_in, c_out, k, stride, pad;
  Tensor w, gw, b, gb;
  Tensor x_cache;

  Conv2d(int ci, int co, int ksize, int s = 1, int p = 0)
      : c_in(ci), c_out(co), k(ksize), stride(s), pad(p),
        w(co, ci, ksize, ksize), gw(co, ci, ksize, ksize),
        b(Tensor::vec(co)), gb(Tensor::vec(co)) {}

  void init_he(Rng& rng) {
    const double sd = std::sqrt(2.0 / (static_cast<double>(c_in) * k * k));
    for (double& x : w.v) x = rng.normal() * sd;
    b.zero();
  }

  kernels::Conv2dShape shape(const Tensor& x) const {
    return {x.n, c_in, x.h, x.w, c_out, k, stride, pad};
  }

  Tensor forward(const Tensor& x, bool train) {
    const auto s = shape(x);
    Tensor y(x.n, c_out, s.h_out(), s.w_out());
    kernels::conv2d_forward(x.data(), w.data(), b.data(), y.data(), s);
    if (train) x_cache = x;
    return y;
  }

  Tensor backward(const Tensor& gy) {
    const auto s = shape(x_cache);
    kernels::conv2d_grad_params(x_cache.data(), gy.data(), gw.data(), gb.data(), s);
    Tensor gx(x_cache.n, c_in, x_cache.h, x_cache.w);
    kernels::conv2d_grad_input(gy.data(), w.data(), gx.data(), s);
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

/// Channel-wise parametric ReLU.
struct PReLU {
  Tensor a, ga;
  Tensor x_cache;

  explicit PReLU(int channels, double init = 0.25)
      : a(Tensor::vec(channels)), ga(Tensor::vec(channels)) {
    std::fill(a.v.begin(), a.v.end(), init);
  }

  Tensor forward(const Tensor& x, bool train) {
    Tensor y = x;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int n = 0; n < x.n; ++n)
      for (int c = 0; c < x.c; ++c) {
        const double slope = a.v[c];
        double* p = y.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i)
          if (p[i] < 0.0) p[i] *= slope;
      }
    if (train) x_cache = x;
    return y;
  }

  Tensor backward(const Tensor& gy) {
    const Tensor& x = x_cache;
    Tensor gx = gy;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int n = 0; n < x.n; ++n)
      for (int c = 0; c < x.c; ++c) {
        const double slope = a.v[c];
        const double* xp = x.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        const double* gyp = gy.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        double* gxp = gx.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
          if (xp[i] < 0.0) {
            acc += gyp[i] * xp[i];
            gxp[i] = gyp[i] * slope;
          }
        }
        ga.v[c] += acc;
      }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".a", &a, &ga});
  }
};

struct ReLU {
  Tensor x_cache;
  Tensor forward(const Tensor& x, bool train) {
    Tensor y = x;
    for (double& v : y.v)
      if (v < 0.0) v = 0.0;
    if (train) x_cache = x;
    return y;
  }
  Tensor backward(const Tensor& gy) {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (x_cache.v[i] < 0.0) gx.v[i] = 0.0;
    return gx;
  }
};

struct LeakyReLU {
  double slope;
  Tensor x_cache;
  explicit LeakyReLU(double s = 0.2) : slope(s) {}
  Tensor forward(const Tensor& x, bool train) {
    Tensor y = x;
    for (double& v : y.v)
      if (v < 0.0) v *= slope;
    if (train) x_cache = x;
    return y;
  }
  Tensor backward(const Tensor& gy) {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (x_cache.v[i] < 0.0) gx.v[i] *= slope;
    return gx;
  }
};

/// Batch normalization over (N, H, W) per channel. Training mode uses
/// batch statistics and maintains running estimates for evaluation mode.
struct BatchNorm2d {
  int channels;
  double eps = 1e-5;
  double momentum = 0.1;
  Tensor gamma, ggamma, beta, gbeta;
  Tensor running_mean, running_var;
  // caches
  Tensor xhat_cache;
  std::vector<double> inv_std_cache;

  explicit BatchNorm2d(int c)
      : channels(c), gamma(Tensor::vec(c)), ggamma(Tensor::vec(c)),
        beta(Tensor::vec(c)), gbeta(Tensor::vec(c)),
        running_mean(Tensor::vec(c)), running_var(Tensor::vec(c)) {
    std::fill(gamma.v.begin(), gamma.v.end(), 1.0);
    std::fill(running_var.v.begin(), running_var.v.end(), 1.0);
  }

  Tensor forward(const Tensor& x, bool train) {
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const double m_count = static_cast<double>(x.n) * plane;
    Tensor y = x;
    if (train) {
      xhat_cache = Tensor(x.n, x.c, x.h, x.w);
      inv_std_cache.assign(channels, 0.0);
    }
    for (int c = 0; c < channels; ++c) {
      double mean, var;
      if (train) {
        double s = 0.0, s2 = 0.0;
        for (int n = 0; n < x.n; ++n) {
          const double* p = x.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            s += p[i];
            s2 += p[i] * p[i];
          }
        }
        mean = s / m_count;
        var = s2 / m_count - mean * mean;
        if (var < 0.0) var = 0.0;
        running_mean.v[c] = (1.0 - momentum) * running_mean.v[c] + momentum * mean;
        running_var.v[c] = (1.0 - momentum) * running_var.v[c] + momentum * var;
      } else {
        mean = running_mean.v[c];
        var = running_var.v[c];
      }
      const double inv_std = 1.0 / std::sqrt(var + eps);
      const double g = gamma.v[c], bt = beta.v[c];
      for (int n = 0; n < x.n; ++n) {
        const double* p = x.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        double* q = y.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        double* xh = train
            ? xhat_cache.data() + (static_cast<std::size_t>(n) * x.c + c) * plane
            : nullptr;
        for (std::size_t i = 0; i < plane; ++i) {
          const double xhat = (p[i] - mean) * inv_std;
          if (xh) xh[i] = xhat;
          q[i] = g * xhat + bt;
        }
      }
      if (train) inv_std_cache[c] = inv_std;
    }
    return y;
  }

  Tensor backward(const Tensor& gy) {
    const Tensor& xhat = xhat_cache;
    const std::size_t plane = static_cast<std::size_t>(gy.h) * gy.w;
    const double m_count = static_cast<double>(gy.n) * plane;
    Tensor gx(gy.n, gy.c, gy.h, gy.w);
    for (int c = 0; c < channels; ++c) {
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int n = 0; n < gy.n; ++n) {
        const double* g = gy.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        const double* xh = xhat.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_gy += g[i];
          sum_gy_xhat += g[i] * xh[i];
        }
      }
      ggamma.v[c] += sum_gy_xhat;
      gbeta.v[c] += sum_gy;
      const double g = gamma.v[c];
      const double inv_std = inv_std_cache[c];
      for (int n = 0; n < gy.n; ++n) {
        const double* gp = gy.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        const double* xh = xhat.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        double* gxp = gx.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          gxp[i] = g * inv_std / m_count *
                   (m_count * gp[i] - sum_gy - xh[i] * sum_gy_xhat);
        }
      }
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma});
    out.push_back({prefix + ".beta", &beta, &gbeta});
  }
};

/// Fully connected layer over flattened (C*H*W) features.
struct Linear {
  int in_features, out_features;
  Tensor w, gw, b, gb;
  Tensor x_cache;

  Linear(int in, int out)
      : in_features(in), out_features(out), w(1, 1, out, in), gw(1, 1, out, in),
        b(Tensor::vec(out)), gb(Tensor::vec(out)) {}

  void init_he(Rng& rng) {
    const double sd = std::sqrt(2.0 / in_features);
    for (double& x : w.v) x = rng.normal() * sd;
    b.zero();
  }

  Tensor forward(const Tensor& x, bool train) {
    if (x.c * x.h * x.w != in_features)
      throw std::invalid_argument("Linear: input feature count mismatch");
    Tensor y(x.n, out_features, 1, 1);
    for (int n = 0; n < x.n; ++n) {
      const double* xp = x.data() + static_cast<std::size_t>(n) * in_features;
      for (int o = 0; o < out_features; ++o) {
        const double* wp = w.data() + static_cast<std::size_t>(o) * in_features;
        double acc = b.v[o];
        for (int i = 0; i < in_features; ++i) acc += wp[i] * xp[i];
        y.v[static_cast<std::size_t>(n) * out_features + o] = acc;
      }
    }
    if (train) x_cache = x;
    return y;
  }

  Tensor backward(const Tensor& gy) {
    const Tensor& x = x_cache;
    Tensor gx(x.n, x.c, x.h, x.w);
    for (int n = 0; n < x.n; ++n) {
      const double* xp = x.data() + static_cast<std::size_t>(n) * in_features;
      const double* gyp = gy.data() + static_cast<std::size_t>(n) * out_features;
      double* gxp = gx.data() + static_cast<std::size_t>(n) * in_features;
      for (int o = 0; o < out_features; ++o) {
        const double g = gyp[o];
        double* gwp = gw.data() + static_cast<std::size_t>(o) * in_features;
        const double* wp = w.data() + static_cast<std::size_t>(o) * in_features;
        for (int i = 0; i < in_features; ++i) {
          gwp[i] += g * xp[i];
          gxp[i] += g * wp[i];
        }
        gb.v[o] += g;
      }
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

/// Rearranges (N, C*r^2, H, W) -> (N, C, rH, rW).
struct PixelShuffle {
  int r;
  explicit PixelShuffle(int factor) : r(factor) {}

  Tensor forward(const Tensor& x, bool) const {
    if (x.c % (r * r) != 0)
      throw std::invalid_argument("PixelShuffle: channels not divisible by r^2");
    const int co = x.c / (r * r);
    Tensor y(x.n, co, x.h * r, x.w * r);
    for (int n = 0; n < x.n; ++n)
      for (int c = 0; c < co; ++c)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            const int ci = c * r * r + dy * r + dx;
            for (int yy = 0; yy < x.h; ++yy)
              for (int xx = 0; xx < x.w; ++xx)
                y.at(n, c, yy * r + dy, xx * r + dx) = x.at(n, ci, yy, xx);
          }
    return y;
  }

  Tensor backward(const Tensor& gy) const {
    const int co = gy.c;
    const int ci_total = co * r * r;
    Tensor gx(gy.n, ci_total, gy.h / r, gy.w / r);
    for (int n = 0; n < gy.n; ++n)
      for (int c = 0; c < co; ++c)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            const int ci = c * r * r + dy * r + dx;
            for (int yy = 0; yy < gx.h; ++yy)
              for (int xx = 0; xx < gx.w; ++xx)
                gx.at(n, ci, yy, xx) = gy.at(n, c, yy * r + dy, xx * r + dx);
          }
    return gx;
  }
};

/// Mean over the spatial plane per channel: (N, C, H, W) -> (N, C, 1, 1).
struct GlobalAvgPool {
  int h_cache = 0, w_cache = 0;

  Tensor forward(const Tensor& x, bool train) {
    Tensor y(x.n, x.c, 1, 1);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int n = 0; n < x.n; ++n)
      for (int c = 0; c < x.c; ++c) {
        const double* p = x.data() + (static_cast<std::size_t>(n) * x.c + c) * plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        y.at(n, c, 0, 0) = acc / static_cast<double>(plane);
      }
    if (train) {
      h_cache = x.h;
      w_cache = x.w;
    }
    return y;
  }

  Tensor backward(const Tensor& gy) const {
    Tensor gx(gy.n, gy.c, h_cache, w_cache);
    const std::size_t plane = static_cast<std::size_t>(h_cache) * w_cache;
    const double inv = 1.0 / static_cast<double>(plane);
    for (int n = 0; n < gy.n; ++n)
      for (int c = 0; c < gy.c; ++c) {
        const double g = gy.at(n, c, 0, 0) * inv;
        double* p = gx.data() + (static_cast<std::size_t>(n) * gy.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) p[i] = g;
      }
    return gx;
  }
};

}  // namespace echosr
