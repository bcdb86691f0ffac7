#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace echosr {

/// Dense NCHW tensor of doubles. Weight tensors reuse the same layout as
/// (c_out, c_in, kh, kw); vectors as (1, 1, 1, len).
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {
    if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0)
      throw std::invalid_argument("Tensor: non-positive dims");
  }

  static Tensor vec(int len) { return Tensor(1, 1, 1, len); }

  std::size_t size() const { return v.size(); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  double& at(int i, int j, int k, int l) {
    return v[((static_cast<std::size_t>(i) * c + j) * h + k) * w + l];
  }
  double at(int i, int j, int k, int l) const {
    return v[((static_cast<std::size_t>(i) * c + j) * h + k) * w + l];
  }

  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("Tensor add: shape mismatch");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += b.v[i];
  return out;
}

}  // namespace echosr
