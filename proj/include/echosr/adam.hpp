#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "echosr/layers.hpp"

namespace echosr {

/// Adam with bias correction. Moment buffers are laid out in the order the
/// parameter list is first seen; the list must be stable across steps.
struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;

  explicit Adam(double learning_rate) : lr(learning_rate) {}

  void step(const std::vector<ParamRef>& params) {
    if (m_.empty()) {
      m_.reserve(params.size());
      v_.reserve(params.size());
      for (const auto& p : params) {
        m_.emplace_back(p.value->size(), 0.0);
        v_.emplace_back(p.value->size(), 0.0);
      }
    }
    if (m_.size() != params.size())
      throw std::invalid_argument("Adam: parameter list changed size");
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      auto& val = params[pi].value->v;
      const auto& grd = params[pi].grad->v;
      auto& m = m_[pi];
      auto& v = v_[pi];
      for (std::size_t i = 0; i < val.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grd[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grd[i] * grd[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

 private:
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace echosr
