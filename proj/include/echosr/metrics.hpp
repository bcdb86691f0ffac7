#pragma once

#include <string>
#include <vector>

#include "echosr/image.hpp"

namespace echosr {

/// Peak signal-to-noise ratio in dB: 10*log10(data_range^2 / MSE).
/// Identical images (MSE = 0) return +infinity.
double psnr(const Image& a, const Image& b, double data_range = 1.0);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, windows fully inside the image. Requires dims >= 11.
double ssim(const Image& a, const Image& b, double data_range = 1.0);

/// Fraction of exact matches. Lengths must be equal and nonzero.
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

/// 100 * (enhanced - baseline) / baseline; baseline must be positive.
double relative_improvement(double baseline_acc, double enhanced_acc);

struct MetricReport {
  double psnr_db = 0.0;  // +inf when images match exactly
  double ssim = 0.0;
  std::string context;
};

MetricReport metric_report(const Image& a, const Image& b, double data_range = 1.0,
                           const std::string& context = "");

}  // namespace echosr
