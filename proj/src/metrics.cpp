#include "echosr/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace echosr {

double psnr(const Image& a, const Image& b, double data_range) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("psnr: dimension mismatch");
  if (data_range <= 0.0) throw std::invalid_argument("psnr: data_range must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.px[i] - b.px[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

// Normalized 11x11 Gaussian window.
const double* gaussian_window() {
  static double w[kWin * kWin];
  static bool init = false;
  if (!init) {
    double sum = 0.0;
    for (int y = 0; y < kWin; ++y)
      for (int x = 0; x < kWin; ++x) {
        const double dy = y - (kWin - 1) / 2.0;
        const double dx = x - (kWin - 1) / 2.0;
        w[y * kWin + x] = std::exp(-(dy * dy + dx * dx) / (2.0 * kSigma * kSigma));
        sum += w[y * kWin + x];
      }
    for (double& v : w) v /= sum;
    init = true;
  }
  return w;
}

}  // namespace

double ssim(const Image& a, const Image& b, double data_range) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("ssim: dimension mismatch");
  if (a.height < kWin || a.width < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  if (data_range <= 0.0) throw std::invalid_argument("ssim: data_range must be positive");

  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  const double* w = gaussian_window();

  double total = 0.0;
  long count = 0;
  for (int oy = 0; oy + kWin <= a.height; ++oy)
    for (int ox = 0; ox + kWin <= a.width; ++ox) {
      double mu_a = 0.0, mu_b = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int y = 0; y < kWin; ++y)
        for (int x = 0; x < kWin; ++x) {
          const double wv = w[y * kWin + x];
          const double va = a.at(oy + y, ox + x);
          const double vb = b.at(oy + y, ox + x);
          mu_a += wv * va;
          mu_b += wv * vb;
          saa += wv * va * va;
          sbb += wv * vb * vb;
          sab += wv * va * vb;
        }
      const double var_a = saa - mu_a * mu_a;
      const double var_b = sbb - mu_b * mu_b;
      const double cov = sab - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  return total / static_cast<double>(count);
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.empty() || preds.size() != labels.size())
    throw std::invalid_argument("accuracy: empty input or length mismatch");
  long hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double relative_improvement(double baseline_acc, double enhanced_acc) {
  if (!(baseline_acc > 0.0))
    throw std::invalid_argument("relative_improvement: baseline must be positive");
  return 100.0 * (enhanced_acc - baseline_acc) / baseline_acc;
}

MetricReport metric_report(const Image& a, const Image& b, double data_range,
                           const std::string& context) {
  MetricReport r;
  r.psnr_db = psnr(a, b, data_range);
  r.ssim = ssim(a, b, data_range);
  r.context = context;
  return r;
}

}  // namespace echosr
