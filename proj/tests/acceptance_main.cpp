// Acceptance suite: runs every gate criterion end to end and prints one
// [PASS]/[FAIL]/[SKIP]/[WARN] line per criterion. CAMUS-conditional
// criteria run only when ECHOSR_CAMUS_ROOT points at the dataset.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "echosr/classifier.hpp"
#include "echosr/dataset.hpp"
#include "echosr/degradation.hpp"
#include "echosr/experiments.hpp"
#include "echosr/metrics.hpp"
#include "echosr/sr_models.hpp"
#include "test_util.hpp"

using namespace echosr;
using namespace echosr::testutil;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip, warn };

struct CriterionResult {
  Outcome outcome;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<CriterionResult()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = {Outcome::fail, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* tag = r.outcome == Outcome::pass   ? "PASS"
                    : r.outcome == Outcome::fail ? "FAIL"
                    : r.outcome == Outcome::skip ? "SKIP"
                                                 : "WARN";
  std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", tag, number, title.c_str(), secs,
              r.detail.empty() ? "" : " — ", r.detail.c_str());
  std::fflush(stdout);
  if (r.outcome == Outcome::fail) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

// --------------------------------------------------------------------------
// 1. Metric oracles
// --------------------------------------------------------------------------

CriterionResult criterion1() {
  // Brute-force pixel-loop MSE oracle on the 8-bit scale.
  Image a(24, 24, 100.0), b(24, 24, 110.0);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.px[i] - b.px[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  const double oracle = 10.0 * std::log10(255.0 * 255.0 / mse);
  const double got = psnr(a, b, 255.0);
  if (std::fabs(got - 28.13) > 0.01)
    return {Outcome::fail, fmt("psnr constant-offset %.4f != 28.13 +/- 0.01", got)};
  if (std::fabs(got - oracle) > 1e-9)
    return {Outcome::fail, "psnr disagrees with the pixel-loop oracle"};

  Rng rng(10);
  const Image r = random_image(rng, 16, 16);
  const double id = ssim(r, r);
  if (std::fabs(id - 1.0) > 1e-9) return {Outcome::fail, fmt("ssim identity %.12f", id)};

  const Image c1(16, 16, 0.25), c2(16, 16, 0.75);
  const double closed = (2.0 * 0.25 * 0.75 + 1e-4) / (0.25 * 0.25 + 0.75 * 0.75 + 1e-4);
  const double got_ssim = ssim(c1, c2);
  if (std::fabs(got_ssim - 0.6000) > 1e-3)
    return {Outcome::fail, fmt("ssim constant pair %.5f != 0.6000 +/- 1e-3", got_ssim)};
  if (std::fabs(got_ssim - closed) > 1e-9)
    return {Outcome::fail, "ssim disagrees with the closed form"};

  return {Outcome::pass,
          fmt("psnr=%.4f dB, ssim_id=%.10f, ssim_const=%.5f", got, id, got_ssim)};
}

// --------------------------------------------------------------------------
// 2. Degradation contract
// --------------------------------------------------------------------------

CriterionResult criterion2() {
  Rng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = trial % 2 == 0 ? 2 : 4;
    const int h = rng.uniform_int(r, 140);
    const int w = rng.uniform_int(r, 140);
    const Image img = random_image(rng, h, w);
    const Image lr = bicubic_downsample(img, r);
    if (lr.height != h / r || lr.width != w / r)
      return {Outcome::fail, fmt("shape violated at %dx%d r=%d", h, w, r)};
    const Image up = bicubic_upsample(lr, r);
    if (up.height != r * lr.height || up.width != r * lr.width)
      return {Outcome::fail, "upsample shape violated"};
  }
  const Image c(64, 64, 0.5);
  const Image down = bicubic_downsample(c, 4);
  for (double v : down.px)
    if (std::fabs(v - 0.5) > 1e-6) return {Outcome::fail, "constant fixed point violated (down)"};
  const Image up = bicubic_upsample(Image(16, 16, 0.3), 4);
  for (double v : up.px)
    if (std::fabs(v - 0.3) > 1e-6) return {Outcome::fail, "constant fixed point violated (up)"};
  return {Outcome::pass, "100 random shapes, r in {2,4}, constant fixed points within 1e-6"};
}

// --------------------------------------------------------------------------
// 3. SR overfit property
// --------------------------------------------------------------------------

CriterionResult criterion3() {
  const EchoDataset ds = synthesize_dataset(2, 64, 301);  // 8 frames
  const auto pairs = make_sr_pairs(ds, 4);

  SRConfig cfg;
  cfg.n_res_blocks = 4;
  cfg.base_channels = 32;
  cfg.scale = 4;
  cfg.steps = 2000;
  cfg.batch = 1;
  cfg.patch_size = 16;
  cfg.lr_rate = 1e-3;
  cfg.eval_every = 500;
  cfg.seed = 303;

  auto [params, hist] = train_srresnet(pairs, cfg);
  Generator gen(params);

  double model_psnr = 0.0, bicubic_psnr = 0.0;
  for (const auto& p : pairs) {
    model_psnr += psnr(gen.infer(*p.lr), *p.hr);
    bicubic_psnr += psnr(bicubic_upsample(*p.lr, 4), *p.hr);
  }
  model_psnr /= static_cast<double>(pairs.size());
  bicubic_psnr /= static_cast<double>(pairs.size());

  if (model_psnr < bicubic_psnr + 1.0)
    return {Outcome::fail, fmt("model %.2f dB vs bicubic %.2f dB (needs +1 dB)", model_psnr,
                               bicubic_psnr)};
  return {Outcome::pass,
          fmt("model %.2f dB vs bicubic %.2f dB (+%.2f dB over baseline)", model_psnr,
              bicubic_psnr, model_psnr - bicubic_psnr)};
}

// --------------------------------------------------------------------------
// 4. SRGAN stability property
// --------------------------------------------------------------------------

CriterionResult criterion4() {
  const EchoDataset ds = synthesize_dataset(2, 64, 301);
  const auto pairs = make_sr_pairs(ds, 4);

  SRConfig cfg;
  cfg.n_res_blocks = 4;
  cfg.base_channels = 32;
  cfg.scale = 4;
  cfg.steps = 400;
  cfg.batch = 1;
  cfg.patch_size = 16;
  cfg.lr_rate = 1e-3;
  cfg.disc_channels = 16;
  cfg.eval_every = 200;
  cfg.seed = 404;

  auto [gan_params, gan_hist] = train_srgan(pairs, cfg);
  for (const auto& rec : gan_hist.records) {
    if (!std::isfinite(rec.loss) ||
        (rec.discriminator_loss && !std::isfinite(*rec.discriminator_loss)))
      return {Outcome::fail, fmt("non-finite loss at step %ld", rec.step)};
  }
  Generator gen(gan_params);
  const Image out = gen.infer(*pairs[0].lr);
  if (out.height != 4 * pairs[0].lr->height || out.width != 4 * pairs[0].lr->width)
    return {Outcome::fail, "enhancement output shape incorrect"};

  SRConfig zero_cfg = cfg;
  zero_cfg.perceptual_weight = 0.0;
  zero_cfg.adversarial_weight = 0.0;
  auto [z_params, z_hist] = train_srgan(pairs, zero_cfg);
  auto [r_params, r_hist] = train_srresnet(pairs, cfg);
  const double rel = std::fabs(z_hist.final_pixel_mse - r_hist.final_pixel_mse) /
                     r_hist.final_pixel_mse;
  if (rel > 0.10)
    return {Outcome::fail, fmt("zero-weight pixel loss off by %.1f%% (limit 10%%)", rel * 100)};
  return {Outcome::pass, fmt("finite traces; zero-weight run within %.2g of srresnet", rel)};
}

// --------------------------------------------------------------------------
// 5. Gradient checks
// --------------------------------------------------------------------------

CriterionResult criterion5() {
  // Miniature generator: 1 residual block, 4 channels, 8x8 input.
  SRConfig gcfg;
  gcfg.n_res_blocks = 1;
  gcfg.base_channels = 4;
  gcfg.scale = 4;
  Generator gen(gcfg, 51);
  Rng rng(52);
  Tensor x = random_tensor(rng, 1, 1, 8, 8, 0.0, 1.0);
  Tensor target = random_tensor(rng, 1, 1, 32, 32, 0.0, 1.0);
  auto gen_mse = [&](const Tensor& y) {
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y.v[i] - target.v[i];
      l += d * d;
    }
    return l / static_cast<double>(y.size());
  };
  auto g_refs = gen.params();
  auto g_bwd = [&]() {
    const Tensor y = gen.forward(x, true);
    Tensor gy(y.n, y.c, y.h, y.w);
    const double inv = 1.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) gy.v[i] = 2.0 * (y.v[i] - target.v[i]) * inv;
    gen.backward(gy);
    return gen_mse(y);
  };
  auto g_only = [&]() { return gen_mse(gen.forward(x, false)); };
  const GradCheck g = check_gradients(g_refs, g_bwd, g_only, 1e-5, 1e-3);

  // Miniature classifier: 2 blocks, <= 5000 parameters.
  ResNetSpec spec;
  spec.stage_blocks = {2};
  spec.stage_widths = {4};
  ResNetClassifier net(spec, 53);
  std::size_t n_params = 0;
  for (auto& r : net.params()) n_params += r.value->size();
  if (n_params > 5000) return {Outcome::fail, fmt("miniature classifier has %zu params", n_params)};
  Tensor cx = random_tensor(rng, 2, 1, 12, 12, 0.0, 1.0);
  const std::vector<int> labels = {0, 1};
  auto ce = [&](const Tensor& logits) {
    double loss = 0.0;
    for (int i = 0; i < logits.n; ++i) {
      const double l0 = logits.v[2 * i], l1 = logits.v[2 * i + 1];
      const double mx = std::max(l0, l1);
      loss += mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx)) -
              (labels[i] == 0 ? l0 : l1);
    }
    return loss / logits.n;
  };
  auto c_refs = net.params();
  auto c_bwd = [&]() {
    const Tensor logits = net.forward(cx, true);
    Tensor gy(logits.n, 2, 1, 1);
    for (int i = 0; i < logits.n; ++i) {
      const double l0 = logits.v[2 * i], l1 = logits.v[2 * i + 1];
      const double mx = std::max(l0, l1);
      const double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
      gy.v[2 * i] = (e0 / (e0 + e1) - (labels[i] == 0 ? 1.0 : 0.0)) / logits.n;
      gy.v[2 * i + 1] = (e1 / (e0 + e1) - (labels[i] == 1 ? 1.0 : 0.0)) / logits.n;
    }
    net.backward(gy);
    return ce(logits);
  };
  auto c_only = [&]() { return ce(net.forward(cx, true)); };
  const GradCheck c = check_gradients(c_refs, c_bwd, c_only, 1e-5, 1e-3);

  if (g.pass_fraction() < 0.99)
    return {Outcome::fail, fmt("generator grad check %.4f < 0.99 (worst rel %.2g)",
                               g.pass_fraction(), g.worst_rel)};
  if (c.pass_fraction() < 0.99)
    return {Outcome::fail, fmt("classifier grad check %.4f < 0.99 (worst rel %.2g)",
                               c.pass_fraction(), c.worst_rel)};
  return {Outcome::pass, fmt("generator %zu params %.2f%%, classifier %zu params %.2f%%",
                             g.checked, 100 * g.pass_fraction(), c.checked,
                             100 * c.pass_fraction())};
}

// --------------------------------------------------------------------------
// 6. Classifier sanity on the separable task
// --------------------------------------------------------------------------

EchoDataset separable_dataset(int n_per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EchoFrame> frames;
  for (int i = 0; i < n_per_class; ++i)
    for (int cls = 0; cls < 2; ++cls) {
      Image img(48, 48);
      const double base = cls == 0 ? 0.30 : 0.70;
      for (double& v : img.px) v = std::clamp(base + 0.08 * rng.normal(), 0.0, 1.0);
      EchoFrame f;
      f.patient_id = "case" + std::to_string(i) + (cls == 0 ? "d" : "b");
      f.view = cls == 0 ? View::ch2 : View::ch4;
      f.phase = i % 2 == 0 ? Phase::ed : Phase::es;
      f.quality = Quality::poor;
      f.image = share(std::move(img));
      frames.push_back(std::move(f));
    }
  return make_dataset(std::move(frames), Provenance::synthetic);
}

CriterionResult criterion6() {
  const EchoDataset ds = separable_dataset(24, 601);
  const auto split = build_classification_split(ds, Task::view, Quality::poor, 606);

  // Intensity-threshold oracle must separate the task perfectly.
  {
    std::vector<std::pair<double, int>> samples;
    for (const auto& f : split.train) samples.push_back({image_mean(f.img()), f.label(Task::view)});
    std::sort(samples.begin(), samples.end());
    double best = 0.0;
    for (std::size_t cut = 0; cut <= samples.size(); ++cut) {
      long correct = 0;
      for (std::size_t i = 0; i < samples.size(); ++i)
        if ((i < cut ? 0 : 1) == samples[i].second) ++correct;
      best = std::max(best, static_cast<double>(correct) / samples.size());
    }
    if (best != 1.0) return {Outcome::fail, fmt("threshold oracle only reaches %.3f", best)};
  }

  std::string detail;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ClassifierConfig cfg;
    cfg.input_size = 32;
    cfg.width_multiplier = 0.125;
    cfg.batch = 16;
    cfg.epochs = 10;
    cfg.lr_rate = 1e-3;
    cfg.seed = seed;
    auto [params, hist] = train_classifier(split, cfg);
    const double train_acc = evaluate_classifier(params, split.train, Task::view).accuracy;
    const double test_acc = evaluate_classifier(params, split.test, Task::view).accuracy;
    detail += fmt("seed %llu: train %.3f test %.3f; ", seed, train_acc, test_acc);
    if (train_acc < 0.95)
      return {Outcome::fail, detail + fmt("train accuracy %.3f < 0.95 at seed %llu", train_acc,
                                          seed)};
    if (test_acc < 0.90)
      return {Outcome::fail,
              detail + fmt("test accuracy %.3f < 0.90 at seed %llu", test_acc, seed)};
  }
  return {Outcome::pass, detail + "10 epochs each"};
}

// --------------------------------------------------------------------------
// 7 + 8. Pipeline determinism and experiment shape
// --------------------------------------------------------------------------

struct PipelineArtifacts {
  std::string results_a;
  std::string results_b;
  RunResults results;
};

PipelineArtifacts run_pipeline_twice() {
  PipelineArtifacts art;
  for (int run = 0; run < 2; ++run) {
    const EchoDataset ds = synthesize_dataset(12, 64, 701);
    const auto good_pairs = make_sr_pairs(stratify_by_quality(ds).at(Quality::good), 4);

    SRConfig sr_cfg;
    sr_cfg.n_res_blocks = 1;
    sr_cfg.base_channels = 8;
    sr_cfg.scale = 4;
    sr_cfg.steps = 20;
    sr_cfg.batch = 2;
    sr_cfg.patch_size = 12;
    sr_cfg.disc_channels = 8;
    sr_cfg.lr_rate = 1e-3;
    sr_cfg.eval_every = 10;
    sr_cfg.seed = 702;
    SrModelList sr_models;
    sr_models.emplace_back(SrArch::srresnet, train_srresnet(good_pairs, sr_cfg).first);
    SRConfig gan_cfg = sr_cfg;
    gan_cfg.seed = 703;
    sr_models.emplace_back(SrArch::srgan, train_srgan(good_pairs, gan_cfg).first);

    ClassifierConfig cfg;
    cfg.input_size = 32;
    cfg.width_multiplier = 0.125;
    cfg.batch = 8;
    cfg.epochs = 2;
    cfg.lr_rate = 1e-3;

    RunResults results;
    results.matrices.push_back(run_cross_quality(ds, Task::view, cfg, {71}));
    auto train_recs = run_sr_train_experiment(ds, Task::view, sr_models, cfg, {71});
    auto test_recs = run_sr_test_experiment(ds, Task::view, sr_models, cfg, {71});
    results.records.insert(results.records.end(), train_recs.begin(), train_recs.end());
    results.records.insert(results.records.end(), test_recs.begin(), test_recs.end());
    results.dataset_info = {{"provenance", to_string(ds.provenance)},
                            {"n_frames", ds.size()},
                            {"checksum", dataset_checksum(ds)}};
    results.classifier_config = cfg.to_json();
    results.seeds = {71};

    const std::string dumped = results_to_json(results).dump(2);
    if (run == 0) {
      art.results_a = dumped;
      art.results = results;
    } else {
      art.results_b = dumped;
    }
  }
  return art;
}

PipelineArtifacts& pipeline() {
  static PipelineArtifacts art = run_pipeline_twice();
  return art;
}

CriterionResult criterion7() {
  auto& art = pipeline();
  if (art.results_a != art.results_b)
    return {Outcome::fail, "results files differ between identical runs"};
  return {Outcome::pass, fmt("two end-to-end runs agree byte-for-byte (%zu bytes, no "
                             "timestamp fields in the schema)",
                             art.results_a.size())};
}

CriterionResult criterion8() {
  auto& art = pipeline();
  const RunResults& results = art.results;
  if (results.matrices.size() != 1) return {Outcome::fail, "expected one matrix"};
  for (int tr = 0; tr < 3; ++tr)
    for (int te = 0; te < 3; ++te) {
      const double v = results.matrices[0].cells[tr][te];
      if (!(v >= 0.0 && v <= 1.0))
        return {Outcome::fail, fmt("cell (%d,%d) = %f outside [0,1]", tr, te, v)};
    }

  // One record per (mode, sr model, counterpart tier).
  long train_count[2][3] = {};
  long test_count[2][3] = {};
  for (const auto& r : results.records) {
    const int a = static_cast<int>(r.sr_model);
    const int q = static_cast<int>(r.counterpart_quality);
    if (r.mode == SrMode::train_on_sr)
      ++train_count[a][q];
    else
      ++test_count[a][q];
    const double abs_expected = (r.enhanced_acc - r.baseline_acc) * 100.0;
    if (r.abs_delta_pp != abs_expected)
      return {Outcome::fail, "abs delta does not recompute exactly"};
    if (r.rel_delta_pct != relative_improvement(r.baseline_acc, r.enhanced_acc))
      return {Outcome::fail, "rel delta does not recompute exactly"};
    if (r.mode == SrMode::test_on_sr && r.baseline_checksum != r.enhanced_checksum)
      return {Outcome::fail, "frozen-model checksum mismatch in test-on-sr record"};
  }
  for (int a = 0; a < 2; ++a) {
    for (int q = 0; q < 3; ++q)
      if (train_count[a][q] != 1)
        return {Outcome::fail, fmt("train-on-sr records per (model %d, tier %d) = %ld", a, q,
                                   train_count[a][q])};
    if (test_count[a][0] != 1 || test_count[a][1] != 1 || test_count[a][2] != 0)
      return {Outcome::fail, "test-on-sr records not one per (good, medium) train tier"};
  }
  return {Outcome::pass, fmt("3x3 matrix populated; %zu records keyed as documented",
                             results.records.size())};
}

// --------------------------------------------------------------------------
// 9 + 10. CAMUS-conditional checks
// --------------------------------------------------------------------------

const char* camus_root() { return std::getenv("ECHOSR_CAMUS_ROOT"); }

CriterionResult criterion9() {
  const char* root = camus_root();
  if (!root) return {Outcome::skip, "set ECHOSR_CAMUS_ROOT to enable"};
  const EchoDataset ds = load_camus(root);
  const DistributionTable t = distribution_table(ds);

  const long expected[2][2][3] = {{{217, 214, 69}, {217, 214, 69}},
                                  {{288, 165, 47}, {288, 165, 47}}};
  for (int v = 0; v < 2; ++v)
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 3; ++q)
        if (t.counts[v][p][q] != expected[v][p][q])
          return {Outcome::fail,
                  fmt("cell (%s,%s,%s) = %ld, expected %ld", v == 0 ? "2CH" : "4CH",
                      p == 0 ? "ED" : "ES", q == 0 ? "Good" : (q == 1 ? "Medium" : "Poor"),
                      t.counts[v][p][q], expected[v][p][q])};
  if (t.tier_total(Quality::good) != 1010 || t.tier_total(Quality::medium) != 758 ||
      t.tier_total(Quality::poor) != 232)
    return {Outcome::fail, "tier totals do not match 1010/758/232"};

  const auto view_pool = capped_class_pool(ds, Task::view, Quality::poor, 1);
  long ch2 = 0, ch4 = 0;
  for (const auto& f : view_pool) (f.view == View::ch2 ? ch2 : ch4)++;
  if (ch2 != 138 || ch4 != 94)
    return {Outcome::fail, fmt("view pool %ld/%ld != 138/94", ch2, ch4)};
  const auto phase_pool = capped_class_pool(ds, Task::phase, Quality::poor, 1);
  long ed = 0, es = 0;
  for (const auto& f : phase_pool) (f.phase == Phase::ed ? ed : es)++;
  if (ed != 116 || es != 116)
    return {Outcome::fail, fmt("phase pool %ld/%ld != 116/116", ed, es)};
  return {Outcome::pass, "distribution and balanced pools match the published counts"};
}

CriterionResult criterion10() {
  const char* root = camus_root();
  if (!root) return {Outcome::skip, "set ECHOSR_CAMUS_ROOT to enable"};
  const EchoDataset ds = load_camus(root);

  ClassifierConfig cfg = desk_classifier_config();  // batch 16, 10 epochs, Adam 1e-4
  const std::vector<std::uint64_t> seeds = {1, 2, 3};

  double good_good = 0.0, good_poor = 0.0;
  for (std::uint64_t seed : seeds) {
    const auto split = build_classification_split(ds, Task::view, Quality::good, seed);
    ClassifierConfig run_cfg = cfg;
    run_cfg.seed = seed;
    auto [params, hist] = train_classifier(split, run_cfg);
    good_good += evaluate_classifier(params, split.test, Task::view).accuracy;
    const auto poor_pool = capped_class_pool(ds, Task::view, Quality::poor, seed);
    good_poor += evaluate_classifier(params, poor_pool, Task::view).accuracy;
  }
  good_good /= seeds.size();
  good_poor /= seeds.size();
  if (good_good <= good_poor)
    return {Outcome::warn,
            fmt("train-good/test-good %.3f <= train-good/test-poor %.3f (degradation "
                "ordering not observed; soft check)",
                good_good, good_poor)};
  return {Outcome::pass, fmt("test-good %.3f > test-poor %.3f over 3 seeds", good_good,
                             good_poor)};
}

}  // namespace

int main() {
  std::printf("acceptance suite (library version matters only through behavior)\n\n");
  run_criterion(1, "metric oracles", criterion1);
  run_criterion(2, "degradation contract", criterion2);
  run_criterion(3, "SRResNet overfit beats bicubic by 1 dB", criterion3);
  run_criterion(4, "SRGAN stability and zero-weight equivalence", criterion4);
  run_criterion(5, "finite-difference gradient checks", criterion5);
  run_criterion(6, "classifier sanity on the separable task", criterion6);
  run_criterion(7, "pipeline determinism", criterion7);
  run_criterion(8, "experiment shape contract", criterion8);
  run_criterion(9, "CAMUS ingestion matches the published table", criterion9);
  run_criterion(10, "CAMUS cross-quality degradation ordering (soft)", criterion10);

  std::printf("\n%s\n", g_failures == 0 ? "acceptance: ALL GREEN" : "acceptance: FAILURES");
  return g_failures == 0 ? 0 : 1;
}
