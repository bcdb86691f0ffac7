#include "echosr/sr_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "echosr/adam.hpp"
#include "echosr/metrics.hpp"
#include "echosr/rng.hpp"
#include "echosr/version.hpp"

namespace echosr {

// ---------------------------------------------------------------------------
// SRConfig
// ---------------------------------------------------------------------------

void SRConfig::validate() const {
  if (scale != 2 && scale != 4) throw std::invalid_argument("SRConfig: scale must be 2 or 4");
  if (steps < 1) throw std::invalid_argument("SRConfig: steps must be >= 1");
  if (batch < 1) throw std::invalid_argument("SRConfig: batch must be >= 1");
  if (n_res_blocks < 1 || base_channels < 1)
    throw std::invalid_argument("SRConfig: architecture sizes must be positive");
  if (perceptual_weight < 0.0 || adversarial_weight < 0.0)
    throw std::invalid_argument("SRConfig: loss weights must be nonnegative");
  if (lr_rate <= 0.0) throw std::invalid_argument("SRConfig: lr_rate must be positive");
  if (patch_size < 4) throw std::invalid_argument("SRConfig: patch_size must be >= 4");
  if (eval_every < 1) throw std::invalid_argument("SRConfig: eval_every must be >= 1");
}

nlohmann::json SRConfig::to_json() const {
  return {{"n_res_blocks", n_res_blocks},
          {"base_channels", base_channels},
          {"scale", scale},
          {"lr_rate", lr_rate},
          {"steps", steps},
          {"batch", batch},
          {"seed", seed},
          {"perceptual_weight", perceptual_weight},
          {"adversarial_weight", adversarial_weight},
          {"patch_size", patch_size},
          {"disc_channels", disc_channels},
          {"eval_every", eval_every},
          {"extractor_path", extractor_path}};
}

SRConfig SRConfig::from_json(const nlohmann::json& j) {
  SRConfig c;
  c.n_res_blocks = j.value("n_res_blocks", c.n_res_blocks);
  c.base_channels = j.value("base_channels", c.base_channels);
  c.scale = j.value("scale", c.scale);
  c.lr_rate = j.value("lr_rate", c.lr_rate);
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.seed = j.value("seed", c.seed);
  c.perceptual_weight = j.value("perceptual_weight", c.perceptual_weight);
  c.adversarial_weight = j.value("adversarial_weight", c.adversarial_weight);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.disc_channels = j.value("disc_channels", c.disc_channels);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.extractor_path = j.value("extractor_path", c.extractor_path);
  return c;
}

SRConfig desk_sr_config() {
  SRConfig c;
  c.n_res_blocks = 4;
  c.base_channels = 32;
  c.steps = 400;
  c.batch = 2;
  c.patch_size = 16;
  c.disc_channels = 16;
  c.eval_every = 100;
  return c;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

namespace {

int up_stage_count(int scale) { return scale == 4 ? 2 : 1; }

}  // namespace

Generator::Generator(const SRConfig& cfg, std::uint64_t init_seed)
    : channels_(cfg.base_channels), scale_(cfg.scale), head_(1, cfg.base_channels, 9, 1, 4),
      head_act_(cfg.base_channels), post_(cfg.base_channels, cfg.base_channels, 3, 1, 1),
      tail_(cfg.base_channels, 1, 9, 1, 4) {
  cfg.validate();
  blocks_.reserve(cfg.n_res_blocks);
  for (int i = 0; i < cfg.n_res_blocks; ++i) blocks_.emplace_back(cfg.base_channels);
  for (int i = 0; i < up_stage_count(cfg.scale); ++i) ups_.emplace_back(cfg.base_channels);

  Rng rng(init_seed);
  head_.init_he(rng);
  for (auto& b : blocks_) {
    b.c1.init_he(rng);
    b.c2.init_he(rng);
  }
  post_.init_he(rng);
  for (auto& u : ups_) u.conv.init_he(rng);
  tail_.init_he(rng);
}

Generator::Generator(const ModelParams& params)
    : Generator(
          [&params] {
            if (params.arch != "srresnet" && params.arch != "srgan")
              throw std::invalid_argument("Generator: params arch '" + params.arch +
                                          "' is not a generator");
            return SRConfig::from_json(params.config);
          }(),
          0) {
  std::vector<ParamRef> refs = this->params();
  std::ostringstream missing;
  for (auto& r : refs) {
    const Tensor* src = params.find(r.name);
    if (!src || !src->same_shape(*r.value)) {
      missing << " " << r.name;
      continue;
    }
    *r.value = *src;
  }
  if (!missing.str().empty())
    throw std::invalid_argument("Generator: missing or mismatched tensors:" + missing.str());
  if (!params.all_finite())
    throw std::invalid_argument("Generator: parameters contain non-finite values");
}

Tensor Generator::forward(const Tensor& lr, bool train) {
  if (!lr.all_finite()) throw std::invalid_argument("Generator: non-finite input");
  Tensor h0 = head_act_.forward(head_.forward(lr, train), train);
  Tensor h = h0;
  for (auto& b : blocks_) {
    Tensor t = b.c2.forward(b.act.forward(b.c1.forward(h, train), train), train);
    h = h + t;
  }
  Tensor f = post_.forward(h, train) + h0;
  for (auto& u : ups_) f = u.act.forward(u.shuffle.forward(u.conv.forward(f, train), train), train);
  return tail_.forward(f, train);
}

Tensor Generator::backward(const Tensor& gy) {
  Tensor g = tail_.backward(gy);
  for (auto it = ups_.rbegin(); it != ups_.rend(); ++it)
    g = it->conv.backward(it->shuffle.backward(it->act.backward(g)));
  // f = post(h) + h0
  Tensor g_skip = g;
  Tensor gh = post_.backward(g);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    Tensor g_branch = it->c1.backward(it->act.backward(it->c2.backward(gh)));
    gh = gh + g_branch;
  }
  Tensor gh0 = gh + g_skip;
  return head_.backward(head_act_.backward(gh0));
}

std::vector<ParamRef> Generator::params() {
  std::vector<ParamRef> out;
  head_.collect("head", out);
  head_act_.collect("head_act", out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    blocks_[i].c1.collect(p + ".c1", out);
    blocks_[i].act.collect(p + ".act", out);
    blocks_[i].c2.collect(p + ".c2", out);
  }
  post_.collect("post", out);
  for (std::size_t i = 0; i < ups_.size(); ++i) {
    const std::string p = "up" + std::to_string(i);
    ups_[i].conv.collect(p + ".conv", out);
    ups_[i].act.collect(p + ".act", out);
  }
  tail_.collect("tail", out);
  return out;
}

ModelParams Generator::to_params(const std::string& arch) const {
  ModelParams p;
  p.arch = arch;
  SRConfig cfg;
  cfg.n_res_blocks = static_cast<int>(blocks_.size());
  cfg.base_channels = channels_;
  cfg.scale = scale_;
  p.config = cfg.to_json();
  p.config["library_version"] = kVersion;
  auto& self = const_cast<Generator&>(*this);
  for (auto& r : self.params()) p.tensors.push_back({r.name, *r.value});
  return p;
}

Image Generator::infer(const Image& lr) {
  Tensor x(1, 1, lr.height, lr.width);
  std::copy(lr.px.begin(), lr.px.end(), x.v.begin());
  Tensor y = forward(x, false);
  Image out(y.h, y.w);
  std::copy(y.v.begin(), y.v.end(), out.px.begin());
  clamp01(out);
  return out;
}

// ---------------------------------------------------------------------------
// Discriminator
// ---------------------------------------------------------------------------

Discriminator::Discriminator(int base_channels, std::uint64_t init_seed)
    : c1_(1, base_channels, 3, 1, 1), c2_(base_channels, base_channels, 3, 2, 1),
      c3_(base_channels, 2 * base_channels, 3, 2, 1),
      c4_(2 * base_channels, 2 * base_channels, 3, 2, 1), fc_(2 * base_channels, 1) {
  Rng rng(init_seed);
  c1_.init_he(rng);
  c2_.init_he(rng);
  c3_.init_he(rng);
  c4_.init_he(rng);
  fc_.init_he(rng);
}

Tensor Discriminator::forward(const Tensor& x, bool train) {
  Tensor h = a1_.forward(c1_.forward(x, train), train);
  h = a2_.forward(c2_.forward(h, train), train);
  h = a3_.forward(c3_.forward(h, train), train);
  h = a4_.forward(c4_.forward(h, train), train);
  h = pool_.forward(h, train);
  return fc_.forward(h, train);
}

Tensor Discriminator::backward(const Tensor& gy) {
  Tensor g = pool_.backward(fc_.backward(gy));
  g = c4_.backward(a4_.backward(g));
  g = c3_.backward(a3_.backward(g));
  g = c2_.backward(a2_.backward(g));
  return c1_.backward(a1_.backward(g));
}

std::vector<ParamRef> Discriminator::params() {
  std::vector<ParamRef> out;
  c1_.collect("d.c1", out);
  c2_.collect("d.c2", out);
  c3_.collect("d.c3", out);
  c4_.collect("d.c4", out);
  fc_.collect("d.fc", out);
  return out;
}

// ---------------------------------------------------------------------------
// FeatureExtractor
// ---------------------------------------------------------------------------

FeatureExtractor::FeatureExtractor(std::uint64_t seed)
    : c1_(1, 8, 3, 1, 1), c2_(8, 16, 3, 2, 1), c3_(16, 16, 3, 2, 1) {
  Rng rng(seed);
  c1_.init_he(rng);
  c2_.init_he(rng);
  c3_.init_he(rng);
}

FeatureExtractor::FeatureExtractor(const ModelParams& params)
    : FeatureExtractor(kDefaultExtractorSeed) {
  if (params.arch != "feature_extractor")
    throw std::invalid_argument("FeatureExtractor: params arch '" + params.arch + "' mismatch");
  std::vector<std::pair<std::string, Conv2d*>> convs = {
      {"f.c1", &c1_}, {"f.c2", &c2_}, {"f.c3", &c3_}};
  std::ostringstream missing;
  for (auto& [name, conv] : convs) {
    const Tensor* w = params.find(name + ".w");
    const Tensor* b = params.find(name + ".b");
    if (!w || !b || !w->same_shape(conv->w) || !b->same_shape(conv->b)) {
      missing << " " << name;
      continue;
    }
    conv->w = *w;
    conv->b = *b;
  }
  if (!missing.str().empty())
    throw std::invalid_argument("FeatureExtractor: missing or mismatched tensors:" +
                                missing.str());
}

Tensor FeatureExtractor::forward(const Tensor& x, bool train) {
  Tensor h = r1_.forward(c1_.forward(x, train), train);
  h = r2_.forward(c2_.forward(h, train), train);
  return c3_.forward(h, train);
}

Tensor FeatureExtractor::backward_input(const Tensor& gy) {
  // Parameter gradients are intentionally discarded: the extractor is a
  // fixed feature map, only the input gradient flows to the generator.
  Tensor g = c3_.backward(gy);
  g = c2_.backward(r2_.backward(g));
  g = c1_.backward(r1_.backward(g));
  c1_.gw.zero();
  c1_.gb.zero();
  c2_.gw.zero();
  c2_.gb.zero();
  c3_.gw.zero();
  c3_.gb.zero();
  return g;
}

ModelParams FeatureExtractor::to_params() const {
  ModelParams p;
  p.arch = "feature_extractor";
  p.config = {{"library_version", kVersion}};
  p.tensors = {{"f.c1.w", c1_.w}, {"f.c1.b", c1_.b}, {"f.c2.w", c2_.w},
               {"f.c2.b", c2_.b}, {"f.c3.w", c3_.w}, {"f.c3.b", c3_.b}};
  return p;
}

ModelParams make_perceptual_extractor(std::uint64_t seed) {
  return FeatureExtractor(seed).to_params();
}

double perceptual_distance(const Image& a, const Image& b, const ModelParams& extractor) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("perceptual_distance: dimension mismatch");
  FeatureExtractor ext(extractor);
  auto to_tensor = [](const Image& img) {
    Tensor t(1, 1, img.height, img.width);
    std::copy(img.px.begin(), img.px.end(), t.v.begin());
    return t;
  };
  const Tensor fa = ext.forward(to_tensor(a), false);
  const Tensor fb = ext.forward(to_tensor(b), false);
  double mse = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const double d = fa.v[i] - fb.v[i];
    mse += d * d;
  }
  return mse / static_cast<double>(fa.size());
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct Batch {
  Tensor lr;
  Tensor hr;
};

// Samples a batch of aligned LR/HR crops. The LR patch edge is capped at
// the image size, so small desk images degenerate to full-image batches.
Batch sample_batch(const std::vector<SRPair>& pairs, const SRConfig& cfg, Rng& rng) {
  int p = cfg.patch_size;
  for (const auto& pr : pairs) p = std::min({p, pr.lr->height, pr.lr->width});
  const int r = cfg.scale;
  Batch b{Tensor(cfg.batch, 1, p, p), Tensor(cfg.batch, 1, p * r, p * r)};
  for (int i = 0; i < cfg.batch; ++i) {
    const auto& pair = pairs[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(pairs.size()) - 1))];
    const int y0 = rng.uniform_int(0, pair.lr->height - p);
    const int x0 = rng.uniform_int(0, pair.lr->width - p);
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x)
        b.lr.at(i, 0, y, x) = pair.lr->at(y0 + y, x0 + x);
    for (int y = 0; y < p * r; ++y)
      for (int x = 0; x < p * r; ++x)
        b.hr.at(i, 0, y, x) = pair.hr->at(y0 * r + y, x0 * r + x);
  }
  return b;
}

// Mean of per-pair full-image MSE on the raw (unclamped) generator output.
double full_set_pixel_mse(Generator& gen, const std::vector<SRPair>& pairs) {
  double total = 0.0;
  for (const auto& pr : pairs) {
    Tensor x(1, 1, pr.lr->height, pr.lr->width);
    std::copy(pr.lr->px.begin(), pr.lr->px.end(), x.v.begin());
    const Tensor y = gen.forward(x, false);
    double mse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y.v[i] - pr.hr->px[i];
      mse += d * d;
    }
    total += mse / static_cast<double>(y.size());
  }
  return total / static_cast<double>(pairs.size());
}

double val_psnr_on(Generator& gen, const std::vector<SRPair>& pairs) {
  const std::size_t n = std::min<std::size_t>(pairs.size(), 4);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Image out = gen.infer(*pairs[i].lr);
    const double v = psnr(out, *pairs[i].hr);
    total += std::isinf(v) ? 100.0 : v;
  }
  return total / static_cast<double>(n);
}

void check_pairs(const std::vector<SRPair>& pairs, const SRConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw std::invalid_argument("training requires a nonempty pair list");
  for (const auto& p : pairs)
    if (p.scale != cfg.scale)
      throw std::invalid_argument("pair scale does not match config scale");
}

double mse_and_grad(const Tensor& out, const Tensor& target, Tensor& gy) {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(out.size());
  gy = Tensor(out.n, out.c, out.h, out.w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.v[i] - target.v[i];
    loss += d * d;
    gy.v[i] = 2.0 * d * inv;
  }
  return loss * inv;
}

}  // namespace

std::pair<ModelParams, TrainHistory> train_srresnet(const std::vector<SRPair>& pairs,
                                                    const SRConfig& cfg) {
  check_pairs(pairs, cfg);
  Generator gen(cfg, mix_seed(cfg.seed, "generator"));
  auto refs = gen.params();
  Adam opt(cfg.lr_rate);
  Rng data_rng(mix_seed(cfg.seed, "data"));

  TrainHistory hist;
  {
    HistoryRecord rec;
    rec.loss = full_set_pixel_mse(gen, pairs);
    rec.pixel_loss = rec.loss;
    hist.records.push_back(rec);
  }

  for (long step = 1; step <= cfg.steps; ++step) {
    const Batch b = sample_batch(pairs, cfg, data_rng);
    const Tensor out = gen.forward(b.lr, true);
    Tensor gy;
    const double loss = mse_and_grad(out, b.hr, gy);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_srresnet: non-finite loss at step " +
                               std::to_string(step));
    zero_grads(refs);
    gen.backward(gy);
    opt.step(refs);

    HistoryRecord rec;
    rec.step = step;
    rec.loss = loss;
    rec.pixel_loss = loss;
    if (step % cfg.eval_every == 0 || step == cfg.steps) rec.val_psnr = val_psnr_on(gen, pairs);
    hist.records.push_back(rec);
  }
  hist.final_pixel_mse = full_set_pixel_mse(gen, pairs);
  return {gen.to_params("srresnet"), hist};
}

std::pair<ModelParams, TrainHistory> train_srgan(const std::vector<SRPair>& pairs,
                                                 const SRConfig& cfg, const ModelParams* init) {
  check_pairs(pairs, cfg);

  Generator gen = init ? Generator(*init) : Generator(cfg, mix_seed(cfg.seed, "generator"));
  if (gen.scale() != cfg.scale)
    throw std::invalid_argument("train_srgan: warm-start scale does not match config");
  Discriminator disc(cfg.disc_channels, mix_seed(cfg.seed, "discriminator"));
  FeatureExtractor ext = cfg.extractor_path.empty()
                             ? FeatureExtractor(kDefaultExtractorSeed)
                             : FeatureExtractor(load_model(cfg.extractor_path));

  auto g_refs = gen.params();
  auto d_refs = disc.params();
  Adam g_opt(cfg.lr_rate);
  Adam d_opt(cfg.lr_rate);
  Rng data_rng(mix_seed(cfg.seed, "data"));

  auto softplus = [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); };
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  TrainHistory hist;
  {
    HistoryRecord rec;
    rec.loss = full_set_pixel_mse(gen, pairs);
    rec.pixel_loss = rec.loss;
    hist.records.push_back(rec);
  }

  long pinned_steps = 0;
  for (long step = 1; step <= cfg.steps; ++step) {
    const Batch b = sample_batch(pairs, cfg, data_rng);
    const int n = b.lr.n;
    const double inv_n = 1.0 / n;

    // Generator forward once; the raw output feeds every loss term.
    const Tensor fake = gen.forward(b.lr, true);

    // --- discriminator update (real pass, then fake pass; grads accumulate)
    zero_grads(d_refs);
    double d_loss = 0.0;
    long correct = 0;
    {
      const Tensor l_real = disc.forward(b.hr, true);
      Tensor gl(n, 1, 1, 1);
      for (int i = 0; i < n; ++i) {
        const double l = l_real.v[i];
        d_loss += softplus(-l) * inv_n;
        gl.v[i] = -sigmoid(-l) * inv_n;
        if (l > 0.0) ++correct;
      }
      disc.backward(gl);
    }
    {
      const Tensor l_fake = disc.forward(fake, true);
      Tensor gl(n, 1, 1, 1);
      for (int i = 0; i < n; ++i) {
        const double l = l_fake.v[i];
        d_loss += softplus(l) * inv_n;
        gl.v[i] = sigmoid(l) * inv_n;
        if (l < 0.0) ++correct;
      }
      disc.backward(gl);
    }
    d_opt.step(d_refs);
    if (correct == 2L * n) ++pinned_steps;

    // --- generator update
    zero_grads(g_refs);
    Tensor gy;
    const double pixel_loss = mse_and_grad(fake, b.hr, gy);
    double perc_loss = 0.0;
    if (cfg.perceptual_weight > 0.0) {
      const Tensor feat_hr = ext.forward(b.hr, false);
      const Tensor feat_fake = ext.forward(fake, true);
      Tensor gfeat(feat_fake.n, feat_fake.c, feat_fake.h, feat_fake.w);
      const double inv = 1.0 / static_cast<double>(feat_fake.size());
      for (std::size_t i = 0; i < feat_fake.size(); ++i) {
        const double d = feat_fake.v[i] - feat_hr.v[i];
        perc_loss += d * d * inv;
        gfeat.v[i] = 2.0 * d * inv;
      }
      const Tensor gperc = ext.backward_input(gfeat);
      for (std::size_t i = 0; i < gy.size(); ++i)
        gy.v[i] += cfg.perceptual_weight * gperc.v[i];
    }
    double adv_loss = 0.0;
    if (cfg.adversarial_weight > 0.0) {
      const Tensor l_fake = disc.forward(fake, true);
      Tensor gl(n, 1, 1, 1);
      for (int i = 0; i < n; ++i) {
        const double l = l_fake.v[i];
        adv_loss += softplus(-l) * inv_n;
        gl.v[i] = -sigmoid(-l) * inv_n;
      }
      zero_grads(d_refs);  // discard the pass-through parameter grads
      const Tensor gadv = disc.backward(gl);
      zero_grads(d_refs);
      for (std::size_t i = 0; i < gy.size(); ++i)
        gy.v[i] += cfg.adversarial_weight * gadv.v[i];
    }
    const double g_loss = pixel_loss + cfg.perceptual_weight * perc_loss +
                          cfg.adversarial_weight * adv_loss;
    if (!std::isfinite(g_loss) || !std::isfinite(d_loss))
      throw std::runtime_error("train_srgan: non-finite loss at step " + std::to_string(step));
    gen.backward(gy);
    g_opt.step(g_refs);

    HistoryRecord rec;
    rec.step = step;
    rec.loss = g_loss;
    rec.pixel_loss = pixel_loss;
    if (cfg.perceptual_weight > 0.0) rec.perceptual_loss = perc_loss;
    if (cfg.adversarial_weight > 0.0) rec.adversarial_loss = adv_loss;
    rec.discriminator_loss = d_loss;
    if (step % cfg.eval_every == 0 || step == cfg.steps) rec.val_psnr = val_psnr_on(gen, pairs);
    hist.records.push_back(rec);
  }

  if (pinned_steps * 4 > cfg.steps) {
    std::ostringstream os;
    os << "discriminator accuracy pinned at 1.0 for " << pinned_steps << "/" << cfg.steps
       << " steps (mode-collapse signal)";
    hist.warnings.push_back(os.str());
  }
  hist.final_pixel_mse = full_set_pixel_mse(gen, pairs);
  return {gen.to_params("srgan"), hist};
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

Image srresnet_forward(const Image& lr, const ModelParams& params) {
  if (params.arch != "srresnet")
    throw std::invalid_argument("srresnet_forward: architecture tag is '" + params.arch +
                                "', expected 'srresnet'");
  if (!image_finite(lr)) throw std::invalid_argument("srresnet_forward: non-finite input");
  if (!image_in_unit_range(lr))
    throw std::invalid_argument("srresnet_forward: input outside [0, 1]");
  Generator gen(params);
  return gen.infer(lr);
}

EchoDataset enhance_subset(const EchoDataset& subset, const ModelParams& params) {
  if (params.arch != "srresnet" && params.arch != "srgan")
    throw std::invalid_argument("enhance_subset: params arch '" + params.arch +
                                "' is not a trained generator");
  EchoDataset out;
  out.provenance = subset.provenance;
  if (subset.empty()) return out;
  Generator gen(params);
  out.frames.reserve(subset.size());
  for (const auto& f : subset.frames) {
    EchoFrame e = f;
    e.image = share(gen.infer(f.img()));
    e.source_path = "sr-enhanced(" + params.arch + "):" + f.source_path;
    out.frames.push_back(std::move(e));
  }
  return out;
}

}  // namespace echosr
