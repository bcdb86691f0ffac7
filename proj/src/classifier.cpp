#include "echosr/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "echosr/adam.hpp"
#include "echosr/degradation.hpp"
#include "echosr/rng.hpp"
#include "echosr/version.hpp"

namespace echosr {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void ClassifierConfig::validate() const {
  if (input_size < 8) throw std::invalid_argument("ClassifierConfig: input_size too small");
  if (batch < 1) throw std::invalid_argument("ClassifierConfig: batch must be >= 1");
  if (epochs < 1) throw std::invalid_argument("ClassifierConfig: epochs must be >= 1");
  if (lr_rate <= 0.0) throw std::invalid_argument("ClassifierConfig: lr_rate must be positive");
  if (width_multiplier <= 0.0)
    throw std::invalid_argument("ClassifierConfig: width_multiplier must be positive");
}

nlohmann::json ClassifierConfig::to_json() const {
  return {{"input_size", input_size}, {"batch", batch},
          {"epochs", epochs},         {"lr_rate", lr_rate},
          {"seed", seed},             {"width_multiplier", width_multiplier},
          {"pretrained_init", pretrained_init}};
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.input_size = j.value("input_size", c.input_size);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.lr_rate = j.value("lr_rate", c.lr_rate);
  c.seed = j.value("seed", c.seed);
  c.width_multiplier = j.value("width_multiplier", c.width_multiplier);
  c.pretrained_init = j.value("pretrained_init", c.pretrained_init);
  return c;
}

ClassifierConfig desk_classifier_config() {
  ClassifierConfig c;
  c.input_size = 96;
  c.width_multiplier = 0.25;
  return c;
}

ResNetSpec ResNetSpec::from_config(const ClassifierConfig& cfg) {
  ResNetSpec spec;
  for (int& w : spec.stage_widths)
    w = std::max(4, static_cast<int>(std::lround(w * cfg.width_multiplier)));
  return spec;
}

// ---------------------------------------------------------------------------
// ResNetClassifier
// ---------------------------------------------------------------------------

ResNetClassifier::BasicBlock::BasicBlock(int c_in, int c_out, int stride)
    : conv1(c_in, c_out, 3, stride, 1), bn1(c_out), conv2(c_out, c_out, 3, 1, 1), bn2(c_out),
      has_projection(stride != 1 || c_in != c_out), proj(c_in, c_out, 1, stride, 0),
      proj_bn(c_out) {}

Tensor ResNetClassifier::BasicBlock::forward(const Tensor& x, bool train) {
  Tensor s = has_projection ? proj_bn.forward(proj.forward(x, train), train) : x;
  Tensor h = relu1.forward(bn1.forward(conv1.forward(x, train), train), train);
  h = bn2.forward(conv2.forward(h, train), train);
  h = h + s;
  return relu_out.forward(h, train);
}

Tensor ResNetClassifier::BasicBlock::backward(const Tensor& gy) {
  Tensor g = relu_out.backward(gy);
  Tensor g_branch = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(g)))));
  if (has_projection) {
    Tensor g_skip = proj.backward(proj_bn.backward(g));
    return g_branch + g_skip;
  }
  return g_branch + g;
}

ResNetClassifier::ResNetClassifier(const ResNetSpec& spec, std::uint64_t init_seed)
    : spec_(spec), stem_(spec.in_channels, spec.stage_widths.at(0), 3, 1, 1),
      stem_bn_(spec.stage_widths.at(0)), fc_(spec.stage_widths.back(), spec.num_classes) {
  if (spec.stage_blocks.size() != spec.stage_widths.size() || spec.stage_blocks.empty())
    throw std::invalid_argument("ResNetSpec: stage lists must be nonempty and equal length");

  int c_prev = spec.stage_widths[0];
  for (std::size_t s = 0; s < spec.stage_blocks.size(); ++s) {
    const int width = spec.stage_widths[s];
    for (int b = 0; b < spec.stage_blocks[s]; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      blocks_.emplace_back(c_prev, width, stride);
      c_prev = width;
    }
  }

  Rng rng(init_seed);
  stem_.init_he(rng);
  for (auto& blk : blocks_) {
    blk.conv1.init_he(rng);
    blk.conv2.init_he(rng);
    if (blk.has_projection) blk.proj.init_he(rng);
  }
  fc_.init_he(rng);
}

Tensor ResNetClassifier::forward(const Tensor& x, bool train) {
  Tensor h = stem_relu_.forward(stem_bn_.forward(stem_.forward(x, train), train), train);
  for (auto& blk : blocks_) h = blk.forward(h, train);
  h = pool_.forward(h, train);
  return fc_.forward(h, train);
}

Tensor ResNetClassifier::backward(const Tensor& gy) {
  Tensor g = pool_.backward(fc_.backward(gy));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
  return stem_.backward(stem_bn_.backward(stem_relu_.backward(g)));
}

std::vector<ParamRef> ResNetClassifier::params() {
  std::vector<ParamRef> out;
  stem_.collect("stem", out);
  stem_bn_.collect("stem_bn", out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    auto& blk = blocks_[i];
    blk.conv1.collect(p + ".conv1", out);
    blk.bn1.collect(p + ".bn1", out);
    blk.conv2.collect(p + ".conv2", out);
    blk.bn2.collect(p + ".bn2", out);
    if (blk.has_projection) {
      blk.proj.collect(p + ".proj", out);
      blk.proj_bn.collect(p + ".proj_bn", out);
    }
  }
  fc_.collect("fc", out);
  return out;
}

void ResNetClassifier::export_tensors(std::vector<NamedTensor>& out) const {
  auto& self = const_cast<ResNetClassifier&>(*this);
  for (auto& r : self.params()) out.push_back({r.name, *r.value});
  // Running statistics ride along so evaluation mode is reproducible.
  auto push_bn = [&out](const std::string& name, const BatchNorm2d& bn) {
    out.push_back({name + ".running_mean", bn.running_mean});
    out.push_back({name + ".running_var", bn.running_var});
  };
  push_bn("stem_bn", stem_bn_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    push_bn(p + ".bn1", blocks_[i].bn1);
    push_bn(p + ".bn2", blocks_[i].bn2);
    if (blocks_[i].has_projection) push_bn(p + ".proj_bn", blocks_[i].proj_bn);
  }
}

void ResNetClassifier::import_tensors(const ModelParams& params) {
  std::ostringstream bad;
  auto copy_into = [&](const std::string& name, Tensor& dst) {
    const Tensor* src = params.find(name);
    if (!src || !src->same_shape(dst)) {
      bad << " " << name;
      return;
    }
    dst = *src;
  };
  for (auto& r : this->params()) copy_into(r.name, *r.value);
  copy_into("stem_bn.running_mean", stem_bn_.running_mean);
  copy_into("stem_bn.running_var", stem_bn_.running_var);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    copy_into(p + ".bn1.running_mean", blocks_[i].bn1.running_mean);
    copy_into(p + ".bn1.running_var", blocks_[i].bn1.running_var);
    copy_into(p + ".bn2.running_mean", blocks_[i].bn2.running_mean);
    copy_into(p + ".bn2.running_var", blocks_[i].bn2.running_var);
    if (blocks_[i].has_projection) {
      copy_into(p + ".proj_bn.running_mean", blocks_[i].proj_bn.running_mean);
      copy_into(p + ".proj_bn.running_var", blocks_[i].proj_bn.running_var);
    }
  }
  if (!bad.str().empty())
    throw std::invalid_argument("classifier weights: missing or shape-mismatched tensors:" +
                                bad.str());
}

// ---------------------------------------------------------------------------
// Params container helpers
// ---------------------------------------------------------------------------

namespace {

nlohmann::json spec_to_json(const ResNetSpec& spec) {
  return {{"stage_blocks", spec.stage_blocks},
          {"stage_widths", spec.stage_widths},
          {"in_channels", spec.in_channels},
          {"num_classes", spec.num_classes}};
}

ResNetSpec spec_from_json(const nlohmann::json& j) {
  ResNetSpec spec;
  spec.stage_blocks = j.at("stage_blocks").get<std::vector<int>>();
  spec.stage_widths = j.at("stage_widths").get<std::vector<int>>();
  spec.in_channels = j.value("in_channels", 1);
  spec.num_classes = j.value("num_classes", 2);
  return spec;
}

ModelParams pack_classifier(const ResNetClassifier& net, const ClassifierConfig& cfg,
                            double input_mean, double input_std) {
  ModelParams p;
  p.arch = "resnet18";
  p.config = cfg.to_json();
  p.config["spec"] = spec_to_json(net.spec());
  p.config["library_version"] = kVersion;
  net.export_tensors(p.tensors);
  Tensor mean_t = Tensor::vec(1), std_t = Tensor::vec(1);
  mean_t.v[0] = input_mean;
  std_t.v[0] = input_std;
  p.tensors.push_back({"input_mean", mean_t});
  p.tensors.push_back({"input_std", std_t});
  return p;
}

struct LoadedClassifier {
  ResNetClassifier net;
  ClassifierConfig cfg;
  double input_mean;
  double input_std;
};

LoadedClassifier unpack_classifier(const ModelParams& params) {
  if (params.arch != "resnet18")
    throw std::invalid_argument("classifier params have arch '" + params.arch + "'");
  const ClassifierConfig cfg = ClassifierConfig::from_json(params.config);
  const ResNetSpec spec = spec_from_json(params.config.at("spec"));
  LoadedClassifier lc{ResNetClassifier(spec, 0), cfg, 0.0, 1.0};
  lc.net.import_tensors(params);
  if (const Tensor* t = params.find("input_mean")) lc.input_mean = t->v[0];
  if (const Tensor* t = params.find("input_std")) lc.input_std = t->v[0];
  return lc;
}

// Resizes a frame to the network input and normalizes into the batch slot.
void fill_input(Tensor& x, int slot, const Image& img, int size, int channels, double mean,
                double stdev) {
  const Image resized =
      (img.height == size && img.width == size) ? img : resize_bicubic(img, size, size);
  const double inv = 1.0 / stdev;
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < size; ++y)
      for (int xx = 0; xx < size; ++xx)
        x.at(slot, c, y, xx) = (resized.at(y, xx) - mean) * inv;
}

// Row-wise softmax over (N, K, 1, 1) logits.
void softmax_rows(const Tensor& logits, std::vector<double>& probs) {
  const int n = logits.n, k = logits.c;
  probs.assign(static_cast<std::size_t>(n) * k, 0.0);
  for (int i = 0; i < n; ++i) {
    double mx = logits.v[static_cast<std::size_t>(i) * k];
    for (int j = 1; j < k; ++j)
      mx = std::max(mx, logits.v[static_cast<std::size_t>(i) * k + j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double e = std::exp(logits.v[static_cast<std::size_t>(i) * k + j] - mx);
      probs[static_cast<std::size_t>(i) * k + j] = e;
      sum += e;
    }
    for (int j = 0; j < k; ++j) probs[static_cast<std::size_t>(i) * k + j] /= sum;
  }
}

}  // namespace

ModelParams build_classifier(const ClassifierConfig& cfg) {
  cfg.validate();
  if (!cfg.pretrained_init.empty()) {
    const ModelParams loaded = load_model(cfg.pretrained_init);
    if (loaded.arch != "resnet18")
      throw std::invalid_argument("pretrained_init arch '" + loaded.arch +
                                  "' is not a classifier");
    ResNetSpec spec = ResNetSpec::from_config(cfg);
    if (loaded.config.contains("spec"))
      spec.in_channels = loaded.config["spec"].value("in_channels", 1);
    ResNetClassifier net(spec, mix_seed(cfg.seed, "classifier-init"));
    net.import_tensors(loaded);  // shape mismatches -> hard error with names
    double mean = 0.0, stdev = 1.0;
    if (const Tensor* t = loaded.find("input_mean")) mean = t->v[0];
    if (const Tensor* t = loaded.find("input_std")) stdev = t->v[0];
    return pack_classifier(net, cfg, mean, stdev);
  }
  ResNetClassifier net(ResNetSpec::from_config(cfg), mix_seed(cfg.seed, "classifier-init"));
  return pack_classifier(net, cfg, 0.0, 1.0);
}

std::pair<ModelParams, TrainHistory> train_classifier(const TrainTestSplit& split,
                                                      const ClassifierConfig& cfg) {
  cfg.validate();
  if (split.train.empty()) throw std::invalid_argument("train_classifier: empty training set");
  {
    bool has[2] = {false, false};
    for (const auto& f : split.train) has[f.label(split.task)] = true;
    if (!has[0] || !has[1])
      throw std::invalid_argument("train_classifier: single-class training set");
  }

  const int size = cfg.input_size;
  std::vector<Image> imgs;
  std::vector<int> labels;
  imgs.reserve(split.train.size());
  for (const auto& f : split.train) {
    imgs.push_back(resize_bicubic(f.img(), size, size));
    labels.push_back(f.label(split.task));
  }

  // Normalization constants from the training split only.
  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& img : imgs) {
    for (double v : img.px) mean += v;
    count += img.size();
  }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const auto& img : imgs)
    for (double v : img.px) var += (v - mean) * (v - mean);
  var /= static_cast<double>(count);
  const double stdev = var > 1e-12 ? std::sqrt(var) : 1.0;

  ModelParams start = build_classifier(cfg);
  LoadedClassifier lc = unpack_classifier(start);
  ResNetClassifier& net = lc.net;
  const int channels = net.spec().in_channels;

  auto refs = net.params();
  Adam opt(cfg.lr_rate);
  TrainHistory hist;

  const std::size_t n = imgs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, "epoch:" + std::to_string(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    long hits = 0;
    for (std::size_t pos = 0; pos < n; pos += cfg.batch) {
      const int bsz = static_cast<int>(std::min<std::size_t>(cfg.batch, n - pos));
      Tensor x(bsz, channels, size, size);
      std::vector<int> y(bsz);
      for (int i = 0; i < bsz; ++i) {
        const std::size_t src = order[pos + i];
        fill_input(x, i, imgs[src], size, channels, mean, stdev);
        y[i] = labels[src];
      }
      const Tensor logits = net.forward(x, true);
      std::vector<double> probs;
      softmax_rows(logits, probs);
      Tensor gy(bsz, 2, 1, 1);
      double loss = 0.0;
      for (int i = 0; i < bsz; ++i) {
        const double p_true = std::max(probs[static_cast<std::size_t>(i) * 2 + y[i]], 1e-300);
        loss -= std::log(p_true);
        for (int j = 0; j < 2; ++j)
          gy.v[static_cast<std::size_t>(i) * 2 + j] =
              (probs[static_cast<std::size_t>(i) * 2 + j] - (j == y[i] ? 1.0 : 0.0)) / bsz;
        const int pred =
            probs[static_cast<std::size_t>(i) * 2] >= probs[static_cast<std::size_t>(i) * 2 + 1]
                ? 0
                : 1;
        if (pred == y[i]) ++hits;
      }
      loss /= bsz;
      if (!std::isfinite(loss))
        throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                                 std::to_string(epoch));
      epoch_loss += loss * bsz;
      zero_grads(refs);
      net.backward(gy);
      opt.step(refs);
    }
    HistoryRecord rec;
    rec.step = epoch;
    rec.loss = epoch_loss / static_cast<double>(n);
    rec.pixel_loss = rec.loss;
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    hist.records.push_back(rec);
  }

  hist.final_pixel_mse = hist.records.back().loss;
  return {pack_classifier(net, cfg, mean, stdev), hist};
}

ClassifierResult evaluate_classifier(const ModelParams& params,
                                     const std::vector<EchoFrame>& frames, Task task) {
  if (frames.empty()) throw std::invalid_argument("evaluate_classifier: no frames");
  LoadedClassifier lc = unpack_classifier(params);
  const int size = lc.cfg.input_size;
  const int channels = lc.net.spec().in_channels;

  ClassifierResult result;
  result.per_frame.reserve(frames.size());
  constexpr int kChunk = 32;
  for (std::size_t pos = 0; pos < frames.size(); pos += kChunk) {
    const int bsz = static_cast<int>(std::min<std::size_t>(kChunk, frames.size() - pos));
    Tensor x(bsz, channels, size, size);
    for (int i = 0; i < bsz; ++i)
      fill_input(x, i, frames[pos + i].img(), size, channels, lc.input_mean, lc.input_std);
    const Tensor logits = lc.net.forward(x, false);
    std::vector<double> probs;
    softmax_rows(logits, probs);
    for (int i = 0; i < bsz; ++i) {
      const double p0 = probs[static_cast<std::size_t>(i) * 2];
      const double p1 = probs[static_cast<std::size_t>(i) * 2 + 1];
      const int pred = p0 >= p1 ? 0 : 1;
      const auto& f = frames[pos + i];
      PerFrameRecord rec{f.id(), f.label(task), pred, pred == 0 ? p0 : p1};
      ++result.confusion[rec.label][rec.pred];
      result.per_frame.push_back(std::move(rec));
    }
  }
  long hits = 0;
  for (int i = 0; i < 2; ++i) hits += result.confusion[i][i];
  result.accuracy = static_cast<double>(hits) / static_cast<double>(frames.size());
  return result;
}

}  // namespace echosr
