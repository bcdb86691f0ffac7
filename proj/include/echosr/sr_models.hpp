#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "echosr/dataset.hpp"
#include "echosr/degradation.hpp"
#include "echosr/layers.hpp"
#include "echosr/model_io.hpp"

namespace echosr {

/// Hyperparameters for the SR generators and the adversarial trainer.
/// Defaults follow the reference SRGAN sizing; desk_sr_config() shrinks
/// them to something a CPU can train in seconds.
struct SRConfig {
  int n_res_blocks = 16;
  int base_channels = 64;
  int scale = 4;
  double lr_rate = 1e-4;
  long steps = 1000;
  int batch = 8;
  std::uint64_t seed = 0;
  double perceptual_weight = 1.0;
  double adversarial_weight = 1e-3;
  int patch_size = 24;  // LR patch edge
  int disc_channels = 32;
  long eval_every = 200;
  std::string extractor_path;  // optional externally trained extractor

  void validate() const;
  nlohmann::json to_json() const;
  static SRConfig from_json(const nlohmann::json& j);
};

SRConfig desk_sr_config();

struct HistoryRecord {
  long step = 0;
  double loss = 0.0;        // total objective at this step
  double pixel_loss = 0.0;  // MSE component
  std::optional<double> perceptual_loss;
  std::optional<double> adversarial_loss;
  std::optional<double> discriminator_loss;
  std::optional<double> val_psnr;
  std::optional<double> train_accuracy;  // used by the classifier trainer
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
  std::vector<std::string> warnings;
  double final_pixel_mse = 0.0;  // full-training-set MSE after the run
};

/// SRResNet-style generator: 9x9 head, residual trunk, global skip,
/// x2 pixel-shuffle stages, 9x9 tail. Training runs on the raw output;
/// infer() clamps to [0, 1].
class Generator {
 public:
  Generator(const SRConfig& cfg, std::uint64_t init_seed);
  explicit Generator(const ModelParams& params);

  Tensor forward(const Tensor& lr, bool train);
  Tensor backward(const Tensor& gy);
  std::vector<ParamRef> params();
  ModelParams to_params(const std::string& arch) const;

  Image infer(const Image& lr);

  int scale() const { return scale_; }
  int n_res_blocks() const { return static_cast<int>(blocks_.size()); }
  int base_channels() const { return channels_; }

 private:
  struct ResBlock {
    Conv2d c1;
    PReLU act;
    Conv2d c2;
    ResBlock(int ch) : c1(ch, ch, 3, 1, 1), act(ch), c2(ch, ch, 3, 1, 1) {}
  };
  struct UpStage {
    Conv2d conv;
    PixelShuffle shuffle;
    PReLU act;
    UpStage(int ch) : conv(ch, ch * 4, 3, 1, 1), shuffle(2), act(ch) {}
  };

  int channels_;
  int scale_;
  Conv2d head_;
  PReLU head_act_;
  std::vector<ResBlock> blocks_;
  Conv2d post_;
  std::vector<UpStage> ups_;
  Conv2d tail_;
};

/// Strided convolutional binary classifier over HR-sized patches.
class Discriminator {
 public:
  Discriminator(int base_channels, std::uint64_t init_seed);

  Tensor forward(const Tensor& x, bool train);  // (N,1,1,1) logits
  Tensor backward(const Tensor& gy);
  std::vector<ParamRef> params();

 private:
  Conv2d c1_, c2_, c3_, c4_;
  LeakyReLU a1_, a2_, a3_, a4_;
  GlobalAvgPool pool_;
  Linear fc_;
};

/// Fixed convolutional feature stack for the perceptual term. Random by
/// default (seeded), loadable from a ModelParams file.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::uint64_t seed);
  explicit FeatureExtractor(const ModelParams& params);

  Tensor forward(const Tensor& x, bool train);
  /// Gradient wrt the input only; extractor weights stay fixed.
  Tensor backward_input(const Tensor& gy);
  ModelParams to_params() const;

 private:
  Conv2d c1_, c2_, c3_;
  ReLU r1_, r2_;
};

inline constexpr std::uint64_t kDefaultExtractorSeed = 0x0e5eed;

ModelParams make_perceptual_extractor(std::uint64_t seed = kDefaultExtractorSeed);

/// Feature-space mean squared distance between two equally sized images.
double perceptual_distance(const Image& a, const Image& b, const ModelParams& extractor);

/// Pixel-MSE training of the generator. Seeded and reproducible.
std::pair<ModelParams, TrainHistory> train_srresnet(const std::vector<SRPair>& pairs,
                                                    const SRConfig& cfg);

/// Adversarial training: alternating discriminator/generator updates,
/// one each per step. Generator loss = pixel MSE + perceptual_weight *
/// feature MSE + adversarial_weight * non-saturating adversarial term.
/// `init` warm-starts the generator from compatible weights.
std::pair<ModelParams, TrainHistory> train_srgan(const std::vector<SRPair>& pairs,
                                                 const SRConfig& cfg,
                                                 const ModelParams* init = nullptr);

/// Forward pass contractually tied to the srresnet architecture tag.
Image srresnet_forward(const Image& lr, const ModelParams& params);

/// Applies a trained generator to every frame; metadata is preserved and
/// source_path is tagged with the enhancement provenance.
EchoDataset enhance_subset(const EchoDataset& subset, const ModelParams& params);

}  // namespace echosr
