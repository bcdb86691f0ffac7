#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "echosr/dataset.hpp"
#include "echosr/layers.hpp"
#include "echosr/model_io.hpp"
#include "echosr/sr_models.hpp"  // TrainHistory

namespace echosr {

/// Training protocol for the binary view/phase classifier. The defaults
/// mirror the transfer-learning recipe (batch 16, 10 epochs, Adam 1e-4);
/// desk_classifier_config() shrinks the network and input for CPU runs.
struct ClassifierConfig {
  int input_size = 224;
  int batch = 16;
  int epochs = 10;
  double lr_rate = 1e-4;
  std::uint64_t seed = 0;
  double width_multiplier = 1.0;
  std::string pretrained_init;  // optional initial weights file

  void validate() const;
  nlohmann::json to_json() const;
  static ClassifierConfig from_json(const nlohmann::json& j);
};

ClassifierConfig desk_classifier_config();

struct PerFrameRecord {
  std::string frame_id;
  int label = 0;
  int pred = 0;
  double confidence = 0.0;  // softmax probability of the predicted class
};

struct ClassifierResult {
  double accuracy = 0.0;
  std::array<std::array<long, 2>, 2> confusion{};  // [truth][pred]
  std::vector<PerFrameRecord> per_frame;
};

/// Residual network of the 18-layer family: 3x3 stem, four stages of
/// basic blocks, global average pooling, 2-way head. Stage widths scale
/// with the width multiplier. The miniature test variants shrink the
/// stage list.
struct ResNetSpec {
  std::vector<int> stage_blocks{2, 2, 2, 2};
  std::vector<int> stage_widths{64, 128, 256, 512};
  int in_channels = 1;
  int num_classes = 2;

  static ResNetSpec from_config(const ClassifierConfig& cfg);
};

class ResNetClassifier {
 public:
  ResNetClassifier(const ResNetSpec& spec, std::uint64_t init_seed);

  Tensor forward(const Tensor& x, bool train);  // (N, num_classes, 1, 1) logits
  Tensor backward(const Tensor& gy);
  std::vector<ParamRef> params();

  const ResNetSpec& spec() const { return spec_; }

  /// Serializes trainable parameters plus batch-norm running statistics.
  void export_tensors(std::vector<NamedTensor>& out) const;
  void import_tensors(const ModelParams& params);

 private:
  struct BasicBlock {
    Conv2d conv1;
    BatchNorm2d bn1;
    ReLU relu1;
    Conv2d conv2;
    BatchNorm2d bn2;
    bool has_projection;
    Conv2d proj;
    BatchNorm2d proj_bn;
    ReLU relu_out;
    Tensor skip_cache;

    BasicBlock(int c_in, int c_out, int stride);
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& gy);
  };

  ResNetSpec spec_;
  Conv2d stem_;
  BatchNorm2d stem_bn_;
  ReLU stem_relu_;
  std::vector<BasicBlock> blocks_;
  GlobalAvgPool pool_;
  Linear fc_;
};

/// Fresh classifier weights for the given config (or loaded from
/// cfg.pretrained_init when set). Normalization tensors default to
/// mean 0 / std 1 until training overwrites them.
ModelParams build_classifier(const ClassifierConfig& cfg);

/// Trains on the split's train side: frames are resized to
/// cfg.input_size, normalized by the training split's mean/std (stored
/// into the returned params), cross-entropy objective, Adam. The history
/// carries one record per epoch with loss and train accuracy.
std::pair<ModelParams, TrainHistory> train_classifier(const TrainTestSplit& split,
                                                      const ClassifierConfig& cfg);

/// Deterministic inference on labeled frames; confusion rows are truth,
/// columns prediction.
ClassifierResult evaluate_classifier(const ModelParams& params,
                                     const std::vector<EchoFrame>& frames, Task task);

}  // namespace echosr
