#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "echosr/tensor.hpp"

namespace echosr {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Opaque trained-weights handle shared by the SR generators, the
/// discriminator, the feature extractor and the classifier. The config
/// snapshot records the hyperparameters the model was built with.
struct ModelParams {
  static constexpr int kFormatVersion = 1;

  int version = kFormatVersion;
  std::string arch;
  nlohmann::json config = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t.value;
    return nullptr;
  }

  bool all_finite() const {
    for (const auto& t : tensors)
      if (!t.value.all_finite()) return false;
    return true;
  }
};

/// Single-file binary container: magic, format version, arch tag, config
/// snapshot (JSON text), then the named tensors with dims and raw doubles
/// (little-endian).
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

/// FNV-1a digest over arch, names, dims and raw tensor bytes, as a hex
/// string. Used for the frozen-model guarantees in the experiment reports.
std::string params_checksum(const ModelParams& params);

}  // namespace echosr
