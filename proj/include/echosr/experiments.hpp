#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "echosr/classifier.hpp"
#include "echosr/dataset.hpp"
#include "echosr/model_io.hpp"

namespace echosr {

enum class SrArch { srresnet, srgan };
enum class SrMode { train_on_sr, test_on_sr };

std::string to_string(SrArch a);
std::string to_string(SrMode m);
SrArch parse_sr_arch(const std::string& s);
SrMode parse_sr_mode(const std::string& s);

/// 3x3 accuracy grid: cells[train tier][test tier], mean over seeds, with
/// the per-cell standard deviation recorded alongside.
struct EvalMatrix {
  Task task = Task::view;
  double cells[3][3] = {};
  double stds[3][3] = {};
  std::vector<std::uint64_t> seeds;
  nlohmann::json config;
};

struct SRImprovementRecord {
  Task task = Task::view;
  SrMode mode = SrMode::train_on_sr;
  SrArch sr_model = SrArch::srresnet;
  Quality counterpart_quality = Quality::good;
  double baseline_acc = 0.0;
  double enhanced_acc = 0.0;
  double abs_delta_pp = 0.0;   // percentage points
  double rel_delta_pct = 0.0;  // relative percent
  std::string baseline_checksum;  // per-seed classifier checksums, comma joined
  std::string enhanced_checksum;
};

using SrModelList = std::vector<std::pair<SrArch, ModelParams>>;

/// Trains one classifier per (train tier, seed) and evaluates on every
/// tier. Diagonal cells use the tier's held-out test split; off-diagonal
/// cells use the other tier's full capped pool.
EvalMatrix run_cross_quality(const EchoDataset& ds, Task task, const ClassifierConfig& cfg,
                             const std::vector<std::uint64_t>& seeds);

/// Retrain-on-enhanced mode: the train-on-poor baseline row against the
/// same protocol with the poor tier replaced by its SR enhancement. One
/// record per (test tier, SR model).
std::vector<SRImprovementRecord> run_sr_train_experiment(const EchoDataset& ds, Task task,
                                                         const SrModelList& sr_models,
                                                         const ClassifierConfig& cfg,
                                                         const std::vector<std::uint64_t>& seeds);

/// Frozen-model mode: classifiers trained on good/medium are evaluated on
/// the poor pool before and after enhancement; the classifier parameters
/// are byte-identical across both evaluations. One record per
/// (train tier, SR model).
std::vector<SRImprovementRecord> run_sr_test_experiment(const EchoDataset& ds, Task task,
                                                        const SrModelList& sr_models,
                                                        const ClassifierConfig& cfg,
                                                        const std::vector<std::uint64_t>& seeds);

struct SrModelSummary {
  std::map<SrArch, double> mean_rel_improvement;
  std::map<SrArch, std::map<Task, double>> per_task;
};

/// Per-architecture mean of the relative improvements. Requires records
/// from both architectures.
SrModelSummary compare_sr_models(const std::vector<SRImprovementRecord>& records);

/// Aggregated outputs of one experiment run, serializable to the results
/// file. No timestamps anywhere: identical runs produce identical bytes.
struct RunResults {
  std::vector<EvalMatrix> matrices;
  std::vector<SRImprovementRecord> records;
  nlohmann::json dataset_info;
  nlohmann::json classifier_config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> notes;
};

nlohmann::json results_to_json(const RunResults& results);
RunResults results_from_json(const nlohmann::json& j);

/// Emits results.json, one matrix CSV per task
/// (`train_quality,test_good,test_medium,test_poor`), one bar-chart PGM
/// per (task, mode) panel with a value legend sidecar, and a run
/// manifest.
void generate_report(const RunResults& results, const std::filesystem::path& out_dir);

}  // namespace echosr
