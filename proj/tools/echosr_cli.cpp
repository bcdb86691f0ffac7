// Command-line front end wiring the library into the two-stage workflow:
// ingest/stratify, LR-HR pair construction, SR training, enhancement, and
// the cross-quality / SR-recovery experiment grids.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "echosr/dataset.hpp"
#include "echosr/degradation.hpp"
#include "echosr/experiments.hpp"
#include "echosr/image_io.hpp"
#include "echosr/metrics.hpp"
#include "echosr/model_io.hpp"
#include "echosr/sr_models.hpp"
#include "echosr/version.hpp"

namespace fs = std::filesystem;
using namespace echosr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Creates the output directory; refuses to reuse a nonempty one unless
// --overwrite was given.
void prepare_out_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!overwrite)
      throw UsageError("output directory " + dir.string() +
                       " is not empty (pass --overwrite to reuse it)");
  }
  fs::create_directories(dir);
}

// Every run records its configuration and input identities before any
// heavy work starts.
void write_run_manifest(const fs::path& dir, const std::string& command,
                        const nlohmann::json& config, const nlohmann::json& inputs) {
  nlohmann::json m;
  m["command"] = command;
  m["library_version"] = kVersion;
  m["config"] = config;
  m["inputs"] = inputs;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) seeds.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

nlohmann::json load_config_file(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

struct DatasetArgs {
  std::string bundle;
  bool synthetic = false;
  int patients = 30;
  int image_size = 64;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dataset", bundle, "dataset bundle directory (from `ingest`)");
    cmd->add_flag("--synthetic", synthetic, "use a synthetic phantom dataset");
    cmd->add_option("--patients", patients, "synthetic patient count")->check(CLI::PositiveNumber);
    cmd->add_option("--image-size", image_size, "synthetic image edge (>= 64)");
  }

  EchoDataset load(std::uint64_t seed) const {
    if (!bundle.empty() && synthetic)
      throw UsageError("pass either --dataset or --synthetic, not both");
    if (!bundle.empty()) return load_bundle(bundle);
    if (synthetic) return synthesize_dataset(patients, image_size, seed);
    throw UsageError("no dataset source: pass --dataset <bundle> or --synthetic");
  }

  nlohmann::json describe(const EchoDataset& ds) const {
    return {{"provenance", to_string(ds.provenance)},
            {"n_frames", ds.size()},
            {"checksum", dataset_checksum(ds)},
            {"source", bundle.empty() ? "synthetic" : bundle}};
  }
};

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& camus_root, const std::string& manifest_path,
               const DatasetArgs& synth, std::uint64_t seed, std::string out_dir,
               bool overwrite) {
  int sources = 0;
  if (!camus_root.empty()) ++sources;
  if (!manifest_path.empty()) ++sources;
  if (synth.synthetic) ++sources;
  if (sources != 1)
    throw UsageError("ingest needs exactly one source: --camus <dir>, --manifest <file> or "
                     "--synthetic");
  if (out_dir.empty()) {
    const char* cache = std::getenv("ECHOSR_CACHE");
    if (!cache)
      throw UsageError("ingest needs --out <dir> (or the ECHOSR_CACHE environment variable)");
    out_dir = (fs::path(cache) / "dataset").string();
  }

  EchoDataset ds;
  if (!camus_root.empty())
    ds = load_camus(camus_root);
  else if (!manifest_path.empty())
    ds = load_manifest(manifest_path);
  else
    ds = synthesize_dataset(synth.patients, synth.image_size, seed);

  std::cout << "Ingested " << ds.size() << " frames (" << to_string(ds.provenance) << ")\n\n";
  std::cout << format_distribution(distribution_table(ds));

  prepare_out_dir(out_dir, overwrite);
  write_run_manifest(out_dir, "ingest",
                     {{"seed", seed},
                      {"camus", camus_root},
                      {"manifest", manifest_path},
                      {"synthetic", synth.synthetic},
                      {"patients", synth.patients},
                      {"image_size", synth.image_size}},
                     {{"checksum", dataset_checksum(ds)}});
  save_bundle(ds, out_dir);
  std::cout << "\nBundle written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_make_pairs(const std::string& bundle, const std::string& tier, int scale,
                   const std::string& out_dir, bool overwrite) {
  if (bundle.empty()) throw UsageError("make-pairs needs --dataset <bundle>");
  if (out_dir.empty()) throw UsageError("make-pairs needs --out <dir>");
  const EchoDataset ds = load_bundle(bundle);
  const auto strat = stratify_by_quality(ds);
  const Quality q = parse_quality(tier);
  const EchoDataset& subset = strat.at(q);
  if (subset.empty()) throw UsageError("tier " + tier + " is empty in " + bundle);

  prepare_out_dir(out_dir, overwrite);
  write_run_manifest(out_dir, "make-pairs",
                     {{"tier", to_string(q)}, {"scale", scale}},
                     {{"dataset", bundle}, {"checksum", dataset_checksum(ds)}});
  const auto pairs = make_sr_pairs(subset, scale);
  dump_pairs(pairs, out_dir);
  std::cout << "Wrote " << pairs.size() << " LR/HR pairs (x" << scale << ") to " << out_dir
            << "\n";
  return kExitOk;
}

SRConfig sr_config_from(const nlohmann::json& file_cfg, const CLI::App* cmd, long steps,
                        int blocks, int channels, int batch, int patch, double lr,
                        std::uint64_t seed, const std::string& extractor) {
  SRConfig cfg = desk_sr_config();
  if (file_cfg.contains("sr")) cfg = SRConfig::from_json(file_cfg["sr"]);
  if (cmd->count("--steps")) cfg.steps = steps;
  if (cmd->count("--blocks")) cfg.n_res_blocks = blocks;
  if (cmd->count("--channels")) cfg.base_channels = channels;
  if (cmd->count("--batch")) cfg.batch = batch;
  if (cmd->count("--patch")) cfg.patch_size = patch;
  if (cmd->count("--lr")) cfg.lr_rate = lr;
  if (cmd->count("--extractor")) cfg.extractor_path = extractor;
  cfg.seed = seed;
  return cfg;
}

int cmd_train_sr(const std::string& arch, const std::string& pairs_dir,
                 const std::string& init_path, const SRConfig& cfg, const std::string& out_dir,
                 bool overwrite) {
  if (pairs_dir.empty()) throw UsageError("train-sr needs --pairs <dir> (from `make-pairs`)");
  if (out_dir.empty()) throw UsageError("train-sr needs --out <dir>");
  const SrArch a = parse_sr_arch(arch);

  prepare_out_dir(out_dir, overwrite);
  write_run_manifest(out_dir, "train-sr", {{"arch", arch}, {"sr", cfg.to_json()}},
                     {{"pairs", pairs_dir}, {"init", init_path}});

  const auto pairs = load_pairs(pairs_dir);
  std::optional<ModelParams> init;
  if (!init_path.empty()) init = load_model(init_path);

  auto [params, hist] = a == SrArch::srresnet
                            ? train_srresnet(pairs, cfg)
                            : train_srgan(pairs, cfg, init ? &*init : nullptr);
  save_model(params, fs::path(out_dir) / "model.esrm");

  nlohmann::json hj;
  hj["warnings"] = hist.warnings;
  hj["final_pixel_mse"] = hist.final_pixel_mse;
  hj["records"] = nlohmann::json::array();
  for (const auto& rec : hist.records) {
    nlohmann::json r = {{"step", rec.step}, {"loss", rec.loss}, {"pixel_loss", rec.pixel_loss}};
    if (rec.discriminator_loss) r["discriminator_loss"] = *rec.discriminator_loss;
    if (rec.perceptual_loss) r["perceptual_loss"] = *rec.perceptual_loss;
    if (rec.adversarial_loss) r["adversarial_loss"] = *rec.adversarial_loss;
    if (rec.val_psnr) r["val_psnr"] = *rec.val_psnr;
    hj["records"].push_back(r);
  }
  std::ofstream(fs::path(out_dir) / "history.json") << hj.dump(2) << "\n";

  for (const auto& w : hist.warnings) std::cerr << "warning: " << w << "\n";
  char line[96];
  std::snprintf(line, sizeof(line), "final pixel MSE: %.12g", hist.final_pixel_mse);
  std::cout << line << "\n";
  std::cout << "Model written to " << (fs::path(out_dir) / "model.esrm").string() << "\n";
  return kExitOk;
}

int cmd_enhance(const std::string& model_path, const std::string& bundle,
                const std::string& tier, const std::string& out_dir, bool overwrite) {
  if (model_path.empty()) throw UsageError("enhance needs --model <file>");
  if (bundle.empty()) throw UsageError("enhance needs --dataset <bundle>");
  if (out_dir.empty()) throw UsageError("enhance needs --out <dir>");
  const ModelParams params = load_model(model_path);
  const EchoDataset ds = load_bundle(bundle);
  const Quality q = parse_quality(tier);
  const EchoDataset& subset = stratify_by_quality(ds).at(q);
  if (subset.empty()) throw UsageError("tier " + tier + " is empty in " + bundle);

  prepare_out_dir(out_dir, overwrite);
  write_run_manifest(out_dir, "enhance", {{"tier", to_string(q)}, {"model", model_path}},
                     {{"dataset", bundle}, {"checksum", dataset_checksum(ds)},
                      {"model_checksum", params_checksum(params)}});
  const EchoDataset enhanced = enhance_subset(subset, params);
  save_bundle(enhanced, out_dir);
  std::cout << "Enhanced " << enhanced.size() << " frames into " << out_dir << "\n";
  return kExitOk;
}

int cmd_experiment(const DatasetArgs& data, const std::string& task_opt,
                   const std::string& mode_opt, const std::string& srresnet_path,
                   const std::string& srgan_path, const ClassifierConfig& cfg,
                   const std::vector<std::uint64_t>& seeds, std::uint64_t seed,
                   const std::string& out_dir, bool overwrite, bool patient_level) {
  if (out_dir.empty()) throw UsageError("experiment needs --out <dir>");
  const bool want_cross = mode_opt == "cross-quality" || mode_opt == "all";
  const bool want_train_sr = mode_opt == "train-on-sr" || mode_opt == "all";
  const bool want_test_sr = mode_opt == "test-on-sr" || mode_opt == "all";
  if (!want_cross && !want_train_sr && !want_test_sr)
    throw UsageError("unknown --mode '" + mode_opt +
                     "' (cross-quality | train-on-sr | test-on-sr | all)");

  SrModelList sr_models;
  if (!srresnet_path.empty())
    sr_models.emplace_back(SrArch::srresnet, load_model(srresnet_path));
  if (!srgan_path.empty()) sr_models.emplace_back(SrArch::srgan, load_model(srgan_path));
  if ((want_train_sr || want_test_sr) && sr_models.empty())
    throw UsageError("mode '" + mode_opt +
                     "' needs a trained SR model: pass --srresnet-model and/or --srgan-model");

  std::vector<Task> tasks;
  if (task_opt == "view")
    tasks = {Task::view};
  else if (task_opt == "phase")
    tasks = {Task::phase};
  else if (task_opt == "both")
    tasks = {Task::view, Task::phase};
  else
    throw UsageError("unknown --task '" + task_opt + "' (view | phase | both)");

  const EchoDataset ds = data.load(seed);

  prepare_out_dir(out_dir, overwrite);
  write_run_manifest(out_dir, "experiment",
                     {{"task", task_opt},
                      {"mode", mode_opt},
                      {"classifier", cfg.to_json()},
                      {"seeds", seeds},
                      {"patient_level_split", patient_level}},
                     data.describe(ds));

  RunResults results;
  results.dataset_info = data.describe(ds);
  results.classifier_config = cfg.to_json();
  results.seeds = seeds;
  results.notes = {"good/medium pools are subsampled per (view, phase) cell to the "
                   "poor-tier cell counts",
                   std::string("split granularity: ") +
                       (patient_level ? "patient-level" : "frame-level")};

  for (Task task : tasks) {
    if (want_cross) results.matrices.push_back(run_cross_quality(ds, task, cfg, seeds));
    if (want_train_sr) {
      auto recs = run_sr_train_experiment(ds, task, sr_models, cfg, seeds);
      results.records.insert(results.records.end(), recs.begin(), recs.end());
    }
    if (want_test_sr) {
      auto recs = run_sr_test_experiment(ds, task, sr_models, cfg, seeds);
      results.records.insert(results.records.end(), recs.begin(), recs.end());
    }
  }

  generate_report(results, out_dir);
  std::cout << "Report written to " << out_dir << "\n";
  for (const auto& m : results.matrices) {
    std::cout << "\n" << to_string(m.task) << " cross-quality accuracy (train rows):\n";
    for (Quality tr : kQualities) {
      std::cout << "  " << to_string(tr) << ":";
      for (Quality te : kQualities) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), " %.3f", m.cells[static_cast<int>(tr)][static_cast<int>(te)]);
        std::cout << buf;
      }
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_report(const std::string& results_path, const std::string& out_dir, bool overwrite) {
  if (results_path.empty()) throw UsageError("report needs a results.json path");
  if (out_dir.empty()) throw UsageError("report needs --out <dir>");
  std::ifstream in(results_path);
  if (!in) throw std::runtime_error("cannot open " + results_path);
  nlohmann::json j;
  in >> j;
  const RunResults results = results_from_json(j);
  prepare_out_dir(out_dir, overwrite);
  generate_report(results, out_dir);
  std::cout << "Report regenerated into " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality-stratified echo classification with SR enhancement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::uint64_t seed = 0;
  std::string config_path, out_dir;
  bool overwrite = false;
  app.add_option("--seed", seed, "global seed");
  app.add_option("--config", config_path, "JSON config file ({\"sr\": {...}, \"classifier\": {...}})");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--overwrite", overwrite, "allow reuse of a nonempty output directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load CAMUS/manifest/synthetic data, print the "
                                              "distribution table, cache a bundle");
  std::string camus_root, manifest_path;
  DatasetArgs ingest_synth;
  ingest->add_option("--camus", camus_root, "CAMUS release root directory");
  ingest->add_option("--manifest", manifest_path, "CSV manifest path");
  ingest->add_flag("--synthetic", ingest_synth.synthetic, "synthesize a phantom dataset");
  ingest->add_option("--patients", ingest_synth.patients, "synthetic patient count");
  ingest->add_option("--image-size", ingest_synth.image_size, "synthetic image edge");

  // make-pairs
  auto* mkpairs = app.add_subcommand("make-pairs", "build bicubic LR/HR pairs from a tier");
  std::string pairs_bundle, pairs_tier = "good";
  int pairs_scale = 4;
  mkpairs->add_option("--dataset", pairs_bundle, "dataset bundle");
  mkpairs->add_option("--tier", pairs_tier, "quality tier (default good)");
  mkpairs->add_option("--scale", pairs_scale, "downsampling factor (2 or 4)");

  // train-sr
  auto* trainsr = app.add_subcommand("train-sr", "train SRResNet or SRGAN on a pairs directory");
  std::string sr_arch = "srresnet", sr_pairs_dir, sr_init, sr_extractor;
  long sr_steps = 400;
  int sr_blocks = 4, sr_channels = 32, sr_batch = 2, sr_patch = 16;
  double sr_lr = 1e-4;
  trainsr->add_option("--arch", sr_arch, "srresnet | srgan");
  trainsr->add_option("--pairs", sr_pairs_dir, "pairs directory (from make-pairs)");
  trainsr->add_option("--init", sr_init, "warm-start generator weights (.esrm)");
  trainsr->add_option("--steps", sr_steps, "training steps");
  trainsr->add_option("--blocks", sr_blocks, "residual blocks");
  trainsr->add_option("--channels", sr_channels, "base channels");
  trainsr->add_option("--batch", sr_batch, "batch size");
  trainsr->add_option("--patch", sr_patch, "LR patch edge");
  trainsr->add_option("--lr", sr_lr, "learning rate");
  trainsr->add_option("--extractor", sr_extractor, "perceptual extractor weights (.esrm)");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "apply a trained generator to a tier");
  std::string enh_model, enh_bundle, enh_tier = "poor";
  enhance->add_option("--model", enh_model, "trained generator (.esrm)");
  enhance->add_option("--dataset", enh_bundle, "dataset bundle");
  enhance->add_option("--tier", enh_tier, "tier to enhance (default poor)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run the cross-quality and SR-recovery grids");
  DatasetArgs exp_data;
  exp_data.attach(exp);
  std::string exp_task = "view", exp_mode = "cross-quality";
  std::string exp_srresnet, exp_srgan, exp_seeds = "1,2,3";
  bool patient_level = false;
  int clf_input = 48, clf_batch = 16, clf_epochs = 10;
  double clf_lr = 1e-4, clf_width = 0.25;
  exp->add_option("--task", exp_task, "view | phase | both");
  exp->add_option("--mode", exp_mode, "cross-quality | train-on-sr | test-on-sr | all");
  exp->add_option("--srresnet-model", exp_srresnet, "trained SRResNet (.esrm)");
  exp->add_option("--srgan-model", exp_srgan, "trained SRGAN (.esrm)");
  exp->add_option("--seeds", exp_seeds, "comma-separated seed list");
  exp->add_flag("--patient-level", patient_level, "split by patient instead of frame");
  exp->add_option("--input-size", clf_input, "classifier input edge");
  exp->add_option("--batch", clf_batch, "classifier batch size");
  exp->add_option("--epochs", clf_epochs, "classifier epochs");
  exp->add_option("--lr", clf_lr, "classifier learning rate");
  exp->add_option("--width", clf_width, "classifier width multiplier");

  // report
  auto* report = app.add_subcommand("report", "regenerate report files from a results.json");
  std::string report_results;
  report->add_option("results", report_results, "path to results.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    const nlohmann::json file_cfg = load_config_file(config_path);

    if (ingest->parsed())
      return cmd_ingest(camus_root, manifest_path, ingest_synth, seed, out_dir, overwrite);

    if (mkpairs->parsed())
      return cmd_make_pairs(pairs_bundle, pairs_tier, pairs_scale, out_dir, overwrite);

    if (trainsr->parsed()) {
      const SRConfig cfg = sr_config_from(file_cfg, trainsr, sr_steps, sr_blocks, sr_channels,
                                          sr_batch, sr_patch, sr_lr, seed, sr_extractor);
      return cmd_train_sr(sr_arch, sr_pairs_dir, sr_init, cfg, out_dir, overwrite);
    }

    if (enhance->parsed()) return cmd_enhance(enh_model, enh_bundle, enh_tier, out_dir, overwrite);

    if (exp->parsed()) {
      ClassifierConfig cfg = desk_classifier_config();
      if (file_cfg.contains("classifier"))
        cfg = ClassifierConfig::from_json(file_cfg["classifier"]);
      else {
        cfg.input_size = clf_input;
        cfg.width_multiplier = clf_width;
      }
      if (exp->count("--input-size")) cfg.input_size = clf_input;
      if (exp->count("--width")) cfg.width_multiplier = clf_width;
      if (exp->count("--batch")) cfg.batch = clf_batch;
      if (exp->count("--epochs")) cfg.epochs = clf_epochs;
      if (exp->count("--lr")) cfg.lr_rate = clf_lr;
      return cmd_experiment(exp_data, exp_task, exp_mode, exp_srresnet, exp_srgan, cfg,
                            parse_seeds(exp_seeds), seed, out_dir, overwrite, patient_level);
    }

    if (report->parsed()) return cmd_report(report_results, out_dir, overwrite);

    std::cerr << app.help() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
