#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "echosr/experiments.hpp"
#include "echosr/metrics.hpp"
#include "echosr/sr_models.hpp"

using namespace echosr;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ClassifierConfig tiny_cfg() {
  ClassifierConfig cfg;
  cfg.input_size = 32;
  cfg.width_multiplier = 0.125;
  cfg.batch = 8;
  cfg.epochs = 2;
  cfg.lr_rate = 1e-3;
  return cfg;
}

SRConfig tiny_sr_cfg() {
  SRConfig cfg;
  cfg.n_res_blocks = 1;
  cfg.base_channels = 8;
  cfg.scale = 4;
  cfg.steps = 20;
  cfg.batch = 2;
  cfg.patch_size = 12;
  cfg.disc_channels = 8;
  cfg.lr_rate = 1e-3;
  cfg.eval_every = 10;
  return cfg;
}

struct Fixture {
  EchoDataset ds = synthesize_dataset(12, 64, 101);
  SrModelList sr_models;

  Fixture() {
    const auto pairs = make_sr_pairs(stratify_by_quality(ds).at(Quality::good), 4);
    SRConfig cfg = tiny_sr_cfg();
    cfg.seed = 1;
    sr_models.emplace_back(SrArch::srresnet, train_srresnet(pairs, cfg).first);
    SRConfig gan_cfg = tiny_sr_cfg();
    gan_cfg.seed = 2;
    sr_models.emplace_back(SrArch::srgan, train_srgan(pairs, gan_cfg).first);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("cross-quality run fills all nine cells with valid accuracies") {
  auto& f = fixture();
  const EvalMatrix m = run_cross_quality(f.ds, Task::view, tiny_cfg(), {11});
  CHECK(m.task == Task::view);
  for (int tr = 0; tr < 3; ++tr)
    for (int te = 0; te < 3; ++te) {
      CHECK(m.cells[tr][te] >= 0.0);
      CHECK(m.cells[tr][te] <= 1.0);
      CHECK(m.stds[tr][te] == 0.0);  // single seed
    }
  const EvalMatrix m2 = run_cross_quality(f.ds, Task::view, tiny_cfg(), {11});
  for (int tr = 0; tr < 3; ++tr)
    for (int te = 0; te < 3; ++te) CHECK(m.cells[tr][te] == m2.cells[tr][te]);
}

TEST_CASE("train-on-sr experiment emits one record per (test tier, model)") {
  auto& f = fixture();
  const auto records =
      run_sr_train_experiment(f.ds, Task::view, f.sr_models, tiny_cfg(), {11});
  CHECK(records.size() == 6);  // 2 architectures x 3 test tiers
  for (const auto& r : records) {
    CHECK(r.mode == SrMode::train_on_sr);
    CHECK(r.abs_delta_pp == (r.enhanced_acc - r.baseline_acc) * 100.0);
    CHECK(r.rel_delta_pct == relative_improvement(r.baseline_acc, r.enhanced_acc));
  }
  // Baseline must coincide with the train-on-poor matrix row under the
  // same seeds.
  const EvalMatrix m = run_cross_quality(f.ds, Task::view, tiny_cfg(), {11});
  for (const auto& r : records) {
    const int te = static_cast<int>(r.counterpart_quality);
    CHECK(r.baseline_acc == m.cells[static_cast<int>(Quality::poor)][te]);
  }
}

TEST_CASE("test-on-sr experiment freezes the classifier") {
  auto& f = fixture();
  const auto records = run_sr_test_experiment(f.ds, Task::view, f.sr_models, tiny_cfg(), {11});
  CHECK(records.size() == 4);  // 2 train tiers x 2 architectures
  for (const auto& r : records) {
    CHECK(r.mode == SrMode::test_on_sr);
    CHECK((r.counterpart_quality == Quality::good || r.counterpart_quality == Quality::medium));
    CHECK(!r.baseline_checksum.empty());
    CHECK(r.baseline_checksum == r.enhanced_checksum);  // frozen-model guarantee
    CHECK(r.abs_delta_pp == (r.enhanced_acc - r.baseline_acc) * 100.0);
  }
}

TEST_CASE("identity enhancement implies a zero relative delta") {
  auto& f = fixture();
  // Evaluating a frozen classifier on the identical pool twice is the
  // identity-enhancement degenerate case.
  const auto split = build_classification_split(f.ds, Task::view, Quality::good, 11);
  ClassifierConfig cfg = tiny_cfg();
  cfg.seed = 11;
  auto [params, hist] = train_classifier(split, cfg);
  const auto pool = capped_class_pool(f.ds, Task::view, Quality::poor, 11);
  const double a = evaluate_classifier(params, pool, Task::view).accuracy;
  const double b = evaluate_classifier(params, pool, Task::view).accuracy;
  CHECK(a == b);
  if (a > 0.0) CHECK(relative_improvement(a, b) == 0.0);
}

TEST_CASE("compare_sr_models averages per architecture and requires both") {
  auto& f = fixture();
  const auto records = run_sr_test_experiment(f.ds, Task::view, f.sr_models, tiny_cfg(), {11});
  const SrModelSummary summary = compare_sr_models(records);
  for (SrArch arch : {SrArch::srresnet, SrArch::srgan}) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : records)
      if (r.sr_model == arch) {
        sum += r.rel_delta_pct;
        ++n;
      }
    CHECK(summary.mean_rel_improvement.at(arch) == doctest::Approx(sum / n).epsilon(1e-12));
  }

  std::vector<SRImprovementRecord> only_resnet;
  for (const auto& r : records)
    if (r.sr_model == SrArch::srresnet) only_resnet.push_back(r);
  CHECK_THROWS_AS(compare_sr_models(only_resnet), std::invalid_argument);

  // Duplicating the record set leaves the means unchanged.
  std::vector<SRImprovementRecord> doubled = records;
  doubled.insert(doubled.end(), records.begin(), records.end());
  const SrModelSummary dup = compare_sr_models(doubled);
  CHECK(dup.mean_rel_improvement.at(SrArch::srgan) ==
        doctest::Approx(summary.mean_rel_improvement.at(SrArch::srgan)).epsilon(1e-12));
}

TEST_CASE("results file round-trips byte-identically") {
  auto& f = fixture();
  RunResults results;
  results.matrices.push_back(run_cross_quality(f.ds, Task::view, tiny_cfg(), {11}));
  results.records = run_sr_test_experiment(f.ds, Task::view, f.sr_models, tiny_cfg(), {11});
  results.dataset_info = {{"provenance", to_string(f.ds.provenance)},
                          {"n_frames", f.ds.size()},
                          {"checksum", dataset_checksum(f.ds)}};
  results.classifier_config = tiny_cfg().to_json();
  results.seeds = {11};
  results.notes = {"unit-test run"};

  const std::string once = results_to_json(results).dump(2);
  const nlohmann::json parsed = nlohmann::json::parse(once);
  CHECK(parsed.dump(2) == once);

  const RunResults back = results_from_json(parsed);
  REQUIRE(back.records.size() == results.records.size());
  for (std::size_t i = 0; i < results.records.size(); ++i) {
    CHECK(back.records[i].baseline_acc == results.records[i].baseline_acc);
    CHECK(back.records[i].rel_delta_pct == results.records[i].rel_delta_pct);
    CHECK(back.records[i].sr_model == results.records[i].sr_model);
  }
  CHECK(results_to_json(back).dump(2) == once);
}

TEST_CASE("report emission produces the documented artifacts deterministically") {
  auto& f = fixture();
  RunResults results;
  results.matrices.push_back(run_cross_quality(f.ds, Task::view, tiny_cfg(), {11}));
  results.records = run_sr_test_experiment(f.ds, Task::view, f.sr_models, tiny_cfg(), {11});
  results.classifier_config = tiny_cfg().to_json();
  results.seeds = {11};

  const auto dir = std::filesystem::temp_directory_path() / "echosr_test_report";
  std::filesystem::remove_all(dir);
  generate_report(results, dir);
  CHECK(std::filesystem::exists(dir / "results.json"));
  CHECK(std::filesystem::exists(dir / "matrix_view.csv"));
  CHECK(std::filesystem::exists(dir / "panel_view_test_on_sr.pgm"));
  CHECK(std::filesystem::exists(dir / "panel_view_test_on_sr.txt"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(!std::filesystem::exists(dir / "panel_view_train_on_sr.pgm"));

  const std::string csv = slurp(dir / "matrix_view.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "train_quality,test_good,test_medium,test_poor");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);

  const std::string json_a = slurp(dir / "results.json");
  const std::string pgm_a = slurp(dir / "panel_view_test_on_sr.pgm");
  const auto dir2 = std::filesystem::temp_directory_path() / "echosr_test_report2";
  std::filesystem::remove_all(dir2);
  generate_report(results, dir2);
  CHECK(slurp(dir2 / "results.json") == json_a);
  CHECK(slurp(dir2 / "panel_view_test_on_sr.pgm") == pgm_a);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("experiments reject empty tiers and missing seeds") {
  auto& f = fixture();
  EchoDataset no_poor;
  no_poor.provenance = Provenance::synthetic;
  for (const auto& fr : f.ds.frames)
    if (fr.quality != Quality::poor) no_poor.frames.push_back(fr);
  CHECK_THROWS_AS(run_cross_quality(no_poor, Task::view, tiny_cfg(), {1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_cross_quality(f.ds, Task::view, tiny_cfg(), {}), std::invalid_argument);
  CHECK_THROWS_AS(run_sr_train_experiment(f.ds, Task::view, {}, tiny_cfg(), {1}),
                  std::invalid_argument);
}

TEST_CASE("sr arch and mode tokens parse both spellings") {
  CHECK(parse_sr_arch("SRResNet") == SrArch::srresnet);
  CHECK(parse_sr_arch("srgan") == SrArch::srgan);
  CHECK(parse_sr_mode("train-on-sr") == SrMode::train_on_sr);
  CHECK(parse_sr_mode("TEST_ON_SR") == SrMode::test_on_sr);
  CHECK_THROWS_AS(parse_sr_arch("espcn"), std::invalid_argument);
}
