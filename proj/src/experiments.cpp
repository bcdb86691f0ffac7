#include "echosr/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "echosr/image_io.hpp"
#include "echosr/metrics.hpp"
#include "echosr/sr_models.hpp"
#include "echosr/version.hpp"

namespace echosr {

std::string to_string(SrArch a) { return a == SrArch::srresnet ? "SRRESNET" : "SRGAN"; }
std::string to_string(SrMode m) { return m == SrMode::train_on_sr ? "TRAIN_ON_SR" : "TEST_ON_SR"; }

SrArch parse_sr_arch(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "srresnet") return SrArch::srresnet;
  if (t == "srgan") return SrArch::srgan;
  throw std::invalid_argument("unknown SR architecture '" + s + "'");
}

SrMode parse_sr_mode(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "train_on_sr" || t == "train-on-sr") return SrMode::train_on_sr;
  if (t == "test_on_sr" || t == "test-on-sr") return SrMode::test_on_sr;
  throw std::invalid_argument("unknown SR mode '" + s + "'");
}

namespace {

int qidx(Quality q) { return static_cast<int>(q); }

void require_tiers(const std::map<Quality, EchoDataset>& strat) {
  for (Quality q : kQualities)
    if (strat.at(q).empty())
      throw std::invalid_argument("experiment requires all quality tiers nonempty; tier " +
                                  to_string(q) + " is empty");
}

struct SeedStats {
  std::vector<double> values;
  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double stdev() const {
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size()));
  }
};

// Trains one classifier per seed on the tier's split and returns
// (params, held-out test frames, checksum) triples.
struct SeedRun {
  ModelParams params;
  std::vector<EchoFrame> test_frames;
  std::string checksum;
};

std::vector<SeedRun> train_per_seed(const EchoDataset& ds, Task task, Quality tier,
                                    const ClassifierConfig& cfg,
                                    const std::vector<std::uint64_t>& seeds) {
  std::vector<SeedRun> runs;
  runs.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    const TrainTestSplit split = build_classification_split(ds, task, tier, seed);
    ClassifierConfig run_cfg = cfg;
    run_cfg.seed = seed;
    auto [params, hist] = train_classifier(split, run_cfg);
    runs.push_back({std::move(params), split.test, ""});
    runs.back().checksum = params_checksum(runs.back().params);
  }
  return runs;
}

std::string join_checksums(const std::vector<SeedRun>& runs) {
  std::string out;
  for (const auto& r : runs) {
    if (!out.empty()) out += ",";
    out += r.checksum;
  }
  return out;
}

SRImprovementRecord make_record(Task task, SrMode mode, SrArch arch, Quality counterpart,
                                double baseline, double enhanced,
                                const std::string& base_sum, const std::string& enh_sum) {
  SRImprovementRecord rec;
  rec.task = task;
  rec.mode = mode;
  rec.sr_model = arch;
  rec.counterpart_quality = counterpart;
  rec.baseline_acc = baseline;
  rec.enhanced_acc = enhanced;
  rec.abs_delta_pp = (enhanced - baseline) * 100.0;
  rec.rel_delta_pct = relative_improvement(baseline, enhanced);
  rec.baseline_checksum = base_sum;
  rec.enhanced_checksum = enh_sum;
  return rec;
}

// ds with its poor tier replaced by the enhanced frames; metadata is
// untouched, so capping and split membership stay aligned with the
// baseline protocol.
EchoDataset with_enhanced_poor(const EchoDataset& ds, const EchoDataset& enhanced_poor) {
  std::vector<EchoFrame> frames;
  frames.reserve(ds.size());
  for (const auto& f : ds.frames)
    if (f.quality != Quality::poor) frames.push_back(f);
  for (const auto& f : enhanced_poor.frames) frames.push_back(f);
  return make_dataset(std::move(frames), ds.provenance);
}

}  // namespace

EvalMatrix run_cross_quality(const EchoDataset& ds, Task task, const ClassifierConfig& cfg,
                             const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_cross_quality: no seeds");
  require_tiers(stratify_by_quality(ds));

  EvalMatrix m;
  m.task = task;
  m.seeds = seeds;
  m.config = cfg.to_json();

  for (Quality train_q : kQualities) {
    SeedStats stats[3];
    for (std::uint64_t seed : seeds) {
      const TrainTestSplit split = build_classification_split(ds, task, train_q, seed);
      ClassifierConfig run_cfg = cfg;
      run_cfg.seed = seed;
      auto [params, hist] = train_classifier(split, run_cfg);
      for (Quality test_q : kQualities) {
        const std::vector<EchoFrame> frames =
            test_q == train_q ? split.test : capped_class_pool(ds, task, test_q, seed);
        stats[qidx(test_q)].values.push_back(
            evaluate_classifier(params, frames, task).accuracy);
      }
    }
    for (Quality test_q : kQualities) {
      m.cells[qidx(train_q)][qidx(test_q)] = stats[qidx(test_q)].mean();
      m.stds[qidx(train_q)][qidx(test_q)] = stats[qidx(test_q)].stdev();
    }
  }
  return m;
}

std::vector<SRImprovementRecord> run_sr_train_experiment(const EchoDataset& ds, Task task,
                                                         const SrModelList& sr_models,
                                                         const ClassifierConfig& cfg,
                                                         const std::vector<std::uint64_t>& seeds) {
  if (sr_models.empty()) throw std::invalid_argument("run_sr_train_experiment: no SR models");
  if (seeds.empty()) throw std::invalid_argument("run_sr_train_experiment: no seeds");
  const auto strat = stratify_by_quality(ds);
  require_tiers(strat);

  // Baseline: the train-on-poor protocol.
  const auto baseline_runs = train_per_seed(ds, task, Quality::poor, cfg, seeds);
  SeedStats baseline[3];
  for (std::size_t si = 0; si < seeds.size(); ++si)
    for (Quality test_q : kQualities) {
      const std::vector<EchoFrame> frames = test_q == Quality::poor
                                                ? baseline_runs[si].test_frames
                                                : capped_class_pool(ds, task, test_q, seeds[si]);
      baseline[qidx(test_q)].values.push_back(
          evaluate_classifier(baseline_runs[si].params, frames, task).accuracy);
    }
  const std::string base_sum = join_checksums(baseline_runs);

  std::vector<SRImprovementRecord> records;
  for (const auto& [arch, sr_params] : sr_models) {
    const EchoDataset enhanced_poor = enhance_subset(strat.at(Quality::poor), sr_params);
    const EchoDataset ds_enh = with_enhanced_poor(ds, enhanced_poor);
    const auto enhanced_runs = train_per_seed(ds_enh, task, Quality::poor, cfg, seeds);
    SeedStats enhanced[3];
    for (std::size_t si = 0; si < seeds.size(); ++si)
      for (Quality test_q : kQualities) {
        const std::vector<EchoFrame> frames =
            test_q == Quality::poor ? enhanced_runs[si].test_frames
                                    : capped_class_pool(ds_enh, task, test_q, seeds[si]);
        enhanced[qidx(test_q)].values.push_back(
            evaluate_classifier(enhanced_runs[si].params, frames, task).accuracy);
      }
    for (Quality test_q : kQualities)
      records.push_back(make_record(task, SrMode::train_on_sr, arch, test_q,
                                    baseline[qidx(test_q)].mean(), enhanced[qidx(test_q)].mean(),
                                    base_sum, join_checksums(enhanced_runs)));
  }
  return records;
}

std::vector<SRImprovementRecord> run_sr_test_experiment(const EchoDataset& ds, Task task,
                                                        const SrModelList& sr_models,
                                                        const ClassifierConfig& cfg,
                                                        const std::vector<std::uint64_t>& seeds) {
  if (sr_models.empty()) throw std::invalid_argument("run_sr_test_experiment: no SR models");
  if (seeds.empty()) throw std::invalid_argument("run_sr_test_experiment: no seeds");
  const auto strat = stratify_by_quality(ds);
  require_tiers(strat);

  std::vector<SRImprovementRecord> records;
  for (Quality train_q : {Quality::good, Quality::medium}) {
    const auto runs = train_per_seed(ds, task, train_q, cfg, seeds);
    const std::string checksum = join_checksums(runs);

    SeedStats baseline;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const auto pool = capped_class_pool(ds, task, Quality::poor, seeds[si]);
      baseline.values.push_back(evaluate_classifier(runs[si].params, pool, task).accuracy);
    }

    for (const auto& [arch, sr_params] : sr_models) {
      const EchoDataset enhanced_poor = enhance_subset(strat.at(Quality::poor), sr_params);
      const EchoDataset ds_enh = with_enhanced_poor(ds, enhanced_poor);
      SeedStats enhanced;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const auto pool = capped_class_pool(ds_enh, task, Quality::poor, seeds[si]);
        enhanced.values.push_back(evaluate_classifier(runs[si].params, pool, task).accuracy);
      }
      records.push_back(make_record(task, SrMode::test_on_sr, arch, train_q, baseline.mean(),
                                    enhanced.mean(), checksum, checksum));
    }
  }
  return records;
}

SrModelSummary compare_sr_models(const std::vector<SRImprovementRecord>& records) {
  SrModelSummary summary;
  std::map<SrArch, SeedStats> overall;
  std::map<SrArch, std::map<Task, SeedStats>> per_task;
  for (const auto& r : records) {
    overall[r.sr_model].values.push_back(r.rel_delta_pct);
    per_task[r.sr_model][r.task].values.push_back(r.rel_delta_pct);
  }
  for (SrArch a : {SrArch::srresnet, SrArch::srgan})
    if (!overall.count(a))
      throw std::invalid_argument("compare_sr_models: no records for " + to_string(a));
  for (auto& [arch, stats] : overall) summary.mean_rel_improvement[arch] = stats.mean();
  for (auto& [arch, tasks] : per_task)
    for (auto& [task, stats] : tasks) summary.per_task[arch][task] = stats.mean();
  return summary;
}

// ---------------------------------------------------------------------------
// Results serialization
// ---------------------------------------------------------------------------

namespace {

const char* quality_key(Quality q) {
  switch (q) {
    case Quality::good: return "good";
    case Quality::medium: return "medium";
    default: return "poor";
  }
}

nlohmann::json matrix_to_json(const EvalMatrix& m) {
  nlohmann::json cells = nlohmann::json::object();
  nlohmann::json stds = nlohmann::json::object();
  for (Quality tr : kQualities) {
    nlohmann::json row = nlohmann::json::object();
    nlohmann::json row_std = nlohmann::json::object();
    for (Quality te : kQualities) {
      row[quality_key(te)] = m.cells[qidx(tr)][qidx(te)];
      row_std[quality_key(te)] = m.stds[qidx(tr)][qidx(te)];
    }
    cells[quality_key(tr)] = row;
    stds[quality_key(tr)] = row_std;
  }
  return {{"task", to_string(m.task)},
          {"cells", cells},
          {"stds", stds},
          {"seeds", m.seeds},
          {"config", m.config}};
}

EvalMatrix matrix_from_json(const nlohmann::json& j) {
  EvalMatrix m;
  m.task = parse_task(j.at("task"));
  for (Quality tr : kQualities)
    for (Quality te : kQualities) {
      m.cells[qidx(tr)][qidx(te)] = j.at("cells").at(quality_key(tr)).at(quality_key(te));
      m.stds[qidx(tr)][qidx(te)] = j.at("stds").at(quality_key(tr)).at(quality_key(te));
    }
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.config = j.value("config", nlohmann::json::object());
  return m;
}

nlohmann::json record_to_json(const SRImprovementRecord& r) {
  return {{"task", to_string(r.task)},
          {"mode", to_string(r.mode)},
          {"sr_model", to_string(r.sr_model)},
          {"counterpart_quality", to_string(r.counterpart_quality)},
          {"baseline_acc", r.baseline_acc},
          {"enhanced_acc", r.enhanced_acc},
          {"abs_delta_pp", r.abs_delta_pp},
          {"rel_delta_pct", r.rel_delta_pct},
          {"baseline_checksum", r.baseline_checksum},
          {"enhanced_checksum", r.enhanced_checksum}};
}

SRImprovementRecord record_from_json(const nlohmann::json& j) {
  SRImprovementRecord r;
  r.task = parse_task(j.at("task"));
  r.mode = parse_sr_mode(j.at("mode"));
  r.sr_model = parse_sr_arch(j.at("sr_model"));
  r.counterpart_quality = parse_quality(j.at("counterpart_quality"));
  r.baseline_acc = j.at("baseline_acc");
  r.enhanced_acc = j.at("enhanced_acc");
  r.abs_delta_pp = j.at("abs_delta_pp");
  r.rel_delta_pct = j.at("rel_delta_pct");
  r.baseline_checksum = j.value("baseline_checksum", "");
  r.enhanced_checksum = j.value("enhanced_checksum", "");
  return r;
}

}  // namespace

nlohmann::json results_to_json(const RunResults& results) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["library_version"] = kVersion;
  j["dataset"] = results.dataset_info;
  j["classifier_config"] = results.classifier_config;
  j["seeds"] = results.seeds;
  j["notes"] = results.notes;
  j["matrices"] = nlohmann::json::array();
  for (const auto& m : results.matrices) j["matrices"].push_back(matrix_to_json(m));
  j["sr_records"] = nlohmann::json::array();
  for (const auto& r : results.records) j["sr_records"].push_back(record_to_json(r));
  // Per-architecture summary when both architectures are present.
  bool has[2] = {false, false};
  for (const auto& r : results.records) has[static_cast<int>(r.sr_model)] = true;
  if (has[0] && has[1]) {
    const SrModelSummary s = compare_sr_models(results.records);
    nlohmann::json sj = nlohmann::json::object();
    for (const auto& [arch, v] : s.mean_rel_improvement) {
      nlohmann::json tj = nlohmann::json::object();
      for (const auto& [task, tv] : s.per_task.at(arch)) tj[to_string(task)] = tv;
      sj[to_string(arch)] = {{"mean_rel_improvement_pct", v}, {"per_task", tj}};
    }
    j["sr_model_summary"] = sj;
  }
  return j;
}

RunResults results_from_json(const nlohmann::json& j) {
  RunResults r;
  r.dataset_info = j.value("dataset", nlohmann::json::object());
  r.classifier_config = j.value("classifier_config", nlohmann::json::object());
  r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  r.notes = j.value("notes", std::vector<std::string>{});
  for (const auto& m : j.value("matrices", nlohmann::json::array()))
    r.matrices.push_back(matrix_from_json(m));
  for (const auto& rec : j.value("sr_records", nlohmann::json::array()))
    r.records.push_back(record_from_json(rec));
  return r;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

void write_matrix_csv(const EvalMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "train_quality,test_good,test_medium,test_poor\n";
  for (Quality tr : kQualities) {
    out << quality_key(tr);
    for (Quality te : kQualities) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.6f", m.cells[qidx(tr)][qidx(te)]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Grouped bar chart: one group per counterpart tier, one bar per SR
// architecture (SRResNet dark, SRGAN light). Values are relative percent
// improvements around a zero baseline.
Image render_improvement_panel(const std::vector<SRImprovementRecord>& records) {
  const int width = 420, height = 300;
  const int margin_l = 40, margin_r = 16, margin_t = 20, margin_b = 30;
  Image img(height, width, 1.0);

  double max_abs = 1.0;
  for (const auto& r : records) max_abs = std::max(max_abs, std::fabs(r.rel_delta_pct));
  max_abs *= 1.15;

  const int plot_w = width - margin_l - margin_r;
  const int plot_h = height - margin_t - margin_b;
  const int zero_y = margin_t + plot_h / 2;
  auto value_to_y = [&](double v) {
    return zero_y - static_cast<int>(std::lround(v / max_abs * (plot_h / 2.0)));
  };

  auto hline = [&](int y, int x0, int x1, double shade) {
    if (y < 0 || y >= height) return;
    for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x) img.at(y, x) = shade;
  };
  auto vline = [&](int x, int y0, int y1, double shade) {
    if (x < 0 || x >= width) return;
    for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y) img.at(y, x) = shade;
  };

  // Axes: left spine, zero baseline, quarter gridlines.
  vline(margin_l, margin_t, height - margin_b, 0.0);
  hline(zero_y, margin_l, width - margin_r, 0.0);
  for (int q = -2; q <= 2; ++q) {
    if (q == 0) continue;
    hline(value_to_y(max_abs * q / 2.0), margin_l - 3, margin_l, 0.0);
  }

  // One group per tier in Good/Medium/Poor order; bars ordered SRResNet,
  // SRGAN inside each group.
  std::vector<std::pair<Quality, SrArch>> order;
  for (Quality q : kQualities)
    for (SrArch a : {SrArch::srresnet, SrArch::srgan})
      for (const auto& r : records)
        if (r.counterpart_quality == q && r.sr_model == a) order.push_back({q, a});

  const int n_groups = 3;
  const int group_w = plot_w / n_groups;
  int gi = 0;
  Quality last_q = order.empty() ? Quality::good : order.front().first;
  int bar_in_group = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [q, a] = order[i];
    if (q != last_q) {
      ++gi;
      bar_in_group = 0;
      last_q = q;
    }
    const SRImprovementRecord* rec = nullptr;
    for (const auto& r : records)
      if (r.counterpart_quality == q && r.sr_model == a) rec = &r;
    if (!rec) continue;
    const int bars_here = 2;
    const int bar_w = std::max(6, group_w / (bars_here + 2));
    const int x0 = margin_l + gi * group_w + (bar_in_group + 1) * bar_w / 1 - bar_w / 2 +
                   group_w / 2 - bars_here * bar_w / 2;
    const double shade = a == SrArch::srresnet ? 0.25 : 0.6;
    const int y_val = value_to_y(rec->rel_delta_pct);
    const int y_top = std::min(zero_y, y_val);
    const int y_bot = std::max(zero_y, y_val);
    for (int x = x0; x < x0 + bar_w; ++x) vline(x, y_top, y_bot, shade);
    ++bar_in_group;
  }
  // Group separators along the baseline.
  for (int g = 1; g < n_groups; ++g)
    vline(margin_l + g * group_w, height - margin_b, height - margin_b + 4, 0.0);
  return img;
}

std::string panel_stub(Task task, SrMode mode) {
  std::string t = to_string(task);
  std::string m = mode == SrMode::train_on_sr ? "train_on_sr" : "test_on_sr";
  return "panel_" + t + "_" + m;
}

}  // namespace

void generate_report(const RunResults& results, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream out(out_dir / "results.json");
    if (!out) throw std::runtime_error("cannot write results.json in " + out_dir.string());
    out << results_to_json(results).dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: results.json");
  }

  for (const auto& m : results.matrices)
    write_matrix_csv(m, out_dir / ("matrix_" + to_string(m.task) + ".csv"));

  // One panel per (task, mode) combination present in the records.
  for (Task task : {Task::view, Task::phase})
    for (SrMode mode : {SrMode::train_on_sr, SrMode::test_on_sr}) {
      std::vector<SRImprovementRecord> panel;
      for (const auto& r : results.records)
        if (r.task == task && r.mode == mode) panel.push_back(r);
      if (panel.empty()) continue;
      const std::string stub = panel_stub(task, mode);
      write_pgm8(out_dir / (stub + ".pgm"), render_improvement_panel(panel));
      std::ofstream legend(out_dir / (stub + ".txt"));
      legend << "Bars left to right: counterpart tier Good, Medium, Poor; within each "
                "group SRResNet (dark), SRGAN (light). Values are relative percent "
                "improvement over the baseline.\n";
      for (const auto& r : panel) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%s %s %s tier=%s baseline=%.6f enhanced=%.6f abs=%+.3fpp rel=%+.3f%%\n",
                      to_string(r.task).c_str(), to_string(r.mode).c_str(),
                      to_string(r.sr_model).c_str(), to_string(r.counterpart_quality).c_str(),
                      r.baseline_acc, r.enhanced_acc, r.abs_delta_pp, r.rel_delta_pct);
        legend << buf;
      }
    }

  {
    nlohmann::json manifest;
    manifest["library_version"] = kVersion;
    manifest["dataset"] = results.dataset_info;
    manifest["classifier_config"] = results.classifier_config;
    manifest["seeds"] = results.seeds;
    manifest["notes"] = results.notes;
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

}  // namespace echosr
