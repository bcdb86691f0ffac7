#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "echosr/dataset.hpp"

using namespace echosr;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return ECHOSR_CLI_PATH; }

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / "echosr_cli_streams";
  fs::create_directories(dir);
  const auto out_file = dir / ("out" + std::to_string(counter));
  const auto err_file = dir / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(cli_path()) + " " + args + " >" + out_file.string() +
                          " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ingest without a source exits 2 with usage text") {
  const RunResult r = run_cli("ingest");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("synthetic ingest prints the distribution and writes a bundle") {
  const auto out = fresh("echosr_cli_bundle");
  const RunResult r =
      run_cli("--seed 1 --out " + out.string() + " ingest --synthetic --patients 6");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("Ingested 24 frames") != std::string::npos);
  CHECK(r.out.find("View  Phase") != std::string::npos);
  CHECK(fs::exists(out / "manifest.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const EchoDataset ds = load_bundle(out);
  CHECK(ds.size() == 24);
  CHECK(ds.provenance == Provenance::synthetic);

  // Refuses to clobber without --overwrite.
  const RunResult again =
      run_cli("--seed 1 --out " + out.string() + " ingest --synthetic --patients 6");
  CHECK(again.exit_code == 2);
}

TEST_CASE("train-sr without a pairs directory exits 2") {
  const RunResult r = run_cli("train-sr --arch srgan --out /tmp/echosr_nowhere");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("--pairs") != std::string::npos);
}

TEST_CASE("experiment in an SR mode without a model exits 2 naming the artifact") {
  const auto out = fresh("echosr_cli_noexp");
  const RunResult r = run_cli("--out " + out.string() +
                              " experiment --task phase --mode test-on-sr --synthetic");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("SR model") != std::string::npos);
}

TEST_CASE("pipeline end-to-end: pairs, SR training, experiment, report") {
  const auto bundle = fresh("echosr_cli_e2e_bundle");
  REQUIRE(run_cli("--seed 3 --out " + bundle.string() +
                  " ingest --synthetic --patients 8")
              .exit_code == 0);

  const auto pairs = fresh("echosr_cli_e2e_pairs");
  REQUIRE(run_cli("--out " + pairs.string() + " make-pairs --dataset " + bundle.string() +
                  " --tier good --scale 4")
              .exit_code == 0);
  CHECK(fs::exists(pairs / "pairs.csv"));

  const auto model = fresh("echosr_cli_e2e_model");
  const std::string train_args = "--seed 5 --out " + model.string() +
                                 " train-sr --arch srresnet --pairs " + pairs.string() +
                                 " --steps 25 --blocks 1 --channels 8 --lr 1e-3";
  const RunResult t1 = run_cli(train_args);
  REQUIRE(t1.exit_code == 0);
  CHECK(fs::exists(model / "model.esrm"));

  // Determinism: identical final-loss lines.
  const auto model2 = fresh("echosr_cli_e2e_model2");
  const RunResult t2 = run_cli("--seed 5 --out " + model2.string() +
                               " train-sr --arch srresnet --pairs " + pairs.string() +
                               " --steps 25 --blocks 1 --channels 8 --lr 1e-3");
  REQUIRE(t2.exit_code == 0);
  const auto line_of = [](const std::string& s) {
    const auto pos = s.find("final pixel MSE");
    return s.substr(pos, s.find('\n', pos) - pos);
  };
  CHECK(line_of(t1.out) == line_of(t2.out));

  // Enhance the poor tier with the trained model.
  const auto enhanced = fresh("echosr_cli_e2e_enhanced");
  const RunResult e = run_cli("--out " + enhanced.string() + " enhance --model " +
                              (model / "model.esrm").string() + " --dataset " +
                              bundle.string() + " --tier poor");
  REQUIRE(e.exit_code == 0);
  const EchoDataset enh = load_bundle(enhanced);
  const EchoDataset src = load_bundle(bundle);
  long poor = 0;
  for (const auto& f : src.frames)
    if (f.quality == Quality::poor) ++poor;
  CHECK(static_cast<long>(enh.size()) == poor);
  CHECK(enh.frames[0].img().height == 256);

  // Tiny experiment over both SR modes with one model.
  const auto exp1 = fresh("echosr_cli_e2e_exp1");
  const std::string exp_args =
      " experiment --task view --mode all --dataset " + bundle.string() +
      " --srresnet-model " + (model / "model.esrm").string() +
      " --seeds 1 --input-size 32 --width 0.125 --epochs 2 --lr 1e-3 --batch 8";
  REQUIRE(run_cli("--out " + exp1.string() + exp_args).exit_code == 0);
  CHECK(fs::exists(exp1 / "results.json"));
  CHECK(fs::exists(exp1 / "matrix_view.csv"));
  CHECK(fs::exists(exp1 / "panel_view_train_on_sr.pgm"));
  CHECK(fs::exists(exp1 / "panel_view_test_on_sr.pgm"));

  // Identical rerun (idempotence under --overwrite).
  const RunResult rerun = run_cli("--out " + exp1.string() + " --overwrite" + exp_args);
  REQUIRE(rerun.exit_code == 0);
  const std::string results_a = slurp_file(exp1 / "results.json");

  const auto exp2 = fresh("echosr_cli_e2e_exp2");
  REQUIRE(run_cli("--out " + exp2.string() + exp_args).exit_code == 0);
  CHECK(slurp_file(exp2 / "results.json") == results_a);

  // Report regeneration from the results file alone.
  const auto rep = fresh("echosr_cli_e2e_report");
  REQUIRE(run_cli("--out " + rep.string() + " report " +
                  (exp1 / "results.json").string())
              .exit_code == 0);
  CHECK(slurp_file(rep / "matrix_view.csv") == slurp_file(exp1 / "matrix_view.csv"));
  CHECK(slurp_file(rep / "panel_view_test_on_sr.pgm") ==
        slurp_file(exp1 / "panel_view_test_on_sr.pgm"));

  for (const auto& d : {bundle, pairs, model, model2, enhanced, exp1, exp2, rep})
    fs::remove_all(d);
}
