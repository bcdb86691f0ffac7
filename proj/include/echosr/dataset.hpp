#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "echosr/image.hpp"

namespace echosr {

enum class View { ch2, ch4 };
enum class Phase { ed, es };
enum class Quality { good, medium, poor };
enum class Task { view, phase };
enum class Provenance { camus, manifest, synthetic };

std::string to_string(View v);       // "2CH" / "4CH"
std::string to_string(Phase p);      // "ED" / "ES"
std::string to_string(Quality q);    // "Good" / "Medium" / "Poor"
std::string to_string(Task t);       // "view" / "phase"
std::string to_string(Provenance p);

// Case-insensitive parsers; throw std::invalid_argument on unknown tokens.
View parse_view(const std::string& s);
Phase parse_phase(const std::string& s);
Quality parse_quality(const std::string& s);
Task parse_task(const std::string& s);

inline constexpr Quality kQualities[3] = {Quality::good, Quality::medium, Quality::poor};

/// One 2D grayscale frame plus its clinical metadata.
struct EchoFrame {
  std::string patient_id;
  View view = View::ch2;
  Phase phase = Phase::ed;
  Quality quality = Quality::good;
  ImagePtr image;
  std::string source_path;

  const Image& img() const { return *image; }

  /// Binary class index for a task: view -> {2CH:0, 4CH:1},
  /// phase -> {ED:0, ES:1}.
  int label(Task t) const {
    return t == Task::view ? static_cast<int>(view) : static_cast<int>(phase);
  }

  std::string id() const {
    return patient_id + "_" + to_string(view) + "_" + to_string(phase);
  }
};

struct EchoDataset {
  std::vector<EchoFrame> frames;
  Provenance provenance = Provenance::synthetic;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

/// Validates the dataset invariants (nonempty, unique (patient, view,
/// phase), frame image contracts) and returns the dataset.
EchoDataset make_dataset(std::vector<EchoFrame> frames, Provenance prov);

/// Filename patterns for a CAMUS-style directory tree. `{patient}`,
/// `{view}` and `{phase}` are substituted; view renders as 2CH/4CH and
/// phase as ED/ES.
struct CamusLayout {
  std::string image_pattern = "{patient}_{view}_{phase}.mhd";
  std::string info_pattern = "Info_{view}.cfg";
};

/// Ingests a CAMUS release tree: one subdirectory per patient, per-view
/// info files carrying an ImageQuality key, per-view ED/ES images.
/// Patients with missing or unparseable info files are skipped with a
/// warning on stderr; ingesting zero frames is a hard error.
EchoDataset load_camus(const std::filesystem::path& root, const CamusLayout& layout = {});

/// Loads a CSV manifest with header
/// `patient_id,view,phase,quality,image_path`. Image paths are resolved
/// relative to the manifest's directory.
EchoDataset load_manifest(const std::filesystem::path& manifest_path);

/// Deterministic desk-scale phantom: sector mask, dark chambers (2 for
/// 2CH, 4 for 4CH), speckle and blur controlled by the quality tier
/// (poor strongest). Emits 4 frames per patient; quality is assigned per
/// patient round-robin Good/Medium/Poor.
EchoDataset synthesize_dataset(int n_patients, int image_size, std::uint64_t seed);

/// Phantom chamber geometry, exposed so tests can check anatomy (e.g. the
/// ED/ES ventricle area ratio) without reverse-engineering pixels.
struct PhantomEllipse {
  double cy, cx;  // center, fraction of image size
  double ry, rx;  // semi-axes, fraction of image size
  double intensity;
};
std::vector<PhantomEllipse> phantom_chambers(std::uint64_t patient_seed, View view,
                                             Phase phase);

/// Three disjoint subsets covering the input exactly. Empty tiers are
/// returned as empty datasets.
std::map<Quality, EchoDataset> stratify_by_quality(const EchoDataset& ds);

struct TrainTestSplit {
  Task task;
  std::vector<EchoFrame> train;
  std::vector<EchoFrame> test;
  std::uint64_t seed = 0;
};

/// The balanced candidate pool for one (task, quality) cell: every
/// (view, phase) cell is capped at the poor-tier count of the same cell,
/// sampling per cell with the given seed. Frames are ordered
/// deterministically (class, then patient id).
std::vector<EchoFrame> capped_class_pool(const EchoDataset& ds, Task task, Quality quality,
                                         std::uint64_t seed);

/// Builds the 80/20 split over the capped pool: within each class, frames
/// are shuffled with the seed and floor(0.8 * class size) go to train,
/// the remainder to test. With `patient_level` set, whole patients are
/// assigned to one side (train fraction then at most the floor).
TrainTestSplit build_classification_split(const EchoDataset& ds, Task task, Quality quality,
                                          std::uint64_t seed, bool patient_level = false);

/// Counts per (view, phase, quality), for distribution tables.
struct DistributionTable {
  // [view][phase][quality]
  long counts[2][2][3] = {};
  long total() const;
  long tier_total(Quality q) const;
};
DistributionTable distribution_table(const EchoDataset& ds);
std::string format_distribution(const DistributionTable& table);

/// Dataset bundle on disk: manifest.csv + 16-bit PGM images + bundle.json
/// with provenance. save_bundle / load_bundle round-trip a dataset up to
/// 16-bit quantization.
void save_bundle(const EchoDataset& ds, const std::filesystem::path& dir);
EchoDataset load_bundle(const std::filesystem::path& dir);

/// FNV-1a digest over frame metadata and pixels; identifies a dataset in
/// run manifests.
std::string dataset_checksum(const EchoDataset& ds);

}  // namespace echosr
