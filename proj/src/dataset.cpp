#include "echosr/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "echosr/image_io.hpp"
#include "echosr/rng.hpp"

namespace echosr {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(View v) { return v == View::ch2 ? "2CH" : "4CH"; }
std::string to_string(Phase p) { return p == Phase::ed ? "ED" : "ES"; }
std::string to_string(Quality q) {
  switch (q) {
    case Quality::good: return "Good";
    case Quality::medium: return "Medium";
    default: return "Poor";
  }
}
std::string to_string(Task t) { return t == Task::view ? "view" : "phase"; }
std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::camus: return "CAMUS";
    case Provenance::manifest: return "MANIFEST";
    default: return "SYNTHETIC";
  }
}

View parse_view(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "2ch" || t == "ch2") return View::ch2;
  if (t == "4ch" || t == "ch4") return View::ch4;
  throw std::invalid_argument("unknown view token '" + s + "'");
}

Phase parse_phase(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "ed") return Phase::ed;
  if (t == "es") return Phase::es;
  throw std::invalid_argument("unknown phase token '" + s + "'");
}

Quality parse_quality(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "good") return Quality::good;
  if (t == "medium") return Quality::medium;
  if (t == "poor") return Quality::poor;
  throw std::invalid_argument("unknown quality token '" + s + "'");
}

Task parse_task(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "view") return Task::view;
  if (t == "phase") return Task::phase;
  throw std::invalid_argument("unknown task token '" + s + "'");
}

EchoDataset make_dataset(std::vector<EchoFrame> frames, Provenance prov) {
  if (frames.empty()) throw std::invalid_argument("dataset: no frames ingested");
  std::set<std::string> seen;
  for (const auto& f : frames) {
    if (!f.image) throw std::invalid_argument("dataset: frame " + f.id() + " has no image");
    const Image& img = f.img();
    if (img.height < 32 || img.width < 32)
      throw std::invalid_argument("dataset: frame " + f.id() + " smaller than 32x32");
    if (!image_finite(img) || !image_in_unit_range(img))
      throw std::invalid_argument("dataset: frame " + f.id() + " has intensities outside [0,1]");
    if (!seen.insert(f.id()).second)
      throw std::invalid_argument("dataset: duplicate (patient, view, phase) " + f.id());
  }
  EchoDataset ds;
  ds.frames = std::move(frames);
  ds.provenance = prov;
  return ds;
}

// ---------------------------------------------------------------------------
// CAMUS ingestion
// ---------------------------------------------------------------------------

namespace {

std::string substitute(std::string pattern, const std::string& patient, View v,
                       Phase* ph) {
  auto replace_all = [](std::string& s, const std::string& key, const std::string& val) {
    std::size_t pos = 0;
    while ((pos = s.find(key, pos)) != std::string::npos) {
      s.replace(pos, key.size(), val);
      pos += val.size();
    }
  };
  replace_all(pattern, "{patient}", patient);
  replace_all(pattern, "{view}", to_string(v));
  if (ph) replace_all(pattern, "{phase}", to_string(*ph));
  return pattern;
}

// Parses `ImageQuality` from a key:value / key=value info file.
// Returns false if the key is missing or the value is not a known tier.
bool parse_info_quality(const std::filesystem::path& info_path, Quality& out) {
  std::ifstream in(info_path);
  if (!in) return false;
  std::string line;
  while (std::getline(in, line)) {
    auto sep = line.find(':');
    if (sep == std::string::npos) sep = line.find('=');
    if (sep == std::string::npos) continue;
    if (trim(line.substr(0, sep)) != "ImageQuality") continue;
    try {
      out = parse_quality(line.substr(sep + 1));
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
  return false;
}

}  // namespace

EchoDataset load_camus(const std::filesystem::path& root, const CamusLayout& layout) {
  if (!std::filesystem::is_directory(root))
    throw std::runtime_error("CAMUS root is not a directory: " + root.string());

  std::vector<std::filesystem::path> patient_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) patient_dirs.push_back(entry.path());
  std::sort(patient_dirs.begin(), patient_dirs.end());

  std::vector<EchoFrame> frames;
  long skipped = 0;
  for (const auto& dir : patient_dirs) {
    const std::string patient = dir.filename().string();
    bool patient_ok = true;
    std::vector<EchoFrame> patient_frames;
    for (View v : {View::ch2, View::ch4}) {
      const auto info_path = dir / substitute(layout.info_pattern, patient, v, nullptr);
      Quality q = Quality::good;
      if (!parse_info_quality(info_path, q)) {
        std::cerr << "warning: skipping " << patient << " (" << to_string(v)
                  << "): missing or unparseable " << info_path.filename().string() << "\n";
        patient_ok = false;
        break;
      }
      for (Phase ph : {Phase::ed, Phase::es}) {
        const auto img_path = dir / substitute(layout.image_pattern, patient, v, &ph);
        try {
          Image img = read_image(img_path);
          EchoFrame f;
          f.patient_id = patient;
          f.view = v;
          f.phase = ph;
          f.quality = q;
          f.source_path = img_path.string();
          f.image = share(std::move(img));
          patient_frames.push_back(std::move(f));
        } catch (const std::exception& e) {
          std::cerr << "warning: skipping " << patient << ": " << e.what() << "\n";
          patient_ok = false;
          break;
        }
      }
      if (!patient_ok) break;
    }
    if (patient_ok) {
      for (auto& f : patient_frames) frames.push_back(std::move(f));
    } else {
      ++skipped;
    }
  }
  std::cerr << "ingested " << frames.size() << " frames from "
            << (patient_dirs.size() - skipped) << " patients (" << skipped
            << " skipped)\n";
  if (frames.empty()) throw std::runtime_error("no frames ingested from " + root.string());
  return make_dataset(std::move(frames), Provenance::camus);
}

// ---------------------------------------------------------------------------
// Manifest ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

EchoDataset load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  const auto base = manifest_path.parent_path();

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("manifest is empty: " + manifest_path.string());
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"patient_id", "view", "phase", "quality",
                                             "image_path"};
  if (header.size() != expected.size() ||
      !std::equal(header.begin(), header.end(), expected.begin()))
    throw std::invalid_argument("manifest header must be patient_id,view,phase,quality,image_path");

  std::vector<EchoFrame> frames;
  long row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 5)
      throw std::invalid_argument("manifest row " + std::to_string(row_no) +
                                  ": expected 5 columns, got " + std::to_string(cols.size()));
    EchoFrame f;
    f.patient_id = cols[0];
    try {
      f.view = parse_view(cols[1]);
      f.phase = parse_phase(cols[2]);
      f.quality = parse_quality(cols[3]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("manifest row " + std::to_string(row_no) + " (" + line +
                                  "): " + e.what());
    }
    std::filesystem::path img_path = cols[4];
    if (img_path.is_relative()) img_path = base / img_path;
    Image img = read_image(img_path);  // unreadable image -> hard error
    f.source_path = img_path.string();
    f.image = share(std::move(img));
    frames.push_back(std::move(f));
  }
  if (frames.empty())
    throw std::invalid_argument("manifest has no data rows: " + manifest_path.string());
  return make_dataset(std::move(frames), Provenance::manifest);
}

// ---------------------------------------------------------------------------
// Synthetic phantom
// ---------------------------------------------------------------------------

std::vector<PhantomEllipse> phantom_chambers(std::uint64_t patient_seed, View view,
                                             Phase phase) {
  Rng rng(mix_seed(patient_seed, view == View::ch2 ? "anatomy2" : "anatomy4"));
  auto jitter = [&rng](double v, double amp) { return v + rng.uniform(-amp, amp); };

  std::vector<PhantomEllipse> chambers;
  if (view == View::ch2) {
    // Left ventricle + left atrium.
    chambers.push_back({jitter(0.42, 0.02), jitter(0.47, 0.02), jitter(0.23, 0.02),
                        jitter(0.13, 0.012), 0.08});
    chambers.push_back({jitter(0.72, 0.015), jitter(0.52, 0.02), jitter(0.10, 0.01),
                        jitter(0.09, 0.008), 0.10});
  } else {
    // LV, RV, LA, RA.
    chambers.push_back({jitter(0.40, 0.02), jitter(0.38, 0.02), jitter(0.20, 0.018),
                        jitter(0.11, 0.01), 0.08});
    chambers.push_back({jitter(0.38, 0.02), jitter(0.62, 0.02), jitter(0.17, 0.015),
                        jitter(0.09, 0.008), 0.09});
    chambers.push_back({jitter(0.70, 0.015), jitter(0.40, 0.015), jitter(0.09, 0.008),
                        jitter(0.08, 0.007), 0.10});
    chambers.push_back({jitter(0.68, 0.015), jitter(0.62, 0.015), jitter(0.09, 0.008),
                        jitter(0.075, 0.007), 0.10});
  }
  if (phase == Phase::es) {
    // Ventricles contract; ED/ES area ratio is 1.4 by construction.
    const double shrink = 1.0 / std::sqrt(1.4);
    const int n_ventricles = view == View::ch2 ? 1 : 2;
    for (int i = 0; i < n_ventricles; ++i) {
      chambers[i].ry *= shrink;
      chambers[i].rx *= shrink;
    }
  }
  return chambers;
}

namespace {

struct TierLook {
  double noise_sd;
  int blur_passes;  // 3x3 box blur passes over the structure
};

TierLook tier_look(Quality q) {
  switch (q) {
    case Quality::good: return {0.06, 0};
    case Quality::medium: return {0.13, 1};
    default: return {0.22, 3};
  }
}

void box_blur3(Image& img) {
  Image tmp = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      int cnt = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
          acc += tmp.at(yy, xx);
          ++cnt;
        }
      img.at(y, x) = acc / cnt;
    }
}

Image render_phantom(std::uint64_t frame_seed, std::uint64_t patient_view_seed, View view,
                     Phase phase, Quality quality, int size) {
  const auto chambers = phantom_chambers(patient_view_seed, view, phase);
  const TierLook look = tier_look(quality);

  // Sector geometry: apex near the top center, fan opening downward.
  const double apex_y = 0.04, apex_x = 0.5;
  const double half_angle = 0.66;  // radians from the vertical
  const double r_min = 0.05, r_max = 0.93;

  Image img(size, size);
  Image mask(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double fy = (y + 0.5) / size - apex_y;
      const double fx = (x + 0.5) / size - apex_x;
      const double r = std::sqrt(fy * fy + fx * fx);
      const double ang = std::atan2(std::fabs(fx), fy);  // 0 along the beam axis
      const bool inside = fy > 0.0 && ang <= half_angle && r >= r_min && r <= r_max;
      mask.at(y, x) = inside ? 1.0 : 0.0;
      if (!inside) {
        img.at(y, x) = 0.02;
        continue;
      }
      // Background with mild depth falloff.
      double v = 0.46 - 0.10 * r;
      for (const auto& ch : chambers) {
        const double dy = (y + 0.5) / size - ch.cy;
        const double dx = (x + 0.5) / size - ch.cx;
        const double rho = std::sqrt((dy / ch.ry) * (dy / ch.ry) + (dx / ch.rx) * (dx / ch.rx));
        if (rho < 1.15) {
          // Soft edge between chamber cavity and tissue.
          const double t = rho < 0.9 ? 0.0 : (rho - 0.9) / 0.25;
          v = ch.intensity + (v - ch.intensity) * std::min(1.0, t);
        }
      }
      img.at(y, x) = v;
    }

  for (int i = 0; i < look.blur_passes; ++i) box_blur3(img);

  Rng noise(frame_seed);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double n = noise.normal();
      if (mask.at(y, x) > 0.5)
        img.at(y, x) += look.noise_sd * n;
      else
        img.at(y, x) += 0.004 * std::fabs(n);
    }
  clamp01(img);
  return img;
}

}  // namespace

EchoDataset synthesize_dataset(int n_patients, int image_size, std::uint64_t seed) {
  if (n_patients < 1) throw std::invalid_argument("synthesize_dataset: n_patients must be >= 1");
  if (image_size < 64) throw std::invalid_argument("synthesize_dataset: image_size must be >= 64");

  std::vector<EchoFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_patients) * 4);
  for (int p = 0; p < n_patients; ++p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "synth%04d", p + 1);
    const std::string patient(buf);
    const Quality q = kQualities[p % 3];
    for (View v : {View::ch2, View::ch4}) {
      const std::uint64_t pv_seed = mix_seed(seed, patient + "/" + to_string(v));
      for (Phase ph : {Phase::ed, Phase::es}) {
        const std::uint64_t frame_seed =
            mix_seed(seed, patient + "/" + to_string(v) + "/" + to_string(ph));
        EchoFrame f;
        f.patient_id = patient;
        f.view = v;
        f.phase = ph;
        f.quality = q;
        f.source_path = "synthetic://" + patient + "/" + to_string(v) + "/" + to_string(ph);
        f.image = share(render_phantom(frame_seed, pv_seed, v, ph, q, image_size));
        frames.push_back(std::move(f));
      }
    }
  }
  return make_dataset(std::move(frames), Provenance::synthetic);
}

// ---------------------------------------------------------------------------
// Stratification and splits
// ---------------------------------------------------------------------------

std::map<Quality, EchoDataset> stratify_by_quality(const EchoDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("stratify_by_quality: empty dataset");
  std::map<Quality, EchoDataset> out;
  for (Quality q : kQualities) {
    out[q].frames.clear();
    out[q].provenance = ds.provenance;
  }
  for (const auto& f : ds.frames) out[f.quality].frames.push_back(f);
  return out;
}

namespace {

long cell_count(const EchoDataset& ds, Quality q, View v, Phase p) {
  long n = 0;
  for (const auto& f : ds.frames)
    if (f.quality == q && f.view == v && f.phase == p) ++n;
  return n;
}

}  // namespace

std::vector<EchoFrame> capped_class_pool(const EchoDataset& ds, Task task, Quality quality,
                                         std::uint64_t seed) {
  long poor_total = 0;
  for (const auto& f : ds.frames)
    if (f.quality == Quality::poor) ++poor_total;
  if (poor_total == 0)
    throw std::invalid_argument(
        "capped_class_pool: poor tier is empty; the balanced pools are capped by "
        "poor-tier cell counts");

  std::vector<EchoFrame> pool;
  // Cells are walked class-major so the pool lists class 0 then class 1.
  std::vector<std::pair<View, Phase>> cells;
  if (task == Task::view)
    cells = {{View::ch2, Phase::ed}, {View::ch2, Phase::es},
             {View::ch4, Phase::ed}, {View::ch4, Phase::es}};
  else
    cells = {{View::ch2, Phase::ed}, {View::ch4, Phase::ed},
             {View::ch2, Phase::es}, {View::ch4, Phase::es}};

  for (const auto& [v, p] : cells) {
    std::vector<EchoFrame> cell;
    for (const auto& f : ds.frames)
      if (f.quality == quality && f.view == v && f.phase == p) cell.push_back(f);
    std::sort(cell.begin(), cell.end(),
              [](const EchoFrame& a, const EchoFrame& b) { return a.id() < b.id(); });
    const long cap = cell_count(ds, Quality::poor, v, p);
    Rng rng(mix_seed(seed, "cap:" + to_string(quality) + ":" + to_string(v) + ":" +
                               to_string(p)));
    rng.shuffle(cell);
    const std::size_t take = std::min<std::size_t>(cell.size(), static_cast<std::size_t>(cap));
    cell.resize(take);
    std::sort(cell.begin(), cell.end(),
              [](const EchoFrame& a, const EchoFrame& b) { return a.id() < b.id(); });
    pool.insert(pool.end(), cell.begin(), cell.end());
  }
  return pool;
}

TrainTestSplit build_classification_split(const EchoDataset& ds, Task task, Quality quality,
                                          std::uint64_t seed, bool patient_level) {
  const auto pool = capped_class_pool(ds, task, quality, seed);

  TrainTestSplit split;
  split.task = task;
  split.seed = seed;

  std::size_t class_size[2] = {0, 0};
  for (const auto& f : pool) ++class_size[f.label(task)];
  for (int cls = 0; cls < 2; ++cls)
    if (class_size[cls] == 0) {
      const std::string cls_name = task == Task::view ? to_string(static_cast<View>(cls))
                                                      : to_string(static_cast<Phase>(cls));
      throw std::invalid_argument("split: class " + cls_name + " has zero frames for quality " +
                                  to_string(quality));
    }
  const std::size_t target[2] = {
      static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(class_size[0]))),
      static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(class_size[1])))};

  if (!patient_level) {
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<EchoFrame> members;
      for (const auto& f : pool)
        if (f.label(task) == cls) members.push_back(f);
      Rng rng(mix_seed(seed, "split:" + to_string(task) + ":" + to_string(quality) + ":" +
                                 std::to_string(cls)));
      rng.shuffle(members);
      for (std::size_t i = 0; i < members.size(); ++i)
        (i < target[cls] ? split.train : split.test).push_back(members[i]);
    }
  } else {
    // Whole patients stay on one side across both classes; per-class train
    // counts never exceed the 80% floor.
    std::vector<std::string> patients;
    for (const auto& f : pool)
      if (std::find(patients.begin(), patients.end(), f.patient_id) == patients.end())
        patients.push_back(f.patient_id);
    std::sort(patients.begin(), patients.end());
    Rng rng(mix_seed(seed, "split:" + to_string(task) + ":" + to_string(quality) + ":patients"));
    rng.shuffle(patients);

    std::set<std::string> train_patients;
    std::size_t assigned[2] = {0, 0};
    for (const auto& pid : patients) {
      std::size_t group[2] = {0, 0};
      for (const auto& f : pool)
        if (f.patient_id == pid) ++group[f.label(task)];
      if (assigned[0] + group[0] <= target[0] && assigned[1] + group[1] <= target[1]) {
        train_patients.insert(pid);
        assigned[0] += group[0];
        assigned[1] += group[1];
      }
    }
    for (const auto& f : pool)
      (train_patients.count(f.patient_id) ? split.train : split.test).push_back(f);
    bool has[2] = {false, false};
    for (const auto& f : split.train) has[f.label(task)] = true;
    if (!has[0] || !has[1])
      throw std::invalid_argument(
          "split: patient-level assignment left a class empty on the train side");
  }
  if (split.test.empty())
    throw std::invalid_argument("split: test side is empty (too few frames)");
  return split;
}

// ---------------------------------------------------------------------------
// Distribution table
// ---------------------------------------------------------------------------

DistributionTable distribution_table(const EchoDataset& ds) {
  DistributionTable t;
  for (const auto& f : ds.frames)
    ++t.counts[static_cast<int>(f.view)][static_cast<int>(f.phase)][static_cast<int>(f.quality)];
  return t;
}

long DistributionTable::total() const {
  long n = 0;
  for (const auto& v : counts)
    for (const auto& p : v)
      for (long q : p) n += q;
  return n;
}

long DistributionTable::tier_total(Quality q) const {
  long n = 0;
  for (const auto& v : counts)
    for (const auto& p : v) n += p[static_cast<int>(q)];
  return n;
}

std::string format_distribution(const DistributionTable& t) {
  std::ostringstream os;
  os << "View  Phase   Good  Medium  Poor  Total\n";
  for (int v = 0; v < 2; ++v)
    for (int p = 0; p < 2; ++p) {
      const long g = t.counts[v][p][0], m = t.counts[v][p][1], pr = t.counts[v][p][2];
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-5s %-5s %6ld %7ld %5ld %6ld\n",
                    to_string(static_cast<View>(v)).c_str(),
                    to_string(static_cast<Phase>(p)).c_str(), g, m, pr, g + m + pr);
      os << buf;
    }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-11s %6ld %7ld %5ld %6ld\n", "Total",
                t.tier_total(Quality::good), t.tier_total(Quality::medium),
                t.tier_total(Quality::poor), t.total());
  os << buf;
  return os.str();
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

void save_bundle(const EchoDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot write bundle manifest in " + dir.string());
  manifest << "patient_id,view,phase,quality,image_path\n";
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& f : ds.frames) {
    const std::string rel = "images/" + f.id() + ".pgm";
    write_pgm16(dir / rel, f.img());
    manifest << f.patient_id << "," << to_string(f.view) << "," << to_string(f.phase) << ","
             << to_string(f.quality) << "," << rel << "\n";
    if (!f.source_path.empty()) sources[f.id()] = f.source_path;
  }
  manifest.close();
  nlohmann::json meta;
  meta["provenance"] = to_string(ds.provenance);
  meta["n_frames"] = ds.size();
  meta["checksum"] = dataset_checksum(ds);
  meta["sources"] = sources;
  std::ofstream mf(dir / "bundle.json");
  mf << meta.dump(2) << "\n";
}

EchoDataset load_bundle(const std::filesystem::path& dir) {
  EchoDataset ds = load_manifest(dir / "manifest.csv");
  const auto meta_path = dir / "bundle.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream mf(meta_path);
    nlohmann::json meta;
    mf >> meta;
    const std::string prov = meta.value("provenance", "MANIFEST");
    if (prov == "CAMUS") ds.provenance = Provenance::camus;
    else if (prov == "SYNTHETIC") ds.provenance = Provenance::synthetic;
    else ds.provenance = Provenance::manifest;
    if (meta.contains("sources"))
      for (auto& f : ds.frames)
        if (meta["sources"].contains(f.id())) f.source_path = meta["sources"][f.id()];
  }
  return ds;
}

std::string dataset_checksum(const EchoDataset& ds) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix_bytes = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& f : ds.frames) {
    const std::string id = f.id() + "/" + to_string(f.quality);
    mix_bytes(id.data(), id.size());
    const int dims[2] = {f.img().height, f.img().width};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(f.img().px.data(), f.img().px.size() * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace echosr
