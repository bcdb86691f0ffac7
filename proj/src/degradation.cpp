#include "echosr/degradation.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "echosr/image_io.hpp"
#include "echosr/kernels.hpp"

namespace echosr {

Image bicubic_downsample(const Image& img, int r) {
  if (r < 2) throw std::invalid_argument("bicubic_downsample: r must be >= 2");
  if (img.height < r || img.width < r)
    throw std::invalid_argument("bicubic_downsample: image smaller than factor");
  const int ch = img.height / r * r;
  const int cw = img.width / r * r;
  const Image cropped = (ch == img.height && cw == img.width) ? img : center_crop(img, ch, cw);
  Image out = kernels::resample_bicubic(cropped, ch / r, cw / r);
  clamp01(out);
  return out;
}

Image bicubic_upsample(const Image& img, int r) {
  if (r < 2) throw std::invalid_argument("bicubic_upsample: r must be >= 2");
  Image out = kernels::resample_bicubic(img, img.height * r, img.width * r);
  clamp01(out);
  return out;
}

Image resize_bicubic(const Image& img, int out_h, int out_w) {
  Image out = kernels::resample_bicubic(img, out_h, out_w);
  clamp01(out);
  return out;
}

std::vector<SRPair> make_sr_pairs(const EchoDataset& subset, int r) {
  if (subset.empty()) throw std::invalid_argument("make_sr_pairs: empty subset");
  std::vector<SRPair> pairs;
  pairs.reserve(subset.size());
  for (const auto& f : subset.frames) {
    const Image& src = f.img();
    const int ch = src.height / r * r;
    const int cw = src.width / r * r;
    if (ch < r || cw < r)
      throw std::invalid_argument("make_sr_pairs: frame " + f.id() + " smaller than factor");
    Image hr = (ch == src.height && cw == src.width) ? src : center_crop(src, ch, cw);
    Image lr = bicubic_downsample(hr, r);
    SRPair p;
    p.hr = share(std::move(hr));
    p.lr = share(std::move(lr));
    p.scale = r;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void dump_pairs(const std::vector<SRPair>& pairs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "pairs.csv");
  if (!index) throw std::runtime_error("cannot write pairs index in " + dir.string());
  index << "pair,scale,lr_path,hr_path\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "pair%05zu", i);
    const std::string lr_rel = std::string(name) + "_lr.pgm";
    const std::string hr_rel = std::string(name) + "_hr.pgm";
    write_pgm16(dir / lr_rel, *pairs[i].lr);
    write_pgm16(dir / hr_rel, *pairs[i].hr);
    index << name << "," << pairs[i].scale << "," << lr_rel << "," << hr_rel << "\n";
  }
}

std::vector<SRPair> load_pairs(const std::filesystem::path& dir) {
  std::ifstream index(dir / "pairs.csv");
  if (!index) throw std::runtime_error("cannot open pairs index in " + dir.string());
  std::string line;
  std::getline(index, line);  // header
  std::vector<SRPair> pairs;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cols.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    cols.push_back(cur);
    if (cols.size() != 4) throw std::runtime_error("bad pairs.csv row: " + line);
    SRPair p;
    p.scale = std::stoi(cols[1]);
    p.lr = share(read_pgm(dir / cols[2]));
    p.hr = share(read_pgm(dir / cols[3]));
    if (p.hr->height != p.lr->height * p.scale || p.hr->width != p.lr->width * p.scale)
      throw std::runtime_error("pairs.csv row violates the shape contract: " + line);
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw std::runtime_error("no pairs found in " + dir.string());
  return pairs;
}

}  // namespace echosr
