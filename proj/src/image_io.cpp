#include "echosr/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace echosr {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

// Skips whitespace and '#' comment lines in a PGM header.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) fail(path, "truncated PGM header");
  std::string tok;
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    fail(path, "bad PGM header token '" + tok + "'");
  }
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  const bool binary = magic[0] == 'P' && magic[1] == '5';
  const bool ascii = magic[0] == 'P' && magic[1] == '2';
  if (!binary && !ascii) fail(path, "not a PGM (P2/P5) file");

  const int w = next_header_int(in, path);
  const int h = next_header_int(in, path);
  const int maxval = next_header_int(in, path);
  if (w <= 0 || h <= 0) fail(path, "non-positive PGM dimensions");
  if (maxval <= 0 || maxval > 65535) fail(path, "unsupported PGM maxval");

  Image img(h, w);
  const double scale = 1.0 / maxval;
  if (ascii) {
    for (double& v : img.px) {
      long raw = 0;
      if (!(in >> raw)) fail(path, "truncated PGM data");
      v = raw * scale;
    }
  } else {
    const bool wide = maxval > 255;
    const std::size_t n = img.size();
    std::vector<unsigned char> buf(n * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) fail(path, "truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) {
      // P5 multi-byte samples are big-endian.
      const unsigned raw = wide ? (static_cast<unsigned>(buf[2 * i]) << 8 | buf[2 * i + 1])
                                : buf[i];
      img.px[i] = raw * scale;
    }
  }
  for (double& v : img.px) v = std::clamp(v, 0.0, 1.0);
  return img;
}

namespace {

void write_pgm(const std::filesystem::path& path, const Image& img, int maxval) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const bool wide = maxval > 255;
  std::vector<unsigned char> buf;
  buf.reserve(img.size() * (wide ? 2 : 1));
  for (double v : img.px) {
    const double c = std::clamp(v, 0.0, 1.0);
    const unsigned raw = static_cast<unsigned>(std::lround(c * maxval));
    if (wide) {
      buf.push_back(static_cast<unsigned char>(raw >> 8));
      buf.push_back(static_cast<unsigned char>(raw & 0xff));
    } else {
      buf.push_back(static_cast<unsigned char>(raw));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(path, "write failed");
}

}  // namespace

void write_pgm16(const std::filesystem::path& path, const Image& img) {
  write_pgm(path, img, 65535);
}

void write_pgm8(const std::filesystem::path& path, const Image& img) {
  write_pgm(path, img, 255);
}

Image read_mhd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");

  int ndims = 0;
  std::vector<int> dims;
  std::string elem_type;
  std::string data_file;
  bool msb = false;

  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      const auto e = s.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "NDims") {
      ndims = std::stoi(val);
    } else if (key == "DimSize") {
      std::istringstream ss(val);
      int d;
      while (ss >> d) dims.push_back(d);
    } else if (key == "ElementType") {
      elem_type = val;
    } else if (key == "ElementDataFile") {
      data_file = val;
    } else if (key == "BinaryDataByteOrderMSB" || key == "ElementByteOrderMSB") {
      msb = (val == "True" || val == "true" || val == "1");
    }
  }
  if (dims.empty() || elem_type.empty() || data_file.empty())
    fail(path, "incomplete MetaImage header");
  if (ndims == 0) ndims = static_cast<int>(dims.size());
  for (std::size_t i = 2; i < dims.size(); ++i)
    if (dims[i] != 1) fail(path, "only 2D MetaImage supported");
  if (dims.size() < 2) fail(path, "MetaImage with fewer than 2 dims");
  const int w = dims[0];
  const int h = dims[1];
  if (w <= 0 || h <= 0) fail(path, "non-positive MetaImage dims");

  if (data_file == "LOCAL") fail(path, "LOCAL element data not supported");
  const std::filesystem::path raw_path = path.parent_path() / data_file;
  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) fail(raw_path, "cannot open element data");

  const std::size_t n = static_cast<std::size_t>(w) * h;
  Image img(h, w);
  auto read_all = [&](std::vector<unsigned char>& buf) {
    raw.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(raw.gcount()) != buf.size())
      fail(raw_path, "truncated element data");
  };

  if (elem_type == "MET_UCHAR") {
    std::vector<unsigned char> buf(n);
    read_all(buf);
    for (std::size_t i = 0; i < n; ++i) img.px[i] = buf[i] / 255.0;
  } else if (elem_type == "MET_USHORT") {
    std::vector<unsigned char> buf(n * 2);
    read_all(buf);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned raw16 = msb ? (static_cast<unsigned>(buf[2 * i]) << 8 | buf[2 * i + 1])
                                 : (static_cast<unsigned>(buf[2 * i + 1]) << 8 | buf[2 * i]);
      img.px[i] = raw16 / 65535.0;
    }
  } else if (elem_type == "MET_FLOAT") {
    std::vector<unsigned char> buf(n * 4);
    read_all(buf);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      unsigned char b[4] = {buf[4 * i], buf[4 * i + 1], buf[4 * i + 2], buf[4 * i + 3]};
      if (msb) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      std::memcpy(&f, b, 4);
      img.px[i] = std::clamp(static_cast<double>(f), 0.0, 1.0);
    }
  } else {
    fail(path, "unsupported ElementType " + elem_type);
  }
  for (double& v : img.px) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Image read_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".mhd") return read_mhd(path);
  fail(path, "unsupported image extension '" + ext + "'");
}

}  // namespace echosr
