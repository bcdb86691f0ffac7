#include "echosr/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace echosr {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'R', 'M'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& ctx) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("model file truncated reading " + ctx);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::string& ctx) {
  const std::uint32_t n = get_u32(in, ctx);
  if (n > (1u << 28)) throw std::runtime_error("model file: implausible string size in " + ctx);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("model file truncated reading " + ctx);
  return s;
}

}  // namespace

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(params.version));
  put_string(out, params.arch);
  put_string(out, params.config.dump());
  put_u32(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const auto& t : params.tensors) {
    put_string(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.value.n));
    put_u32(out, static_cast<std::uint32_t>(t.value.c));
    put_u32(out, static_cast<std::uint32_t>(t.value.h));
    put_u32(out, static_cast<std::uint32_t>(t.value.w));
    out.write(reinterpret_cast<const char*>(t.value.data()),
              static_cast<std::streamsize>(t.value.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a model file (bad magic): " + path.string());
  ModelParams p;
  p.version = static_cast<int>(get_u32(in, "version"));
  if (p.version != ModelParams::kFormatVersion)
    throw std::runtime_error("unsupported model format version " + std::to_string(p.version));
  p.arch = get_string(in, "arch");
  const std::string cfg = get_string(in, "config");
  p.config = nlohmann::json::parse(cfg);
  const std::uint32_t count = get_u32(in, "tensor count");
  p.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = get_string(in, "tensor name");
    const int n = static_cast<int>(get_u32(in, "dims"));
    const int c = static_cast<int>(get_u32(in, "dims"));
    const int h = static_cast<int>(get_u32(in, "dims"));
    const int w = static_cast<int>(get_u32(in, "dims"));
    t.value = Tensor(n, c, h, w);
    in.read(reinterpret_cast<char*>(t.value.data()),
            static_cast<std::streamsize>(t.value.size() * sizeof(double)));
    if (!in) throw std::runtime_error("model file truncated reading tensor " + t.name);
    p.tensors.push_back(std::move(t));
  }
  return p;
}

std::string params_checksum(const ModelParams& params) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix_bytes = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix_bytes(params.arch.data(), params.arch.size());
  for (const auto& t : params.tensors) {
    mix_bytes(t.name.data(), t.name.size());
    const int dims[4] = {t.value.n, t.value.c, t.value.h, t.value.w};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(t.value.data(), t.value.size() * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace echosr
