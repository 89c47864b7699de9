#include "ipp/cnn_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ipp {

namespace {
constexpr char kMagic[5] = {'I', 'P', 'P', 'W', '1'};
constexpr uint16_t kVersion = 1;

void put_u16(std::ofstream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint16_t get_u16(std::ifstream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw std::runtime_error("truncated weight file");
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated weight file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void save_params(Cnn<float>& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  auto tensors = net.tensors();
  out.write(kMagic, 5);
  put_u16(out, kVersion);
  put_u16(out, static_cast<uint16_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 255) throw std::logic_error("tensor name too long");
    unsigned char len = static_cast<unsigned char>(t.name.size());
    out.write(reinterpret_cast<const char*>(&len), 1);
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    unsigned char ndim = static_cast<unsigned char>(t.dims.size());
    out.write(reinterpret_cast<const char*>(&ndim), 1);
    for (uint32_t d : t.dims) put_u32(out, d);
    out.write(reinterpret_cast<const char*>(t.data->data()),
              static_cast<std::streamsize>(t.data->size() * sizeof(float)));
  }
}

void load_params(Cnn<float>& net, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weight file: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error("bad weight file magic: " + path.string());
  uint16_t version = get_u16(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported weight file version " + std::to_string(version));
  auto tensors = net.tensors();
  uint16_t count = get_u16(in);
  if (count != tensors.size())
    throw std::runtime_error("weight file tensor count mismatch");
  for (auto& t : tensors) {
    unsigned char len = 0;
    in.read(reinterpret_cast<char*>(&len), 1);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in || name != t.name)
      throw std::runtime_error("weight file tensor name mismatch: expected " + t.name);
    unsigned char ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), 1);
    if (!in || ndim != t.dims.size())
      throw std::runtime_error("weight file shape mismatch for " + t.name);
    for (uint32_t expect : t.dims) {
      uint32_t d = get_u32(in);
      if (d != expect) throw std::runtime_error("weight file shape mismatch for " + t.name);
    }
    in.read(reinterpret_cast<char*>(t.data->data()),
            static_cast<std::streamsize>(t.data->size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated weight file: " + path.string());
  }
}

}  // namespace ipp
