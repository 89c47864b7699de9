#include "ipp/log_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ipp/errors.hpp"

namespace ipp {

namespace fs = std::filesystem;
using nlohmann::json;

void write_log_jsonl(const TrajectoryLog& log, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const TickRecord& r : log.records) {
    json j{{"tick", r.tick},     {"y", r.y},
           {"vy", r.vy},         {"action", r.action},
           {"reward", r.reward}, {"collision", r.collision},
           {"frame_idx", r.frame_idx}};
    out << j.dump() << '\n';
  }
}

TrajectoryLog read_log_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open log file: " + path.string());
  TrajectoryLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    TickRecord r;
    r.tick = j.at("tick").get<int64_t>();
    r.y = j.at("y").get<double>();
    r.vy = j.at("vy").get<double>();
    r.action = j.at("action").get<int>();
    r.reward = j.at("reward").get<int>();
    r.collision = j.at("collision").get<bool>();
    r.frame_idx = j.value("frame_idx", int64_t{-1});
    log.records.push_back(r);
  }
  return log;
}

namespace {
constexpr char kFrameMagic[5] = {'I', 'P', 'P', 'F', '1'};

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated frame file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void write_frames(const std::vector<Frame>& frames, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  uint32_t w = frames.empty() ? 0 : static_cast<uint32_t>(frames[0].width);
  uint32_t h = frames.empty() ? 0 : static_cast<uint32_t>(frames[0].height);
  out.write(kFrameMagic, 5);
  put_u32(out, static_cast<uint32_t>(frames.size()));
  put_u32(out, w);
  put_u32(out, h);
  for (const Frame& f : frames) {
    if (static_cast<uint32_t>(f.width) != w || static_cast<uint32_t>(f.height) != h)
      throw std::invalid_argument("write_frames: mixed frame sizes");
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size() * sizeof(float)));
  }
}

std::vector<Frame> read_frames(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("cannot open frame file: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kFrameMagic, 5) != 0)
    throw std::runtime_error("bad frame file magic: " + path.string());
  uint32_t count = get_u32(in);
  uint32_t w = get_u32(in);
  uint32_t h = get_u32(in);
  std::vector<Frame> frames(count);
  for (uint32_t i = 0; i < count; ++i) {
    Frame& f = frames[i];
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    f.pixels.resize(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated frame file: " + path.string());
  }
  return frames;
}

std::vector<TrajectoryLog> load_logs(const fs::path& dir_or_file) {
  if (!fs::exists(dir_or_file))
    throw MissingArtifactError("log path does not exist: " + dir_or_file.string());
  if (fs::is_regular_file(dir_or_file)) return {read_log_jsonl(dir_or_file)};
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir_or_file)) {
    if (e.path().extension() == ".jsonl") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw std::runtime_error("no .jsonl logs found in: " + dir_or_file.string());
  std::vector<TrajectoryLog> logs;
  logs.reserve(paths.size());
  for (const auto& p : paths) logs.push_back(read_log_jsonl(p));
  return logs;
}

}  // namespace ipp
