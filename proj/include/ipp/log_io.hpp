#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipp/env.hpp"

namespace ipp {

// One JSON object per line:
// {"tick":int,"y":float,"vy":float,"action":int,"reward":int,"collision":bool,"frame_idx":int}
void write_log_jsonl(const TrajectoryLog& log, const std::filesystem::path& path);
TrajectoryLog read_log_jsonl(const std::filesystem::path& path);

// Raw frame sidecar: magic "IPPF1", u32 count, u32 w, u32 h, then
// count*w*h little-endian float32.
void write_frames(const std::vector<Frame>& frames, const std::filesystem::path& path);
std::vector<Frame> read_frames(const std::filesystem::path& path);

// All episode_*.jsonl files in a directory, sorted by name. Accepts a
// single .jsonl file path as well.
std::vector<TrajectoryLog> load_logs(const std::filesystem::path& dir_or_file);

}  // namespace ipp
