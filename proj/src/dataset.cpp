#include "ipp/dataset.hpp"

#include <algorithm>
#include <stdexcept>

namespace ipp {

void Dataset::assemble_input(size_t idx, float* dst) const {
  const TrainingExample& ex = examples.at(idx);
  const auto& frames = episode_frames.at(static_cast<size_t>(ex.episode));
  const int sz = FrameStack::kSize;
  for (int j = 0; j < FrameStack::kFrames; ++j) {
    int64_t fi = ex.tick - (FrameStack::kFrames - 1) + j;
    if (fi < 0) fi = 0;  // pad with the oldest frame
    const Frame& f = frames.at(static_cast<size_t>(fi));
    if (f.width != sz || f.height != sz)
      throw std::invalid_argument("dataset frames must be 80x80");
    std::copy(f.pixels.begin(), f.pixels.end(), dst + static_cast<size_t>(j) * sz * sz);
  }
}

Dataset build_dataset(const std::vector<TrajectoryLog>& logs,
                      std::vector<std::vector<Frame>> episode_frames, int delta) {
  if (delta < 1) throw std::invalid_argument("build_dataset: delta must be >= 1");
  if (logs.size() != episode_frames.size())
    throw std::invalid_argument("build_dataset: logs/frames episode count mismatch");

  Dataset ds;
  ds.episode_frames = std::move(episode_frames);
  for (size_t ep = 0; ep < logs.size(); ++ep) {
    const auto& recs = logs[ep].records;
    for (size_t t = 0; t + static_cast<size_t>(delta) <= recs.size(); ++t) {
      TrainingExample ex;
      ex.episode = static_cast<int>(ep);
      ex.tick = recs[t].frame_idx;  // frames are numbered per tick
      bool negative = false;
      for (int j = 0; j < delta; ++j) {
        const TickRecord& r = recs[t + static_cast<size_t>(j)];
        if (r.reward < 0) {
          negative = true;
          break;
        }
        ex.target[static_cast<size_t>(r.action)] += 1.0;
      }
      if (negative) continue;
      if (recs[t].frame_idx < 0) throw std::invalid_argument("build_dataset: log has no frames");
      ds.examples.push_back(ex);
    }
  }
  return ds;
}

}  // namespace ipp
