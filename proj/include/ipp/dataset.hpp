#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ipp/env.hpp"

namespace ipp {

// One (s, alpha-target) pair. The input frame stack is assembled on
// demand from the episode's stored frames to keep memory flat.
struct TrainingExample {
  int episode = 0;
  int64_t tick = 0;
  std::array<double, kNumActions> target{};  // action counts over the window
};

struct Dataset {
  std::vector<std::vector<Frame>> episode_frames;  // 80x80 per tick
  std::vector<TrainingExample> examples;

  // Writes the 4x80x80 input for examples[idx] into dst.
  void assemble_input(size_t idx, float* dst) const;
};

// Targets are the counts of each action over ticks t..t+delta-1; windows
// touching a negative reward are dropped.
Dataset build_dataset(const std::vector<TrajectoryLog>& logs,
                      std::vector<std::vector<Frame>> episode_frames, int delta);

}  // namespace ipp
