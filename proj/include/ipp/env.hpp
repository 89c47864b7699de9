#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ipp/rng.hpp"

namespace ipp {

enum class Action : int { Flap = 0, Noop = 1 };
inline constexpr int kNumActions = 2;

// World constants. Units: px for positions, velocity-units/tick for
// velocities; y grows downward.
struct EnvConfig {
  double gravity_g = 0.36;
  double flap_impulse_dv = 5.0;       // applied upward (negative dv)
  double action_noise_sigma = 0.0;    // env stochasticity, off by default
  double terminal_velocity = 10.0;
  double world_height = 256.0;
  double world_width = 256.0;
  double scroll_speed = 2.0;
  double pipe_spacing = 120.0;
  double pipe_width = 24.0;
  double gap_half_height = 28.0;
  double gap_center_min = 64.0;
  double gap_center_max = 192.0;
  double bird_x = 64.0;
  double bird_radius = 6.0;
  bool obstacles_enabled = true;
  uint64_t rng_seed = 0;

  void validate() const;  // throws std::invalid_argument on bad constants
};

struct Obstacle {
  double x = 0.0;  // left edge
  double gap_center_y = 0.0;
  double gap_half_height = 0.0;
  double width = 0.0;
};

struct WorldState {
  double bird_y = 0.0;
  double bird_vy = 0.0;
  double bird_x = 0.0;
  std::vector<Obstacle> obstacles;  // sorted ascending by x
  int64_t tick = 0;
  int64_t score = 0;
  bool alive = true;
};

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, values in [0,1]

  float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// phi(s): four 80x80 grayscale frames, oldest first.
struct FrameStack {
  static constexpr int kFrames = 4;
  static constexpr int kSize = 80;
  std::vector<float> values;  // [frame][y][x], 4*80*80

  FrameStack() : values(kFrames * kSize * kSize, 0.0f) {}
};

struct TickRecord {
  int64_t tick = 0;
  double y = 0.0;
  double vy = 0.0;
  int action = 0;
  int reward = 0;
  bool collision = false;
  int64_t frame_idx = -1;
};

struct TrajectoryLog {
  std::vector<TickRecord> records;
};

WorldState make_initial_state(const EnvConfig& cfg, Rng& rng);

// Advances one tick. Throws std::logic_error if state is terminal.
WorldState step(const WorldState& state, Action action, const EnvConfig& cfg, Rng& rng);

bool collided(const WorldState& state, const EnvConfig& cfg);

// Collision test reused by the planner's rollouts: obstacles are taken at
// their stored x minus scroll_offset, without mutating anything.
bool collided_at(double bird_x, double bird_y, std::span<const Obstacle> obstacles,
                 double scroll_offset, const EnvConfig& cfg);

// Deterministic rasterization: background 0.0, obstacles 0.6, bird 1.0.
Frame render(const WorldState& state, int width, int height, const EnvConfig& cfg);

// Area-averaged (box filter) resample; handles fractional ratios.
Frame downsample(const Frame& in, int out_w, int out_h);

// Builds phi from the most recent frames (newest last). Requires at least
// one frame; missing history is padded by repeating the oldest frame.
FrameStack preprocess(std::span<const Frame> history);

struct EpisodeResult {
  TrajectoryLog log;
  std::vector<Frame> frames;  // 80x80 preprocessed, one per tick (if recorded)
  int64_t final_score = 0;
};

using Policy = std::function<Action(const WorldState&)>;

// Runs one episode until collision or max_ticks. When record_frames is
// set, each tick's render is downsampled to 80x80 and kept.
EpisodeResult run_episode(const EnvConfig& cfg, const Policy& policy, int64_t max_ticks,
                          Rng& rng, bool record_frames = false);

}  // namespace ipp
