#include "ipp/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipp {

void EnvConfig::validate() const {
  if (gravity_g <= 0.0) throw std::invalid_argument("gravity_g must be > 0");
  if (flap_impulse_dv <= 0.0) throw std::invalid_argument("flap_impulse_dv must be > 0");
  if (terminal_velocity <= 0.0) throw std::invalid_argument("terminal_velocity must be > 0");
  if (gap_half_height <= bird_radius)
    throw std::invalid_argument("gap_half_height must exceed bird radius");
  if (world_height <= 0.0 || world_width <= 0.0)
    throw std::invalid_argument("world dimensions must be positive");
  if (gap_center_min > gap_center_max)
    throw std::invalid_argument("gap_center_range inverted");
}

namespace {

Obstacle spawn_obstacle(double x, const EnvConfig& cfg, Rng& rng) {
  Obstacle o;
  o.x = x;
  o.gap_center_y = rng.uniform_range(cfg.gap_center_min, cfg.gap_center_max);
  o.gap_half_height = cfg.gap_half_height;
  o.width = cfg.pipe_width;
  return o;
}

inline double clamp_vy(double vy, const EnvConfig& cfg) {
  return std::clamp(vy, -cfg.terminal_velocity, cfg.terminal_velocity);
}

// Circle vs axis-aligned rect.
bool circle_hits_rect(double cx, double cy, double r, double rx0, double ry0, double rx1,
                      double ry1) {
  double nx = std::clamp(cx, rx0, rx1);
  double ny = std::clamp(cy, ry0, ry1);
  double dx = cx - nx;
  double dy = cy - ny;
  return dx * dx + dy * dy < r * r;
}

}  // namespace

bool collided_at(double bird_x, double bird_y, std::span<const Obstacle> obstacles,
                 double scroll_offset, const EnvConfig& cfg) {
  double r = cfg.bird_radius;
  if (bird_y + r >= cfg.world_height) return true;  // floor
  if (bird_y - r <= 0.0) return true;               // ceiling
  for (const Obstacle& o : obstacles) {
    double x0 = o.x - scroll_offset;
    double x1 = x0 + o.width;
    if (x1 < bird_x - r) continue;
    if (x0 > bird_x + r) break;  // sorted by x
    double gap_top = o.gap_center_y - o.gap_half_height;
    double gap_bot = o.gap_center_y + o.gap_half_height;
    if (circle_hits_rect(bird_x, bird_y, r, x0, 0.0, x1, gap_top)) return true;
    if (circle_hits_rect(bird_x, bird_y, r, x0, gap_bot, x1, cfg.world_height)) return true;
  }
  return false;
}

bool collided(const WorldState& state, const EnvConfig& cfg) {
  return collided_at(state.bird_x, state.bird_y, state.obstacles, 0.0, cfg);
}

WorldState make_initial_state(const EnvConfig& cfg, Rng& rng) {
  cfg.validate();
  WorldState s;
  s.bird_x = cfg.bird_x;
  s.bird_y = cfg.world_height / 2.0;
  s.bird_vy = 0.0;
  s.tick = 0;
  s.score = 0;
  s.alive = true;
  if (cfg.obstacles_enabled) {
    s.obstacles.push_back(spawn_obstacle(cfg.world_width, cfg, rng));
  }
  return s;
}

WorldState step(const WorldState& state, Action action, const EnvConfig& cfg, Rng& rng) {
  if (!state.alive) throw std::logic_error("step() called on a terminal state");

  WorldState next = state;
  double impact = (action == Action::Flap) ? -cfg.flap_impulse_dv : 0.0;
  double noise = (cfg.action_noise_sigma > 0.0) ? rng.normal(0.0, cfg.action_noise_sigma) : 0.0;
  next.bird_vy = clamp_vy(state.bird_vy + cfg.gravity_g + impact + noise, cfg);
  next.bird_y = state.bird_y + next.bird_vy;

  for (Obstacle& o : next.obstacles) {
    double old_right = o.x + o.width;
    o.x -= cfg.scroll_speed;
    if (old_right >= next.bird_x && o.x + o.width < next.bird_x) {
      next.score += 1;
    }
  }
  std::erase_if(next.obstacles, [](const Obstacle& o) { return o.x + o.width < 0.0; });

  if (cfg.obstacles_enabled) {
    while (next.obstacles.empty() ||
           next.obstacles.back().x <= cfg.world_width - cfg.pipe_spacing) {
      double x = next.obstacles.empty() ? cfg.world_width
                                        : next.obstacles.back().x + cfg.pipe_spacing;
      next.obstacles.push_back(spawn_obstacle(x, cfg, rng));
    }
  }

  next.tick = state.tick + 1;
  next.alive = !collided(next, cfg);
  return next;
}

Frame render(const WorldState& state, int width, int height, const EnvConfig& cfg) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("render: non-positive size");
  Frame f;
  f.width = width;
  f.height = height;
  f.pixels.assign(static_cast<size_t>(width) * height, 0.0f);

  double sx = cfg.world_width / width;
  double sy = cfg.world_height / height;
  double r2 = cfg.bird_radius * cfg.bird_radius;

  for (int py = 0; py < height; ++py) {
    double ly = (py + 0.5) * sy;
    for (int px = 0; px < width; ++px) {
      double lx = (px + 0.5) * sx;
      float v = 0.0f;
      for (const Obstacle& o : state.obstacles) {
        if (lx < o.x || lx >= o.x + o.width) continue;
        if (ly < o.gap_center_y - o.gap_half_height || ly >= o.gap_center_y + o.gap_half_height)
          v = 0.6f;
        break;
      }
      double dx = lx - state.bird_x;
      double dy = ly - state.bird_y;
      if (dx * dx + dy * dy <= r2) v = 1.0f;
      f.pixels[static_cast<size_t>(py) * width + px] = v;
    }
  }
  return f;
}

Frame downsample(const Frame& in, int out_w, int out_h) {
  Frame out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.assign(static_cast<size_t>(out_w) * out_h, 0.0f);

  double rx = static_cast<double>(in.width) / out_w;
  double ry = static_cast<double>(in.height) / out_h;

  for (int oy = 0; oy < out_h; ++oy) {
    double y0 = oy * ry, y1 = (oy + 1) * ry;
    int iy0 = static_cast<int>(std::floor(y0));
    int iy1 = std::min(static_cast<int>(std::ceil(y1)), in.height);
    for (int ox = 0; ox < out_w; ++ox) {
      double x0 = ox * rx, x1 = (ox + 1) * rx;
      int ix0 = static_cast<int>(std::floor(x0));
      int ix1 = std::min(static_cast<int>(std::ceil(x1)), in.width);
      double acc = 0.0;
      for (int iy = iy0; iy < iy1; ++iy) {
        double wy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
        for (int ix = ix0; ix < ix1; ++ix) {
          double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
          acc += wx * wy * in.at(ix, iy);
        }
      }
      out.pixels[static_cast<size_t>(oy) * out_w + ox] = static_cast<float>(acc / (rx * ry));
    }
  }
  return out;
}

FrameStack preprocess(std::span<const Frame> history) {
  if (history.empty()) throw std::invalid_argument("preprocess: no frames");
  FrameStack fs;
  const int n = FrameStack::kFrames;
  const int sz = FrameStack::kSize;
  for (int i = 0; i < n; ++i) {
    // Slot i holds the frame n-1-i ticks back; pad with the oldest frame.
    ptrdiff_t idx = static_cast<ptrdiff_t>(history.size()) - n + i;
    if (idx < 0) idx = 0;
    const Frame& src = history[static_cast<size_t>(idx)];
    Frame small = (src.width == sz && src.height == sz) ? src : downsample(src, sz, sz);
    std::copy(small.pixels.begin(), small.pixels.end(),
              fs.values.begin() + static_cast<size_t>(i) * sz * sz);
  }
  return fs;
}

EpisodeResult run_episode(const EnvConfig& cfg, const Policy& policy, int64_t max_ticks,
                          Rng& rng, bool record_frames) {
  if (max_ticks <= 0) throw std::invalid_argument("run_episode: max_ticks must be > 0");
  EpisodeResult res;
  WorldState s = make_initial_state(cfg, rng);
  const int sz = FrameStack::kSize;

  while (s.alive && s.tick < max_ticks) {
    int64_t frame_idx = -1;
    if (record_frames) {
      Frame native = render(s, 256, 256, cfg);
      res.frames.push_back(downsample(native, sz, sz));
      frame_idx = static_cast<int64_t>(res.frames.size()) - 1;
    }
    Action a = policy(s);
    WorldState next = step(s, a, cfg, rng);

    TickRecord rec;
    rec.tick = s.tick;
    rec.y = s.bird_y;
    rec.vy = s.bird_vy;
    rec.action = static_cast<int>(a);
    rec.collision = !next.alive;
    rec.reward = static_cast<int>(next.score - s.score) + (next.alive ? 0 : -1);
    rec.frame_idx = frame_idx;
    res.log.records.push_back(rec);

    s = std::move(next);
  }
  res.final_score = s.score;
  return res;
}

}  // namespace ipp
