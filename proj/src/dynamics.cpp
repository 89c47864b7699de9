#include "ipp/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace ipp {

namespace {

// Visits every usable transition (t -> t+1): consecutive ticks, source row
// non-terminal, both velocities clear of the terminal-velocity clamp.
template <class F>
void for_each_transition(const std::vector<TrajectoryLog>& logs, const EnvConfig& cfg, F&& fn) {
  const double clamp_edge = cfg.terminal_velocity - 1e-9;
  for (const TrajectoryLog& log : logs) {
    for (size_t i = 0; i + 1 < log.records.size(); ++i) {
      const TickRecord& a = log.records[i];
      const TickRecord& b = log.records[i + 1];
      if (b.tick != a.tick + 1) continue;  // episode boundary inside one log
      if (a.collision) continue;
      if (std::abs(a.vy) >= clamp_edge || std::abs(b.vy) >= clamp_edge) continue;
      fn(a, b);
    }
  }
}

}  // namespace

double estimate_gravity(const std::vector<TrajectoryLog>& logs, const EnvConfig& cfg) {
  double sum = 0.0;
  size_t n = 0;
  for_each_transition(logs, cfg, [&](const TickRecord& a, const TickRecord& b) {
    if (a.action != static_cast<int>(Action::Noop)) return;
    sum += b.vy - a.vy;
    ++n;
  });
  if (n == 0) throw std::runtime_error("insufficient observations to estimate gravity");
  return sum / static_cast<double>(n);
}

EstimatedDynamics fit_action_gaussians(const std::vector<TrajectoryLog>& logs, double g_hat,
                                       const EnvConfig& cfg) {
  std::array<std::vector<double>, kNumActions> residuals;
  for_each_transition(logs, cfg, [&](const TickRecord& a, const TickRecord& b) {
    if (a.action < 0 || a.action >= kNumActions) return;
    residuals[a.action].push_back((b.vy - a.vy) - g_hat);
  });

  EstimatedDynamics dyn;
  dyn.g_hat = g_hat;
  for (int i = 0; i < kNumActions; ++i) {
    const auto& r = residuals[i];
    if (r.size() < 2)
      throw std::runtime_error("insufficient observations for action " + std::to_string(i));
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    dyn.impacts[i].mu = mean;
    dyn.impacts[i].sigma = std::sqrt(ss / static_cast<double>(r.size() - 1));
  }
  return dyn;
}

double sample_impact(const EstimatedDynamics& dyn, Action a, Rng& rng) {
  const ActionImpact& im = dyn.impacts[static_cast<int>(a)];
  return rng.normal(im.mu, im.sigma);
}

EstimatedDynamics dynamics_from_config(const EnvConfig& cfg) {
  EstimatedDynamics dyn;
  dyn.g_hat = cfg.gravity_g;
  dyn.impacts[static_cast<int>(Action::Flap)] = {-cfg.flap_impulse_dv, cfg.action_noise_sigma};
  dyn.impacts[static_cast<int>(Action::Noop)] = {0.0, cfg.action_noise_sigma};
  return dyn;
}

void save_dynamics(const EstimatedDynamics& dyn, const std::filesystem::path& path) {
  nlohmann::json impacts;
  for (int i = 0; i < kNumActions; ++i) {
    impacts[std::to_string(i)] = {{"mu", dyn.impacts[i].mu}, {"sigma", dyn.impacts[i].sigma}};
  }
  nlohmann::json j{{"g", dyn.g_hat}, {"impacts", impacts}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << j.dump(2) << '\n';
}

EstimatedDynamics load_dynamics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dynamics file: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  EstimatedDynamics dyn;
  dyn.g_hat = j.at("g").get<double>();
  for (int i = 0; i < kNumActions; ++i) {
    const auto& im = j.at("impacts").at(std::to_string(i));
    dyn.impacts[i].mu = im.at("mu").get<double>();
    dyn.impacts[i].sigma = im.at("sigma").get<double>();
  }
  return dyn;
}

}  // namespace ipp
