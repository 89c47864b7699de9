#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "ipp/env.hpp"
#include "ipp/rng.hpp"

namespace ipp {

struct ActionImpact {
  double mu = 0.0;
  double sigma = 0.0;  // >= 0
};

// The planner's forward model: gravity plus a Gaussian velocity impact
// per action, recovered from logged play.
struct EstimatedDynamics {
  double g_hat = 0.0;
  std::array<ActionImpact, kNumActions> impacts{};
};

// Mean of the per-tick velocity deltas over non-terminal, unclamped Noop
// transitions (equivalent to a least-squares fit of the second differences
// of y). Throws std::runtime_error("insufficient observations") when no
// qualifying transition exists.
double estimate_gravity(const std::vector<TrajectoryLog>& logs, const EnvConfig& cfg);

// Fits (mu, sigma) per action over residuals (vy(t+1) - vy(t)) - g_hat.
// Requires >= 2 observations per action variant.
EstimatedDynamics fit_action_gaussians(const std::vector<TrajectoryLog>& logs, double g_hat,
                                       const EnvConfig& cfg);

double sample_impact(const EstimatedDynamics& dyn, Action a, Rng& rng);

// Ground-truth dynamics straight from the config (ablation path).
EstimatedDynamics dynamics_from_config(const EnvConfig& cfg);

// {"g":float,"impacts":{"0":{"mu":..,"sigma":..},"1":{..}}}
void save_dynamics(const EstimatedDynamics& dyn, const std::filesystem::path& path);
EstimatedDynamics load_dynamics(const std::filesystem::path& path);

}  // namespace ipp
