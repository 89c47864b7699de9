#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipp/dynamics.hpp"
#include "ipp/env.hpp"
#include "ipp/rng.hpp"

namespace ipp {

// Dirichlet concentration, one positive component per action.
struct DirichletParams {
  std::vector<double> alpha;

  void validate() const;  // throws on non-positive or wrong-length alpha
};

DirichletParams uniform_prior(int n_actions = kNumActions);

struct PlanSample {
  std::vector<Action> actions;   // times t .. t+h-1
  std::vector<double> impacts;   // gamma per step
  int horizon_h = 0;
  bool collided = false;         // c_h
};

// Surviving plans only (c_h == false), insertion order preserved.
struct SampleStore {
  std::vector<PlanSample> plans;
};

enum class FallbackRule { PriorMeanArgmax };

struct PlannerConfig {
  int initial_horizon_c = 5;
  int horizon_increment_delta = 1;
  // Exactly one budget is active; samples take precedence when both set.
  std::optional<int64_t> budget_samples;
  std::optional<double> budget_ms;
  FallbackRule fallback_rule = FallbackRule::PriorMeanArgmax;
  uint64_t rng_seed = 0;

  void validate() const;
};

struct ActionDistribution {
  std::vector<int64_t> counts;
  std::vector<double> probabilities;  // counts / total when total > 0
  bool undefined = false;             // empty store
};

struct PlannerDiagnostics {
  int64_t samples = 0;
  int64_t survivors = 0;
  int horizon_final = 0;
  std::vector<double> alpha_final;
  int64_t elapsed_us = 0;
  bool fallback = false;

  std::string to_json() const;
};

// theta_i = Gamma(alpha_i,1) / sum, normalized to 1.
std::vector<double> dirichlet_sample(const DirichletParams& alpha, Rng& rng);

// Rolls the learned kinematics forward h ticks from s; true iff any
// intermediate state collides. Pure; does not touch the live environment.
bool simulate(const WorldState& s, std::span<const double> impacts, int h,
              const EstimatedDynamics& dyn, const EnvConfig& cfg);

// One candidate plan draw: theta ~ Dirichlet(alpha), h i.i.d.
// categorical actions, Gaussian impacts, then a survival rollout.
PlanSample sample_actions(const WorldState& s, const DirichletParams& alpha, int h,
                          const EstimatedDynamics& dyn, const EnvConfig& cfg, Rng& rng);

// alpha_i += count of action i in the plan. Requires a surviving plan.
DirichletParams update_alpha(const DirichletParams& alpha, const PlanSample& plan);

// p(a_t = x | c_h = false) from the first action of every stored plan.
ActionDistribution estimate_conditional(const SampleStore& m);

// The full anytime loop; returns the argmax action plus diagnostics.
std::pair<Action, PlannerDiagnostics> get_action(const WorldState& s,
                                                 const DirichletParams& prior_alpha,
                                                 const PlannerConfig& cfg,
                                                 const EstimatedDynamics& dyn,
                                                 const EnvConfig& env_cfg, Rng& rng);

}  // namespace ipp
