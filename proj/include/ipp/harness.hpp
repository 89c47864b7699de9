#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ipp/dynamics.hpp"
#include "ipp/env.hpp"
#include "ipp/planner.hpp"
#include "ipp/train.hpp"

namespace ipp {

enum class AgentKind { PbCnn, PbUniform };

std::string agent_name(AgentKind kind);
AgentKind parse_agent(const std::string& name);  // "pb-cnn" | "pb-uniform"

struct ExperimentConfig {
  EnvConfig env;
  PlannerConfig planner;
  TrainConfig train;
  AgentKind agent_kind = AgentKind::PbUniform;
  int episodes_per_eval = 10;
  int64_t max_ticks_per_episode = 2000;
  uint64_t master_seed = 0;
  bool use_true_dynamics = false;

  std::filesystem::path logs_dir = "logs";
  std::filesystem::path dynamics_path = "dynamics.json";
  std::filesystem::path weights_path = "prior.ippw";
  std::filesystem::path out_dir = ".";
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CollectPolicy {
  enum class Kind { Random, Planner } kind = Kind::Random;
  double p_flap = 0.072;  // Random only
};

struct CollectSummary {
  int episodes = 0;
  int64_t total_ticks = 0;
  double mean_score = 0.0;
};

// Runs episodes with per-episode seeds master_seed + index and writes
// logs/episode_NNN.jsonl plus .frames sidecars into cfg.logs_dir.
CollectSummary cmd_collect(const ExperimentConfig& cfg, int episodes,
                           const CollectPolicy& policy, bool record_frames = true);

// Fits dynamics from every log under logs_path and writes cfg.dynamics_path.
EstimatedDynamics cmd_estimate(const ExperimentConfig& cfg);

struct TrainSummary {
  size_t examples = 0;
  std::vector<double> loss_history;
};

// Builds the dataset from cfg.logs_dir, trains the prior network, writes
// cfg.weights_path and a per-epoch loss CSV next to it.
TrainSummary cmd_train_prior(const ExperimentConfig& cfg);

struct EvalResult {
  std::string agent;
  std::string budget_kind;  // "samples" | "ms"
  double budget = 0.0;
  std::vector<int64_t> scores;
  double mean = 0.0;
  double stddev = 0.0;
  double decision_us_mean = 0.0;
  double decision_us_p95 = 0.0;
  uint64_t seed = 0;

  std::string to_json() const;
  std::string csv_row() const;  // agent,budget_kind,budget,mean_score,std,seed
  static std::string csv_header();
};

EvalResult cmd_eval(const ExperimentConfig& cfg, AgentKind agent);

struct SweepCell {
  AgentKind agent;
  double budget;
};

// Cross product of agents x budgets; failed cells are reported and the
// rest continue. Returns the number of failed cells.
int cmd_sweep(const ExperimentConfig& cfg, const std::vector<AgentKind>& agents,
              const std::vector<double>& budgets, bool budget_is_samples,
              const std::filesystem::path& csv_out);

}  // namespace ipp
