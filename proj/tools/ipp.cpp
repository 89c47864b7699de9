#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipp/errors.hpp"
#include "ipp/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitRuntime = 4;

int env_threads() {
  if (const char* v = std::getenv("IPP_THREADS")) {
    int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ipp — probabilistic intuitive-physics agent experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  app.add_option("--config", config_path, "experiment config JSON")->capture_default_str();
  app.add_option("--seed", seed, "master seed (overrides config)");

  // collect
  auto* collect = app.add_subcommand("collect", "run episodes and write logs + frames");
  int episodes = 10;
  std::string policy_name = "random";
  double p_flap = 0.072;
  std::string logs_out;
  bool no_frames = false;
  collect->add_option("--episodes", episodes, "number of episodes")->capture_default_str();
  collect->add_option("--policy", policy_name, "random | planner")->capture_default_str();
  collect->add_option("--p-flap", p_flap, "flap probability for the random policy")
      ->capture_default_str();
  collect->add_option("--out", logs_out, "output log directory");
  collect->add_flag("--no-frames", no_frames, "skip frame sidecars");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "fit dynamics from collected logs");
  std::string est_logs, est_out;
  estimate->add_option("--logs", est_logs, "log directory or file");
  estimate->add_option("--out", est_out, "dynamics JSON output path");

  // train-prior
  auto* train = app.add_subcommand("train-prior", "train the CNN prior on collected logs");
  std::string train_logs, train_out;
  std::optional<int> train_epochs;
  std::optional<double> train_lr;
  train->add_option("--logs", train_logs, "log directory");
  train->add_option("--out", train_out, "weight file output path");
  train->add_option("--epochs", train_epochs, "override training epochs");
  train->add_option("--lr", train_lr, "override learning rate");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate an agent over full episodes");
  std::string agent_str;
  std::optional<int64_t> budget_samples;
  std::optional<double> budget_ms;
  std::optional<int> eval_episodes;
  std::string eval_out;
  eval->add_option("--agent", agent_str, "pb-cnn | pb-uniform");
  eval->add_option("--budget-samples", budget_samples, "sample-count budget per decision");
  eval->add_option("--budget-ms", budget_ms, "wall-clock budget per decision (ms)");
  eval->add_option("--episodes", eval_episodes, "episodes per evaluation");
  eval->add_option("--out", eval_out, "output directory for eval result files");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "agents x budgets evaluation grid");
  std::vector<std::string> sweep_agents{"pb-uniform", "pb-cnn"};
  std::vector<double> sweep_samples;
  std::vector<double> sweep_ms;
  std::string sweep_out = "sweep.csv";
  sweep->add_option("--agents", sweep_agents, "agents to evaluate")->capture_default_str();
  sweep->add_option("--budgets-samples", sweep_samples, "sample budgets");
  sweep->add_option("--budgets-ms", sweep_ms, "wall-clock budgets (ms)");
  sweep->add_option("--out", sweep_out, "output CSV path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    ipp::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ipp::load_experiment_config(config_path);
    if (seed) cfg.master_seed = *seed;
    cfg.train.threads = env_threads();

    if (collect->parsed()) {
      if (!logs_out.empty()) cfg.logs_dir = logs_out;
      ipp::CollectPolicy pol;
      if (policy_name == "random") {
        pol.kind = ipp::CollectPolicy::Kind::Random;
        pol.p_flap = p_flap;
      } else if (policy_name == "planner") {
        pol.kind = ipp::CollectPolicy::Kind::Planner;
      } else {
        throw std::invalid_argument("unknown policy: " + policy_name);
      }
      auto s = ipp::cmd_collect(cfg, episodes, pol, !no_frames);
      std::cout << "collected " << s.episodes << " episodes, " << s.total_ticks
                << " ticks, mean score " << s.mean_score << '\n';
    } else if (estimate->parsed()) {
      if (!est_logs.empty()) cfg.logs_dir = est_logs;
      if (!est_out.empty()) cfg.dynamics_path = est_out;
      auto dyn = ipp::cmd_estimate(cfg);
      std::cout << "estimated g=" << dyn.g_hat << ", flap mu="
                << dyn.impacts[0].mu << " sigma=" << dyn.impacts[0].sigma << ", noop mu="
                << dyn.impacts[1].mu << " sigma=" << dyn.impacts[1].sigma << '\n';
      std::cout << "wrote " << cfg.dynamics_path.string() << '\n';
    } else if (train->parsed()) {
      if (!train_logs.empty()) cfg.logs_dir = train_logs;
      if (!train_out.empty()) cfg.weights_path = train_out;
      if (train_epochs) cfg.train.epochs = *train_epochs;
      if (train_lr) cfg.train.learning_rate = *train_lr;
      auto s = ipp::cmd_train_prior(cfg);
      std::cout << "trained on " << s.examples << " examples; loss "
                << s.loss_history.front() << " -> " << s.loss_history.back() << '\n';
      std::cout << "wrote " << cfg.weights_path.string() << '\n';
    } else if (eval->parsed()) {
      if (!agent_str.empty()) cfg.agent_kind = ipp::parse_agent(agent_str);
      if (budget_samples) {
        cfg.planner.budget_samples = *budget_samples;
        cfg.planner.budget_ms.reset();
      }
      if (budget_ms) {
        cfg.planner.budget_ms = *budget_ms;
        if (budget_samples == std::nullopt) cfg.planner.budget_samples.reset();
      }
      if (eval_episodes) cfg.episodes_per_eval = *eval_episodes;
      if (!eval_out.empty()) cfg.out_dir = eval_out;
      auto r = ipp::cmd_eval(cfg, cfg.agent_kind);
      std::filesystem::create_directories(cfg.out_dir);
      auto base = cfg.out_dir / ("eval_" + r.agent + "_" + r.budget_kind);
      {
        std::ofstream out(base.string() + ".json");
        out << r.to_json() << '\n';
      }
      {
        std::ofstream out(base.string() + ".csv");
        out << ipp::EvalResult::csv_header() << '\n' << r.csv_row() << '\n';
      }
      std::cout << r.to_json() << '\n';
    } else if (sweep->parsed()) {
      std::vector<ipp::AgentKind> agents;
      for (const auto& a : sweep_agents) agents.push_back(ipp::parse_agent(a));
      bool use_samples = !sweep_samples.empty();
      if (use_samples == !sweep_ms.empty())
        throw std::invalid_argument("pass exactly one of --budgets-samples / --budgets-ms");
      const auto& budgets = use_samples ? sweep_samples : sweep_ms;
      int failures = ipp::cmd_sweep(cfg, agents, budgets, use_samples, sweep_out);
      std::cout << "wrote " << sweep_out << '\n';
      if (failures > 0) {
        std::cerr << failures << " sweep cell(s) failed\n";
        return kExitRuntime;
      }
    }
    return kExitOk;
  } catch (const ipp::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingArtifact;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
