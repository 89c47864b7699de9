#include "ipp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "ipp/cnn.hpp"
#include "ipp/cnn_io.hpp"
#include "ipp/dataset.hpp"
#include "ipp/errors.hpp"
#include "ipp/log_io.hpp"

namespace ipp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string agent_name(AgentKind kind) {
  return kind == AgentKind::PbCnn ? "pb-cnn" : "pb-uniform";
}

AgentKind parse_agent(const std::string& name) {
  if (name == "pb-cnn") return AgentKind::PbCnn;
  if (name == "pb-uniform") return AgentKind::PbUniform;
  throw std::invalid_argument("unknown agent kind: " + name);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void from_json_env(const json& j, EnvConfig& e) {
  e.gravity_g = j.value("gravity_g", e.gravity_g);
  e.flap_impulse_dv = j.value("flap_impulse_dv", e.flap_impulse_dv);
  e.action_noise_sigma = j.value("action_noise_sigma", e.action_noise_sigma);
  e.terminal_velocity = j.value("terminal_velocity", e.terminal_velocity);
  e.world_height = j.value("world_height", e.world_height);
  e.world_width = j.value("world_width", e.world_width);
  e.scroll_speed = j.value("scroll_speed", e.scroll_speed);
  e.pipe_spacing = j.value("pipe_spacing", e.pipe_spacing);
  e.pipe_width = j.value("pipe_width", e.pipe_width);
  e.gap_half_height = j.value("gap_half_height", e.gap_half_height);
  e.gap_center_min = j.value("gap_center_min", e.gap_center_min);
  e.gap_center_max = j.value("gap_center_max", e.gap_center_max);
  e.bird_x = j.value("bird_x", e.bird_x);
  e.bird_radius = j.value("bird_radius", e.bird_radius);
  e.obstacles_enabled = j.value("obstacles_enabled", e.obstacles_enabled);
  e.rng_seed = j.value("rng_seed", e.rng_seed);
}

void from_json_planner(const json& j, PlannerConfig& p) {
  p.initial_horizon_c = j.value("initial_horizon_c", p.initial_horizon_c);
  p.horizon_increment_delta = j.value("horizon_increment_delta", p.horizon_increment_delta);
  if (j.contains("budget_samples")) p.budget_samples = j.at("budget_samples").get<int64_t>();
  if (j.contains("budget_ms")) p.budget_ms = j.at("budget_ms").get<double>();
  p.rng_seed = j.value("rng_seed", p.rng_seed);
}

void from_json_train(const json& j, TrainConfig& t) {
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.minibatch_size = j.value("minibatch_size", t.minibatch_size);
  t.epochs = j.value("epochs", t.epochs);
  t.delta_window = j.value("delta_window", t.delta_window);
  t.rng_seed = j.value("rng_seed", t.rng_seed);
  t.alpha_floor = j.value("alpha_floor", t.alpha_floor);
  t.threads = j.value("threads", t.threads);
}

std::string episode_file(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "episode_%04d", idx);
  return buf;
}

EstimatedDynamics planner_dynamics(const ExperimentConfig& cfg) {
  if (cfg.use_true_dynamics) return dynamics_from_config(cfg.env);
  if (!fs::exists(cfg.dynamics_path))
    throw MissingArtifactError("missing dynamics file (run `ipp estimate` first): " +
                             cfg.dynamics_path.string());
  return load_dynamics(cfg.dynamics_path);
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
  json j = json::parse(in);
  ExperimentConfig cfg;
  if (j.contains("env")) from_json_env(j.at("env"), cfg.env);
  if (j.contains("planner")) from_json_planner(j.at("planner"), cfg.planner);
  if (j.contains("train")) from_json_train(j.at("train"), cfg.train);
  if (j.contains("agent_kind")) cfg.agent_kind = parse_agent(j.at("agent_kind").get<std::string>());
  cfg.episodes_per_eval = j.value("episodes_per_eval", cfg.episodes_per_eval);
  cfg.max_ticks_per_episode = j.value("max_ticks_per_episode", cfg.max_ticks_per_episode);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.use_true_dynamics = j.value("use_true_dynamics", cfg.use_true_dynamics);
  if (j.contains("logs_dir")) cfg.logs_dir = j.at("logs_dir").get<std::string>();
  if (j.contains("dynamics_path")) cfg.dynamics_path = j.at("dynamics_path").get<std::string>();
  if (j.contains("weights_path")) cfg.weights_path = j.at("weights_path").get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (cfg.episodes_per_eval < 1) throw std::invalid_argument("episodes_per_eval must be >= 1");
  return cfg;
}

CollectSummary cmd_collect(const ExperimentConfig& cfg, int episodes,
                           const CollectPolicy& policy, bool record_frames) {
  if (episodes <= 0) throw std::invalid_argument("cmd_collect: episodes must be > 0");
  fs::create_directories(cfg.logs_dir);

  EstimatedDynamics dyn;
  if (policy.kind == CollectPolicy::Kind::Planner) dyn = planner_dynamics(cfg);

  CollectSummary summary;
  summary.episodes = episodes;
  double score_sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    uint64_t seed = cfg.master_seed + static_cast<uint64_t>(ep);
    Rng env_rng(seed, 0);
    Rng policy_rng(seed, 1);

    Policy pol;
    if (policy.kind == CollectPolicy::Kind::Random) {
      pol = [&](const WorldState&) {
        return policy_rng.uniform() < policy.p_flap ? Action::Flap : Action::Noop;
      };
    } else {
      DirichletParams prior = uniform_prior();
      pol = [&, prior](const WorldState& s) {
        auto [a, diag] = get_action(s, prior, cfg.planner, dyn, cfg.env, policy_rng);
        return a;
      };
    }

    EpisodeResult res = run_episode(cfg.env, pol, cfg.max_ticks_per_episode, env_rng,
                                    record_frames);
    fs::path base = cfg.logs_dir / episode_file(ep);
    write_log_jsonl(res.log, base.string() + ".jsonl");
    if (record_frames) write_frames(res.frames, base.string() + ".frames");
    summary.total_ticks += static_cast<int64_t>(res.log.records.size());
    score_sum += static_cast<double>(res.final_score);
  }
  summary.mean_score = score_sum / episodes;
  return summary;
}

EstimatedDynamics cmd_estimate(const ExperimentConfig& cfg) {
  std::vector<TrajectoryLog> logs = load_logs(cfg.logs_dir);
  double g_hat = estimate_gravity(logs, cfg.env);
  EstimatedDynamics dyn = fit_action_gaussians(logs, g_hat, cfg.env);
  if (!cfg.dynamics_path.parent_path().empty())
    fs::create_directories(cfg.dynamics_path.parent_path());
  save_dynamics(dyn, cfg.dynamics_path);
  return dyn;
}

TrainSummary cmd_train_prior(const ExperimentConfig& cfg) {
  std::vector<TrajectoryLog> logs = load_logs(cfg.logs_dir);
  std::vector<std::vector<Frame>> frames;
  frames.reserve(logs.size());
  {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(cfg.logs_dir)) {
      if (e.path().extension() == ".jsonl") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      fs::path sidecar = p;
      sidecar.replace_extension(".frames");
      if (!fs::exists(sidecar))
        throw MissingArtifactError("missing frame sidecar (collect with frames enabled): " +
                                 sidecar.string());
      frames.push_back(read_frames(sidecar));
    }
  }

  Dataset ds = build_dataset(logs, std::move(frames), cfg.train.delta_window);
  if (ds.examples.empty())
    throw std::runtime_error("empty training dataset after negative-reward filtering");

  Cnn<float> net;
  net.alpha_floor = static_cast<float>(cfg.train.alpha_floor);
  net.init_weights(cfg.train.rng_seed);
  TrainSummary summary;
  summary.examples = ds.examples.size();
  summary.loss_history = sgd_fit(net, ds, cfg.train);

  if (!cfg.weights_path.parent_path().empty())
    fs::create_directories(cfg.weights_path.parent_path());
  save_params(net, cfg.weights_path);

  fs::path csv = cfg.weights_path;
  csv.replace_extension(".loss.csv");
  std::ofstream out(csv);
  out << "epoch,loss\n";
  for (size_t i = 0; i < summary.loss_history.size(); ++i)
    out << i << ',' << fmt_double(summary.loss_history[i]) << '\n';
  return summary;
}

EvalResult cmd_eval(const ExperimentConfig& cfg, AgentKind agent) {
  cfg.planner.validate();
  EstimatedDynamics dyn = planner_dynamics(cfg);

  Cnn<float> net;
  if (agent == AgentKind::PbCnn) {
    if (!fs::exists(cfg.weights_path))
      throw MissingArtifactError("missing weight file (run `ipp train-prior` first): " +
                               cfg.weights_path.string());
    load_params(net, cfg.weights_path);
  }

  EvalResult result;
  result.agent = agent_name(agent);
  bool sample_mode = cfg.planner.budget_samples.has_value() && *cfg.planner.budget_samples > 0;
  result.budget_kind = sample_mode ? "samples" : "ms";
  result.budget = sample_mode ? static_cast<double>(*cfg.planner.budget_samples)
                              : *cfg.planner.budget_ms;
  result.seed = cfg.master_seed;

  std::vector<double> decision_us;
  DirichletParams uniform = uniform_prior();

  for (int ep = 0; ep < cfg.episodes_per_eval; ++ep) {
    uint64_t seed = cfg.master_seed + static_cast<uint64_t>(ep);
    Rng env_rng(seed, 0);
    Rng planner_rng(seed, 1);
    std::vector<Frame> history;

    Policy pol = [&](const WorldState& s) {
      DirichletParams prior = uniform;
      if (agent == AgentKind::PbCnn) {
        Frame native = render(s, 256, 256, cfg.env);
        history.push_back(downsample(native, FrameStack::kSize, FrameStack::kSize));
        if (history.size() > FrameStack::kFrames)
          history.erase(history.begin());
        FrameStack fs_in = preprocess(history);
        std::vector<float> alpha = cnn_predict(net, fs_in.values);
        prior.alpha.assign(alpha.begin(), alpha.end());
      }
      auto [a, diag] = get_action(s, prior, cfg.planner, dyn, cfg.env, planner_rng);
      decision_us.push_back(static_cast<double>(diag.elapsed_us));
      return a;
    };

    EpisodeResult res = run_episode(cfg.env, pol, cfg.max_ticks_per_episode, env_rng, false);
    result.scores.push_back(res.final_score);
  }

  double sum = 0.0;
  for (int64_t s : result.scores) sum += static_cast<double>(s);
  result.mean = sum / static_cast<double>(result.scores.size());
  double ss = 0.0;
  for (int64_t s : result.scores) {
    double d = static_cast<double>(s) - result.mean;
    ss += d * d;
  }
  result.stddev = result.scores.size() > 1
                      ? std::sqrt(ss / static_cast<double>(result.scores.size() - 1))
                      : 0.0;
  if (!decision_us.empty()) {
    double t = 0.0;
    for (double v : decision_us) t += v;
    result.decision_us_mean = t / static_cast<double>(decision_us.size());
    std::vector<double> sorted = decision_us;
    std::sort(sorted.begin(), sorted.end());
    size_t idx = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
    result.decision_us_p95 = sorted[std::min(idx, sorted.size() - 1)];
  }
  return result;
}

std::string EvalResult::to_json() const {
  json j{{"agent", agent},
         {"budget_kind", budget_kind},
         {"budget", budget},
         {"scores", scores},
         {"mean", mean},
         {"std", stddev},
         {"decision_us_mean", decision_us_mean},
         {"decision_us_p95", decision_us_p95},
         {"seed", seed}};
  return j.dump(2);
}

std::string EvalResult::csv_header() { return "agent,budget_kind,budget,mean_score,std,seed"; }

std::string EvalResult::csv_row() const {
  return agent + ',' + budget_kind + ',' + fmt_double(budget) + ',' + fmt_double(mean) + ',' +
         fmt_double(stddev) + ',' + std::to_string(seed);
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<AgentKind>& agents,
              const std::vector<double>& budgets, bool budget_is_samples,
              const fs::path& csv_out) {
  if (budgets.empty()) throw std::invalid_argument("cmd_sweep: budgets must be non-empty");
  std::ofstream out(csv_out);
  if (!out) throw std::runtime_error("cannot open for write: " + csv_out.string());
  out << EvalResult::csv_header() << '\n';
  int failures = 0;
  for (AgentKind agent : agents) {
    for (double b : budgets) {
      ExperimentConfig cell = cfg;
      if (budget_is_samples) {
        cell.planner.budget_samples = static_cast<int64_t>(b);
        cell.planner.budget_ms.reset();
      } else {
        cell.planner.budget_samples.reset();
        cell.planner.budget_ms = b;
      }
      try {
        EvalResult r = cmd_eval(cell, agent);
        out << r.csv_row() << '\n';
      } catch (const std::exception& e) {
        std::cerr << "sweep cell failed (" << agent_name(agent) << ", budget " << b
                  << "): " << e.what() << '\n';
        ++failures;
      }
    }
  }
  return failures;
}

}  // namespace ipp
