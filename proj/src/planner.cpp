#include "ipp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ipp {

void DirichletParams::validate() const {
  if (alpha.size() != static_cast<size_t>(kNumActions))
    throw std::invalid_argument("alpha length must equal number of actions");
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("alpha components must be > 0");
  }
}

DirichletParams uniform_prior(int n_actions) {
  if (n_actions < 2) throw std::invalid_argument("need at least 2 actions");
  return DirichletParams{std::vector<double>(static_cast<size_t>(n_actions), 1.0)};
}

void PlannerConfig::validate() const {
  if (initial_horizon_c < 1) throw std::invalid_argument("initial_horizon_c must be >= 1");
  if (horizon_increment_delta < 0)
    throw std::invalid_argument("horizon_increment_delta must be >= 0");
  bool has_samples = budget_samples.has_value() && *budget_samples > 0;
  bool has_ms = budget_ms.has_value() && *budget_ms > 0.0;
  if (!has_samples && !has_ms) throw std::invalid_argument("a positive budget is required");
}

std::vector<double> dirichlet_sample(const DirichletParams& alpha, Rng& rng) {
  alpha.validate();
  std::vector<double> theta(alpha.alpha.size());
  double sum = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    theta[i] = rng.gamma(alpha.alpha[i]);
    sum += theta[i];
  }
  for (double& t : theta) t /= sum;
  return theta;
}

bool simulate(const WorldState& s, std::span<const double> impacts, int h,
              const EstimatedDynamics& dyn, const EnvConfig& cfg) {
  if (static_cast<int>(impacts.size()) != h)
    throw std::invalid_argument("simulate: impacts length must equal h");
  double y = s.bird_y;
  double vy = s.bird_vy;
  for (int k = 0; k < h; ++k) {
    vy = std::clamp(vy + dyn.g_hat + impacts[static_cast<size_t>(k)], -cfg.terminal_velocity,
                    cfg.terminal_velocity);
    y += vy;
    double scroll = cfg.scroll_speed * (k + 1);
    if (collided_at(s.bird_x, y, s.obstacles, scroll, cfg)) return true;
  }
  return false;
}

PlanSample sample_actions(const WorldState& s, const DirichletParams& alpha, int h,
                          const EstimatedDynamics& dyn, const EnvConfig& cfg, Rng& rng) {
  if (!s.alive) throw std::logic_error("sample_actions: terminal state");
  if (h < 1) throw std::invalid_argument("sample_actions: h must be >= 1");

  std::vector<double> theta = dirichlet_sample(alpha, rng);
  PlanSample plan;
  plan.horizon_h = h;
  plan.actions.resize(static_cast<size_t>(h));
  plan.impacts.resize(static_cast<size_t>(h));
  for (int k = 0; k < h; ++k) {
    double u = rng.uniform();
    double acc = 0.0;
    int a = kNumActions - 1;
    for (int i = 0; i < kNumActions; ++i) {
      acc += theta[static_cast<size_t>(i)];
      if (u < acc) {
        a = i;
        break;
      }
    }
    plan.actions[static_cast<size_t>(k)] = static_cast<Action>(a);
    plan.impacts[static_cast<size_t>(k)] = sample_impact(dyn, static_cast<Action>(a), rng);
  }
  plan.collided = simulate(s, plan.impacts, h, dyn, cfg);
  return plan;
}

DirichletParams update_alpha(const DirichletParams& alpha, const PlanSample& plan) {
  if (plan.collided) throw std::logic_error("update_alpha: plan with c_h == true");
  DirichletParams next = alpha;
  for (Action a : plan.actions) next.alpha[static_cast<size_t>(a)] += 1.0;
  return next;
}

ActionDistribution estimate_conditional(const SampleStore& m) {
  ActionDistribution d;
  d.counts.assign(kNumActions, 0);
  d.probabilities.assign(kNumActions, 0.0);
  for (const PlanSample& p : m.plans) {
    d.counts[static_cast<size_t>(p.actions.front())] += 1;
  }
  int64_t total = 0;
  for (int64_t c : d.counts) total += c;
  if (total == 0) {
    d.undefined = true;
  } else {
    for (int i = 0; i < kNumActions; ++i)
      d.probabilities[static_cast<size_t>(i)] =
          static_cast<double>(d.counts[static_cast<size_t>(i)]) / static_cast<double>(total);
  }
  return d;
}

namespace {

// Ties broken by lowest index.
int argmax(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

int prior_mean_argmax(const DirichletParams& prior) {
  return argmax(prior.alpha);  // argmax of alpha/sum == argmax of alpha
}

}  // namespace

std::pair<Action, PlannerDiagnostics> get_action(const WorldState& s,
                                                 const DirichletParams& prior_alpha,
                                                 const PlannerConfig& cfg,
                                                 const EstimatedDynamics& dyn,
                                                 const EnvConfig& env_cfg, Rng& rng) {
  if (!s.alive) throw std::logic_error("get_action: terminal state");
  cfg.validate();
  prior_alpha.validate();

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const bool sample_mode = cfg.budget_samples.has_value() && *cfg.budget_samples > 0;
  const auto deadline =
      sample_mode ? clock::time_point::max()
                  : start + std::chrono::duration_cast<clock::duration>(
                                std::chrono::duration<double, std::milli>(*cfg.budget_ms));

  DirichletParams alpha = prior_alpha;  // caller's prior is never mutated
  SampleStore m;
  int h = cfg.initial_horizon_c;
  int64_t samples = 0;

  for (;;) {
    if (sample_mode) {
      if (samples >= *cfg.budget_samples) break;
    } else if (clock::now() >= deadline) {
      break;
    }
    PlanSample plan = sample_actions(s, alpha, h, dyn, env_cfg, rng);
    ++samples;
    if (!plan.collided) {
      alpha = update_alpha(alpha, plan);
      h += cfg.horizon_increment_delta;
      m.plans.push_back(std::move(plan));
    }
  }

  ActionDistribution dist = estimate_conditional(m);
  PlannerDiagnostics diag;
  diag.samples = samples;
  diag.survivors = static_cast<int64_t>(m.plans.size());
  diag.horizon_final = h;
  diag.alpha_final = alpha.alpha;

  int chosen;
  int64_t best_count = dist.undefined ? 0 : *std::max_element(dist.counts.begin(), dist.counts.end());
  bool tied = !dist.undefined &&
              std::count(dist.counts.begin(), dist.counts.end(), best_count) > 1;
  if (dist.undefined || tied) {
    chosen = prior_mean_argmax(prior_alpha);
    diag.fallback = true;
  } else {
    chosen = argmax(dist.probabilities);
  }

  diag.elapsed_us =
      std::chrono::duration_cast<std::chrono::microseconds>(clock::now() - start).count();
  return {static_cast<Action>(chosen), diag};
}

std::string PlannerDiagnostics::to_json() const {
  nlohmann::json j{{"samples", samples},     {"survivors", survivors},
                   {"final_h", horizon_final}, {"final_alpha", alpha_final},
                   {"elapsed_us", elapsed_us}, {"fallback", fallback}};
  return j.dump();
}

}  // namespace ipp
