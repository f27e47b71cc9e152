#include "entropic/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "entropic/error.hpp"
#include "entropic/theory.hpp"

namespace entropic {

namespace {

constexpr double kLogitLimit = 1e3;

enum Stream : std::uint32_t { kTaskStream = 1, kInitStream = 2, kSampleStream = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kConfig, msg);
}

// One state's training data between behavior refreshes.
struct Batch {
  std::vector<double> weights;
  std::vector<std::size_t> samples;
  AdvantageProfile profile;
  bool active = true;
};

Batch exact_batch(const ScenarioConfig& cfg, const BinaryTask& task, const SoftmaxPolicy& source) {
  Batch b;
  b.weights = probs(source);
  try {
    b.profile = exact_advantages(task, source, cfg.advantage_scale);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateTask) throw;
    b.active = false;
    b.profile = profile_from_vector(std::vector<double>(task.num_actions, 0.0));
    return b;
  }
  if (cfg.sample_filter == SampleFilter::kPositiveOnly) {
    std::fill(b.profile.advantages.begin(), b.profile.advantages.end(), b.profile.a_pos);
    b.profile.is_positive.assign(task.num_actions, true);
  } else if (cfg.sample_filter == SampleFilter::kNegativeOnly) {
    std::fill(b.profile.advantages.begin(), b.profile.advantages.end(), b.profile.a_neg);
    b.profile.is_positive.assign(task.num_actions, false);
  }
  return b;
}

Batch sampled_batch(const ScenarioConfig& cfg, const BinaryTask& task, const SoftmaxPolicy& source,
                    std::mt19937_64& rng) {
  const std::size_t k = cfg.mode.group_size;
  const auto tempered = tempered_probs(source, cfg.mode.temperature);
  std::discrete_distribution<std::size_t> pick(tempered.begin(), tempered.end());
  Batch b;
  b.samples.resize(k);
  std::vector<double> rewards(k);
  for (std::size_t i = 0; i < k; ++i) {
    b.samples[i] = pick(rng);
    rewards[i] = task.reward(b.samples[i]);
  }
  const auto adv = grpo_advantages(rewards);
  std::vector<double> per_action(task.num_actions, 0.0);
  b.weights.assign(task.num_actions, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    per_action[b.samples[i]] = adv[i];
    b.weights[b.samples[i]] += 1.0 / static_cast<double>(k);
  }
  b.profile = profile_from_vector(std::move(per_action));
  return b;
}

std::vector<bool> keep_mask(const MaskSpec& mask, std::span<const double> pi,
                            const AdvantageProfile& adv) {
  const double split = mask.prob_split.value_or(1.0 / static_cast<double>(pi.size()));
  std::vector<bool> keep(pi.size(), true);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double A = adv.advantages[a];
    const bool high = pi[a] > split;
    if (A > 0.0 && ((high && mask.p_hi) || (!high && mask.p_lo))) keep[a] = false;
    if (A < 0.0 && ((high && mask.n_hi) || (!high && mask.n_lo))) keep[a] = false;
  }
  return keep;
}

double positive_mass(const BinaryTask& task, std::span<const double> pi) {
  double m = 0.0;
  for (std::size_t a : task.positive_set) m += pi[a];
  return m;
}

// Ensemble loop gain under the exact unit-scale profile of the current policy.
double ensemble_loop_gain(const ScenarioConfig& cfg, const PolicyEnsemble& ens,
                          const std::vector<BinaryTask>& tasks) {
  double c0 = 0.0;
  for (std::size_t s = 0; s < ens.num_states(); ++s) {
    try {
      const auto prof = exact_advantages(tasks[s], ens.policies()[s]);
      c0 += ens.state_weights()[s] *
            loop_gain(compute_s_terms(ens.policies()[s], prof), prof.a_pos, prof.h, cfg.eta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateTask) throw;
    }
  }
  return c0;
}

}  // namespace

ControllerState ControllerSpec::initial_state() const {
  ControllerState st;
  st.k_p = k_p;
  st.k_i = k_i;
  st.target_entropy = target_entropy;
  st.clamp_enabled = clamp;
  st.anti_windup = anti_windup;
  return st;
}

void ScenarioConfig::validate() const {
  if (task.num_actions < 2) config_error("task.num_actions must be >= 2");
  if (task.positive_set.empty()) {
    if (task.num_positive < 1 || task.num_positive >= task.num_actions) {
      config_error("task.num_positive must lie in [1, num_actions - 1]");
    }
  } else {
    BinaryTask t{task.num_actions, task.positive_set, task.reward_pos, task.reward_neg};
    try {
      t.validate();
    } catch (const Error& e) {
      config_error(std::string("task: ") + e.what());
    }
  }
  if (!(task.reward_pos > task.reward_neg)) config_error("task.reward_pos must exceed reward_neg");
  if (num_states < 1) config_error("num_states must be >= 1");
  if (policy_init.kind == InitKind::kRandom && !(policy_init.scale >= 0.0)) {
    config_error("policy_init.scale must be >= 0");
  }
  if (policy_init.kind == InitKind::kPeaked && !std::isfinite(policy_init.concentration)) {
    config_error("policy_init.concentration must be finite");
  }
  if (policy_init.kind == InitKind::kExplicit) {
    if (policy_init.logits.size() != task.num_actions) {
      config_error("policy_init.logits must have num_actions entries");
    }
    for (double x : policy_init.logits) {
      if (!std::isfinite(x)) config_error("policy_init.logits must be finite");
    }
  }
  if (mode.kind == ModeKind::kSampled) {
    if (mode.group_size < 2) config_error("mode.group_size must be >= 2");
    if (!(mode.temperature > 0.0)) config_error("mode.temperature must be > 0");
    if (sample_filter != SampleFilter::kNone) {
      config_error("sample_filter requires exact mode");
    }
  }
  try {
    loss.validate();
  } catch (const Error& e) {
    config_error(std::string("loss: ") + e.what());
  }
  if (!(controller.k_p >= 0.0)) config_error("controller.k_p must be >= 0");
  if (!(controller.k_i >= 0.0)) config_error("controller.k_i must be >= 0");
  if (!(controller.target_entropy >= 0.0)) config_error("controller.target_entropy must be >= 0");
  if (staleness < 1) config_error("staleness must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) config_error("eta must be > 0");
  if (steps < 1) config_error("steps must be >= 1");
  if (controller_start_step > steps) config_error("controller_start_step must lie in [0, steps]");
  if (mask.prob_split && !(*mask.prob_split > 0.0 && *mask.prob_split < 1.0)) {
    config_error("mask.prob_split must lie in (0, 1)");
  }
}

std::vector<BinaryTask> build_tasks(const ScenarioConfig& config) {
  std::vector<BinaryTask> tasks;
  tasks.reserve(config.num_states);
  auto rng = make_rng(config.task.seed.value_or(config.seed), kTaskStream);
  for (std::size_t s = 0; s < config.num_states; ++s) {
    BinaryTask t;
    t.num_actions = config.task.num_actions;
    t.reward_pos = config.task.reward_pos;
    t.reward_neg = config.task.reward_neg;
    if (!config.task.positive_set.empty()) {
      t.positive_set = config.task.positive_set;
    } else {
      std::vector<std::size_t> actions(t.num_actions);
      std::iota(actions.begin(), actions.end(), std::size_t{0});
      std::shuffle(actions.begin(), actions.end(), rng);
      t.positive_set.assign(actions.begin(), actions.begin() + config.task.num_positive);
      std::sort(t.positive_set.begin(), t.positive_set.end());
    }
    t.validate();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

PolicyEnsemble build_initial_policies(const ScenarioConfig& config) {
  const auto& init = config.policy_init;
  const std::size_t n = config.task.num_actions;
  auto rng = make_rng(init.seed.value_or(config.seed), kInitStream);
  std::vector<SoftmaxPolicy> policies;
  policies.reserve(config.num_states);
  for (std::size_t s = 0; s < config.num_states; ++s) {
    std::vector<double> logits(n, 0.0);
    switch (init.kind) {
      case InitKind::kUniform:
        break;
      case InitKind::kRandom: {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& x : logits) x = init.scale * normal(rng);
        break;
      }
      case InitKind::kPeaked: {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        logits[pick(rng)] = init.concentration;
        break;
      }
      case InitKind::kExplicit:
        logits = init.logits;
        break;
    }
    policies.emplace_back(std::move(logits));
  }
  return PolicyEnsemble(std::move(policies));
}

Trace run_scenario(const ScenarioConfig& config, const StepObserver& observer) {
  config.validate();
  const auto tasks = build_tasks(config);
  PolicyEnsemble ens = build_initial_policies(config);
  const std::size_t S = ens.num_states();
  const bool off = is_off_policy(config.loss.kind);
  const bool sampled = config.mode.kind == ModeKind::kSampled;
  const std::size_t refresh = off ? config.staleness : 1;
  const auto weights = ens.state_weights();
  auto sample_rng = make_rng(config.seed, kSampleStream);

  ControllerState ctrl = config.controller.initial_state();
  std::vector<SoftmaxPolicy> behaviors = ens.policies();
  std::vector<Batch> batches(S);
  std::vector<AdvantageProfile> profiles(S);
  std::vector<bool> active(S, true);
  bool warned_empty = false;

  Trace trace;
  trace.reserve(config.steps);
  double h_exact = ens.entropy();

  for (std::size_t t = 0; t < config.steps; ++t) {
    if (t % refresh == 0) {
      for (std::size_t s = 0; s < S; ++s) {
        behaviors[s] = ens.policies()[s];
        batches[s] = sampled ? sampled_batch(config, tasks[s], behaviors[s], sample_rng)
                             : exact_batch(config, tasks[s], behaviors[s]);
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      profiles[s] = batches[s].profile;
      active[s] = batches[s].active;
    }

    StepRecord rec;
    rec.step = static_cast<std::int64_t>(t);
    rec.entropy_exact = h_exact;
    if (sampled) {
      double h_mc = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const auto pi = probs(ens.policies()[s]);
        double surprisal = 0.0;
        for (std::size_t a : batches[s].samples) surprisal -= std::log(pi[a]);
        h_mc += weights[s] * surprisal / static_cast<double>(batches[s].samples.size());
      }
      rec.entropy_mc = h_mc;
    } else {
      rec.entropy_mc = h_exact;
    }

    const double measured = sampled ? rec.entropy_mc : rec.entropy_exact;
    rec.error_e = measured - config.controller.target_entropy;
    double alpha = 0.0;
    const bool controlled = config.controller.enabled && t >= config.controller_start_step;
    if (controlled) {
      if (t == config.controller_start_step) ctrl = reset(ctrl);
      const auto out = controller_step(ctrl, measured);
      ctrl = out.state;
      alpha = out.alpha;
      rec.integral_I = ctrl.integral;
    }
    rec.alpha = alpha;

    if (observer) {
      StepContext ctx;
      ctx.step = t;
      ctx.policies = &ens;
      ctx.behaviors = &behaviors;
      ctx.advantages = &profiles;
      ctx.tasks = &tasks;
      ctx.active = &active;
      ctx.alpha = alpha;
      ctx.config = &config;
      observer(ctx);
    }

    const double c0 = ensemble_loop_gain(config, ens, tasks);
    const double b = c0 * config.controller.k_i;
    rec.lyapunov_V = (controlled && b > 0.0 && b < 1.0)
                         ? lyapunov_value(rec.error_e, rec.integral_I, b)
                         : rec.error_e * rec.error_e;

    // The controller output may exceed [−1, 1] with clamping disabled; the
    // class weights are then applied as computed.
    double predicted = 0.0;
    double delta_bias = 0.0;
    double accuracy = 0.0;
    std::vector<std::vector<double>> deltas(S);
    std::size_t kept_total = 0;
    for (std::size_t s = 0; s < S; ++s) {
      const auto& policy = ens.policies()[s];
      const auto pi = probs(policy);
      accuracy += weights[s] * positive_mass(tasks[s], pi);
      if (!active[s]) {
        deltas[s].assign(pi.size(), 0.0);
        continue;
      }
      const auto mu = probs(behaviors[s]);
      if (config.sample_filter != SampleFilter::kNone) {
        deltas[s] = uncentered_pg_update(policy, profiles[s], std::clamp(alpha, -1.0, 1.0),
                                         config.eta)
                        .delta_logits;
        kept_total += pi.size();
      } else {
        auto beta = loss_coefficients(config.loss, pi, mu, batches[s].weights, profiles[s], alpha,
                                      /*clip_tiny_behavior=*/true);
        if (config.mask.any()) {
          const auto keep = keep_mask(config.mask, pi, profiles[s]);
          for (std::size_t a = 0; a < beta.size(); ++a) {
            if (!keep[a]) beta[a] = 0.0;
            else ++kept_total;
          }
        } else {
          kept_total += beta.size();
        }
        deltas[s] = update_from_coefficients(pi, beta, config.eta).delta_logits;
      }
      if (off) {
        for (std::size_t a = 0; a < pi.size(); ++a) {
          if (!(mu[a] > 1e-12)) continue;
          const double rho = pi[a] / mu[a];
          if (inside_clip_band(rho, config.loss.eps_low, config.loss.eps_high)) {
            delta_bias += weights[s] * batches[s].weights[a] * rho * profiles[s].advantages[a];
          }
        }
      } else {
        for (std::size_t a = 0; a < pi.size(); ++a) {
          delta_bias += weights[s] * batches[s].weights[a] * profiles[s].advantages[a];
        }
      }
      predicted += weights[s] * first_order_entropy_change(policy, deltas[s]);
    }
    if (kept_total == 0 && !warned_empty && config.mask.any()) {
      std::cerr << "warning: every action group is masked; updates are zero\n";
      warned_empty = true;
    }
    rec.predicted_dH = predicted;
    rec.delta_bias = delta_bias;
    rec.accuracy_proxy = accuracy;

    for (std::size_t s = 0; s < S; ++s) {
      const auto& logits = ens.policies()[s].logits();
      std::vector<double> next(logits.begin(), logits.end());
      for (std::size_t a = 0; a < next.size(); ++a) {
        next[a] += deltas[s][a];
        if (!std::isfinite(next[a]) || std::abs(next[a]) > kLogitLimit) {
          std::ostringstream msg;
          msg << "divergence at step " << t << ": state " << s << " action " << a << " logit "
              << next[a];
          throw Error(ErrorCode::kDivergence, msg.str());
        }
      }
      ens.policies()[s] = SoftmaxPolicy(std::move(next));
    }
    const double h_next = ens.entropy();
    rec.observed_dH = h_next - h_exact;
    h_exact = h_next;
    trace.push_back(rec);
  }
  return trace;
}

Trace run_masking_ablation(const ScenarioConfig& config, const MaskSpec& mask) {
  ScenarioConfig cfg = config;
  cfg.controller.enabled = false;
  cfg.mask = mask;
  return run_scenario(cfg);
}

Trace run_plug_and_play(const ScenarioConfig& config) {
  if (config.controller_start_step == 0 || config.controller_start_step > config.steps) {
    throw Error(ErrorCode::kConfig, "run_plug_and_play: controller_start_step must lie in [1, steps]");
  }
  ScenarioConfig cfg = config;
  cfg.controller.enabled = true;
  return run_scenario(cfg);
}

std::vector<SweepResult> sweep(const std::vector<ScenarioConfig>& configs, std::size_t max_workers) {
  if (configs.empty()) throw Error(ErrorCode::kInvalidInput, "sweep: empty config list");
  std::vector<SweepResult> results(configs.size());
  std::size_t workers = max_workers ? max_workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      results[i].index = i;
      try {
        results[i].trace = run_scenario(configs[i]);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace entropic
