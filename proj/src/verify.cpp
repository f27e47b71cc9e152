#include "entropic/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "entropic/advantages.hpp"
#include "entropic/config.hpp"
#include "entropic/error.hpp"
#include "entropic/losses.hpp"
#include "entropic/policy.hpp"
#include "entropic/sim.hpp"
#include "entropic/theory.hpp"
#include "entropic/trace_io.hpp"
#include "oracles.hpp"

namespace entropic {

namespace {

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

using Vec = std::vector<double>;

CriterionResult header(std::string id, std::string suite, std::string title) {
  CriterionResult r;
  r.id = std::move(id);
  r.suite = std::move(suite);
  r.title = std::move(title);
  return r;
}

// ---------------------------------------------------------------------------
// Random instances

struct Instance {
  SoftmaxPolicy policy = SoftmaxPolicy::uniform(2);
  BinaryTask task;
  AdvantageProfile adv;
};

Instance random_instance(std::mt19937_64& rng, double logit_range) {
  std::uniform_int_distribution<std::size_t> size(3, 8);
  std::uniform_real_distribution<double> logit(-logit_range, logit_range);
  const std::size_t n = size(rng);
  Vec logits(n);
  for (double& x : logits) x = logit(rng);
  std::vector<std::size_t> actions(n);
  for (std::size_t a = 0; a < n; ++a) actions[a] = a;
  std::shuffle(actions.begin(), actions.end(), rng);
  std::uniform_int_distribution<std::size_t> npos(1, n - 1);
  Instance inst;
  inst.task.num_actions = n;
  inst.task.positive_set.assign(actions.begin(), actions.begin() + npos(rng));
  inst.policy = SoftmaxPolicy(std::move(logits));
  inst.adv = exact_advantages(inst.task, inst.policy);
  return inst;
}

SoftmaxPolicy perturbed(const SoftmaxPolicy& p, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> noise(0.0, sd);
  Vec logits(p.logits().begin(), p.logits().end());
  for (double& x : logits) x += noise(rng);
  return SoftmaxPolicy(std::move(logits));
}

bool near_clip_boundary(std::span<const double> pi, std::span<const double> mu, double el,
                        double eh) {
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double rho = pi[a] / mu[a];
    if (std::abs(rho - (1.0 - el)) < 1e-4 || std::abs(rho - (1.0 + eh)) < 1e-4) return true;
  }
  return false;
}

bool near_tau(std::span<const double> pi, double tau) {
  for (double p : pi) {
    if (std::abs(p - tau) < 1e-4) return true;
  }
  return false;
}

Vec logits_of(const SoftmaxPolicy& p) { return Vec(p.logits().begin(), p.logits().end()); }

// Relative error with a 1e-6 floor on the reference scale, so an all-zero
// reference is compared in absolute terms.
double grad_error(const Vec& analytic, const Vec& reference) {
  double num = 0.0, den = 1e-6;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    num = std::max(num, std::abs(analytic[i] - reference[i]));
    den = std::max(den, std::abs(reference[i]));
  }
  return num / den;
}

Vec scaled(Vec v, double s) {
  for (double& x : v) x *= s;
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 1

CriterionResult gradient_suite(bool fault) {
  CriterionResult r = header("1", "gradients", "gradient correctness vs central finite differences");
  const double tol = 1e-6;
  const double eta = 0.01;
  const double fault_scale = fault ? 1.0 + 1e-3 : 1.0;
  const LossVariant clip{LossKind::kOffPolicyClipped, 0.95, 0.2, 0.2};
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> boost(0.0, 8.0);
  std::uniform_real_distribution<double> tau_dist(0.5, 0.95);
  std::map<std::string, double> worst;
  std::map<std::string, int> excluded;
  const int kInstances = 100;

  auto fd_update = [&](auto&& loss, const Vec& x) {
    return scaled(oracle::central_gradient(loss, x), -eta);
  };

  // weighted_pg_update
  for (int i = 0; i < kInstances; ++i) {
    const Instance inst = random_instance(rng, 3.0);
    const double alpha = unit(rng);
    const Vec x = logits_of(inst.policy);
    const Vec frozen = probs(inst.policy);
    const Vec fd = fd_update(
        [&](const Vec& t) { return oracle::weighted_loss(t, frozen, inst.adv.advantages, alpha); }, x);
    const Vec an = scaled(weighted_pg_update(inst.policy, inst.adv, alpha, eta).delta_logits, fault_scale);
    worst["weighted_pg"] = std::max(worst["weighted_pg"], grad_error(an, fd));
  }

  // off_policy_update
  for (int i = 0; i < kInstances;) {
    const Instance inst = random_instance(rng, 3.0);
    const SoftmaxPolicy mu = perturbed(inst.policy, rng, 0.15);
    const Vec pi = probs(inst.policy), m = probs(mu);
    if (near_clip_boundary(pi, m, clip.eps_low, clip.eps_high)) {
      ++excluded["off_policy"];
      continue;
    }
    ++i;
    const double alpha = unit(rng);
    const Vec fd = fd_update(
        [&](const Vec& t) {
          return oracle::clipped_loss(t, m, inst.adv.advantages, alpha, clip.eps_low, clip.eps_high);
        },
        logits_of(inst.policy));
    const Vec an = scaled(off_policy_update(inst.policy, mu, inst.adv, alpha, eta, clip).delta_logits,
                          fault_scale);
    worst["off_policy"] = std::max(worst["off_policy"], grad_error(an, fd));
  }

  // highprob_update
  for (int i = 0; i < kInstances;) {
    Instance inst = random_instance(rng, 3.0);
    Vec x = logits_of(inst.policy);
    x[0] += boost(rng);
    inst.policy = SoftmaxPolicy(x);
    inst.adv = exact_advantages(inst.task, inst.policy);
    const double tau = tau_dist(rng);
    const Vec frozen = probs(inst.policy);
    if (near_tau(frozen, tau)) {
      ++excluded["highprob"];
      continue;
    }
    ++i;
    const double alpha = unit(rng);
    const Vec fd = fd_update(
        [&](const Vec& t) { return oracle::highprob_loss(t, frozen, inst.adv.advantages, alpha, tau); },
        x);
    const Vec an = scaled(highprob_update(inst.policy, inst.adv, alpha, eta, tau).delta_logits, fault_scale);
    worst["highprob"] = std::max(worst["highprob"], grad_error(an, fd));
  }

  // unified_stopgrad_term (a gradient, compared without the −η factor)
  for (int i = 0; i < kInstances;) {
    Instance inst = random_instance(rng, 3.0);
    Vec x = logits_of(inst.policy);
    x[0] += boost(rng);
    inst.policy = SoftmaxPolicy(x);
    inst.adv = exact_advantages(inst.task, inst.policy);
    const SoftmaxPolicy sampling = perturbed(inst.policy, rng, 0.3);
    const double tau = tau_dist(rng);
    if (near_tau(probs(inst.policy), tau)) {
      ++excluded["stopgrad"];
      continue;
    }
    ++i;
    const double alpha = unit(rng);
    const Vec ps = probs(sampling);
    const Vec fd = oracle::central_gradient(
        [&](const Vec& t) { return oracle::stopgrad_loss(t, ps, inst.adv.advantages, alpha, tau); }, x);
    const Vec an = scaled(unified_stopgrad_term(inst.policy, sampling, inst.adv, alpha, tau), fault_scale);
    worst["stopgrad"] = std::max(worst["stopgrad"], grad_error(an, fd));
  }

  // off_policy_highprob_update
  for (int i = 0; i < kInstances;) {
    Instance inst = random_instance(rng, 3.0);
    Vec x = logits_of(inst.policy);
    x[0] += boost(rng);
    inst.policy = SoftmaxPolicy(x);
    inst.adv = exact_advantages(inst.task, inst.policy);
    const SoftmaxPolicy mu = perturbed(inst.policy, rng, 0.15);
    LossVariant v = clip;
    v.tau = tau_dist(rng);
    const Vec pi = probs(inst.policy), m = probs(mu);
    if (near_tau(pi, v.tau) || near_clip_boundary(pi, m, v.eps_low, v.eps_high)) {
      ++excluded["off_policy_highprob"];
      continue;
    }
    ++i;
    const double alpha = unit(rng);
    const Vec fd = fd_update(
        [&](const Vec& t) {
          return oracle::clipped_loss(t, m, inst.adv.advantages, 0.0, v.eps_low, v.eps_high) +
                 oracle::stopgrad_loss(t, m, inst.adv.advantages, alpha, v.tau);
        },
        x);
    const Vec an = scaled(off_policy_highprob_update(inst.policy, mu, inst.adv, alpha, eta, v).delta_logits,
                          fault_scale);
    worst["off_policy_highprob"] = std::max(worst["off_policy_highprob"], grad_error(an, fd));
  }

  // entropy_gradient
  for (int i = 0; i < kInstances; ++i) {
    std::uniform_int_distribution<std::size_t> size(3, 8);
    std::uniform_real_distribution<double> logit(-5.0, 5.0);
    Vec x(size(rng));
    for (double& v : x) v = logit(rng);
    const SoftmaxPolicy p(x);
    const Vec fd = oracle::central_gradient([](const Vec& t) { return oracle::entropy_of_logits(t); }, x);
    const Vec an = scaled(entropy_gradient(p), fault_scale);
    worst["entropy"] = std::max(worst["entropy"], grad_error(an, fd));
  }

  double overall = 0.0;
  std::ostringstream m;
  for (const auto& [name, err] : worst) {
    overall = std::max(overall, err);
    m << name << "=" << fmt("%.2e", err) << " ";
  }
  int total_excluded = 0;
  for (const auto& [name, count] : excluded) total_excluded += count;
  m << "(100 instances each, " << total_excluded << " boundary-adjacent redrawn)";
  r.measured = m.str();
  r.tolerance = "max relative error < 1e-06";
  r.pass = overall < tol;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 2

CriterionResult class_monotonicity_suite() {
  CriterionResult r = header("2", "class_monotonicity", "positive-only lowers / negative-only raises entropy");
  int violations_pos = 0, violations_neg = 0;
  int checks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (SampleFilter filter : {SampleFilter::kPositiveOnly, SampleFilter::kNegativeOnly}) {
      ScenarioConfig cfg;
      cfg.steps = 200;
      cfg.seed = seed;
      cfg.controller.enabled = false;
      cfg.sample_filter = filter;
      const double ln_n = std::log(static_cast<double>(cfg.task.num_actions));
      std::vector<double> prev;
      auto check = [&](const StepContext& ctx) {
        std::vector<double> now;
        for (const auto& p : ctx.policies->policies()) now.push_back(entropy(p));
        if (!prev.empty()) {
          for (std::size_t s = 0; s < now.size(); ++s) {
            const bool at_extreme = prev[s] < 1e-12 || prev[s] > ln_n - 1e-12;
            if (at_extreme) continue;
            ++checks;
            const bool ok = filter == SampleFilter::kPositiveOnly ? now[s] < prev[s] : now[s] > prev[s];
            if (!ok) ++(filter == SampleFilter::kPositiveOnly ? violations_pos : violations_neg);
          }
        }
        prev = std::move(now);
      };
      const Trace t = run_scenario(cfg, check);
      for (const auto& rec : t) {
        const bool ok = filter == SampleFilter::kPositiveOnly ? rec.observed_dH < 0 : rec.observed_dH > 0;
        if (!ok) ++(filter == SampleFilter::kPositiveOnly ? violations_pos : violations_neg);
        ++checks;
      }
    }
  }
  r.measured = fmt("violations: positive-only=%d negative-only=%d over %d per-state and ensemble step checks "
                   "(20 inits x 200 steps)",
                   violations_pos, violations_neg, checks);
  r.tolerance = "zero violations";
  r.pass = violations_pos == 0 && violations_neg == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 3

CriterionResult one_step_suite() {
  CriterionResult r = header("3", "one_step", "one-step entropy oracle: quadratic residual scaling");
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(3, 8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  int failures = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    ScenarioConfig cfg;
    cfg.num_states = 1;
    cfg.task.num_actions = size(rng);
    std::uniform_int_distribution<std::size_t> npos(1, cfg.task.num_actions - 1);
    cfg.task.num_positive = npos(rng);
    cfg.policy_init.scale = 1.5;
    cfg.steps = 1;
    cfg.seed = 1000 + i;
    const double h0 = build_initial_policies(cfg).entropy();
    cfg.controller.k_i = 0.0;
    cfg.controller.target_entropy = std::max(0.0, h0 - 0.9 * unit(rng));
    double residual[2];
    const double etas[2] = {0.02, 0.01};
    for (int k = 0; k < 2; ++k) {
      cfg.eta = etas[k];
      const StepRecord rec = run_scenario(cfg).front();
      residual[k] = std::abs(rec.observed_dH - rec.predicted_dH);
    }
    const double ratio = residual[0] / residual[1];
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    if (!(ratio >= 3.5)) ++failures;
  }
  r.measured = fmt("residual ratio r(0.02)/r(0.01): min=%.4f max=%.4f, %d/20 below 3.5", min_ratio,
                   max_ratio, failures);
  r.tolerance = "ratio >= 3.5 on all 20 instances";
  r.pass = failures == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Shared control-experiment helpers

double max_abs_error_from(const Trace& t, std::size_t from) {
  double m = 0.0;
  for (std::size_t k = from; k < t.size(); ++k) m = std::max(m, std::abs(t[k].error_e));
  return m;
}

double entropy_after(const StepRecord& rec) { return rec.entropy_exact + rec.observed_dH; }

// Ensemble steady-state prediction Σ w ηδC / (K_p Σ w C0) at the current step.
struct SteadyStateAccumulator {
  double sum = 0.0;
  int count = 0;
  std::size_t from = 0;

  void observe(const StepContext& ctx) {
    if (ctx.step < from) return;
    const auto& cfg = *ctx.config;
    const auto& ens = *ctx.policies;
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < ens.num_states(); ++s) {
      if (!(*ctx.active)[s]) continue;
      const auto& pol = ens.policies()[s];
      const auto& adv = (*ctx.advantages)[s];
      try {
        const STerms st = compute_s_terms(pol, adv);
        const OffPolicyBias bias = offpolicy_bias(pol, (*ctx.behaviors)[s], adv, cfg.loss);
        const double w = ens.state_weights()[s];
        num += w * cfg.eta * bias.delta * bias.c_factor;
        den += w * loop_gain(st, adv.a_pos, adv.h, cfg.eta);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kImportanceRatio) throw;
      }
    }
    if (std::abs(cfg.controller.k_p * den) < 1e-14) return;
    sum += num / (cfg.controller.k_p * den);
    ++count;
  }

  double mean() const { return count ? sum / count : std::numeric_limits<double>::quiet_NaN(); }
};

struct PlateauCheck {
  bool pass = false;
  std::string text;
};

// P-only plateau over the last 200 steps vs the steady-state prediction.
PlateauCheck plateau_check(ScenarioConfig cfg) {
  cfg.controller.k_i = 0.0;
  SteadyStateAccumulator acc;
  acc.from = cfg.steps - 200;
  const Trace t = run_scenario(cfg, [&](const StepContext& ctx) { acc.observe(ctx); });
  double mean_e = 0.0;
  for (std::size_t k = cfg.steps - 200; k < cfg.steps; ++k) mean_e += t[k].error_e;
  mean_e /= 200.0;
  const double predicted = acc.mean();
  const bool nonzero = std::abs(mean_e) > 0.005;
  const bool sign_ok = std::isfinite(predicted) && predicted != 0.0 &&
                       std::signbit(predicted) == std::signbit(mean_e);
  const double rel = std::isfinite(predicted) && predicted != 0.0
                         ? std::abs(mean_e - predicted) / std::abs(predicted)
                         : std::numeric_limits<double>::infinity();
  PlateauCheck out;
  out.pass = nonzero && sign_ok && rel <= 0.25;
  out.text = fmt("P plateau mean e=%.5g, predicted e_ss=%.5g (%d steps with a defined prediction), "
                 "rel diff=%.3g",
                 mean_e, predicted, acc.count, rel);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 4

CriterionResult onpolicy_convergence_suite() {
  CriterionResult r = header("4", "onpolicy_convergence", "on-policy P/PI convergence; uncontrolled drift");
  ScenarioConfig base;
  base.loss.kind = LossKind::kOnPolicyFull;
  ScenarioConfig p = base;
  p.controller.k_i = 0.0;
  ScenarioConfig pi = base;
  pi.controller.k_i = 0.01;
  ScenarioConfig open = base;
  open.controller.enabled = false;
  const auto results = sweep({p, pi, open});
  for (const auto& res : results) {
    if (res.error) {
      r.measured = "run failed: " + *res.error;
      r.tolerance = "|e_k| < 0.005 for k >= 1500";
      return r;
    }
  }
  const double err_p = max_abs_error_from(results[0].trace, 1500);
  const double err_pi = max_abs_error_from(results[1].trace, 1500);
  const Trace& o = results[2].trace;
  bool monotone = true;
  for (const auto& rec : o) monotone = monotone && rec.observed_dH <= 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1500; k < o.size(); ++k) min_dist = std::min(min_dist, std::abs(o[k].error_e));
  r.measured = fmt("max|e| k>=1500: P=%.5g PI=%.5g (final H: P=%.4g PI=%.4g, final alpha PI=%.3g); "
                   "uncontrolled: non-increasing=%s, min|H-target| k>=1500=%.4g",
                   err_p, err_pi, entropy_after(results[0].trace.back()),
                   entropy_after(results[1].trace.back()), results[1].trace.back().alpha,
                   monotone ? "yes" : "no", min_dist);
  r.tolerance = "P and PI |e_k| < 0.005 for k >= 1500; uncontrolled non-increasing and > 0.05 from target";
  r.pass = err_p < 0.005 && err_pi < 0.005 && monotone && min_dist > 0.05;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 5

CriterionResult offpolicy_steady_state_suite() {
  CriterionResult r = header("5", "offpolicy_steady_state", "off-policy P steady-state error; PI zero error");
  ScenarioConfig base;
  base.loss = LossVariant{LossKind::kOffPolicyClipped, 0.95, 0.2, 0.2};
  base.staleness = 4;
  const PlateauCheck plateau = plateau_check(base);
  ScenarioConfig pi = base;
  pi.controller.k_i = 0.01;
  const Trace t = run_scenario(pi);
  const double err_pi = max_abs_error_from(t, 1500);
  r.measured = plateau.text + fmt("; PI max|e| k>=1500=%.5g (final H=%.4g)", err_pi, entropy_after(t.back()));
  r.tolerance = "P: |mean e| > 0.005, sign matches, |rel diff| <= 0.25; PI |e_k| < 0.005 for k >= 1500";
  r.pass = plateau.pass && err_pi < 0.005;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 6

CriterionResult highprob_convergence_suite() {
  CriterionResult r = header("6", "highprob_convergence", "high-probability loss convergence; stop-gradient identity");
  ScenarioConfig on;
  on.loss = LossVariant{LossKind::kOnPolicyHighprob, 0.95, 0.2, 0.2};
  on.steps = 4000;
  ScenarioConfig on_p = on;
  on_p.controller.k_i = 0.0;
  ScenarioConfig off = on;
  off.loss.kind = LossKind::kOffPolicyHighprob;
  off.staleness = 4;
  const auto runs = sweep({on_p, on, off});
  for (const auto& res : runs) {
    if (res.error) {
      r.measured = "run failed: " + *res.error;
      return r;
    }
  }
  const double err_on_p = max_abs_error_from(runs[0].trace, 3000);
  const double err_on_pi = max_abs_error_from(runs[1].trace, 3000);
  const double err_off_pi = max_abs_error_from(runs[2].trace, 3000);
  const PlateauCheck plateau = plateau_check(off);

  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> boost(0.0, 8.0);
  double worst_identity = 0.0;
  int active_instances = 0;
  for (int i = 0; i < 100; ++i) {
    Instance inst = random_instance(rng, 3.0);
    Vec x = logits_of(inst.policy);
    x[0] += boost(rng);
    inst.policy = SoftmaxPolicy(x);
    inst.adv = exact_advantages(inst.task, inst.policy);
    const double alpha = unit(rng);
    const Vec a = unified_stopgrad_term(inst.policy, inst.policy, inst.adv, alpha, 0.95);
    const Vec b = highprob_correction_gradient(inst.policy, inst.adv, alpha, 0.95);
    for (std::size_t k = 0; k < a.size(); ++k) worst_identity = std::max(worst_identity, std::abs(a[k] - b[k]));
    const Vec pi = probs(inst.policy);
    if (*std::max_element(pi.begin(), pi.end()) > 0.95) ++active_instances;
  }
  r.measured = fmt("on-policy max|e| k>=3000: P=%.5g PI=%.5g; off-policy: %s, PI max|e| k>=3000=%.5g; "
                   "stop-gradient identity max diff=%.2e (%d/100 instances with pi>tau)",
                   err_on_p, err_on_pi, plateau.text.c_str(), err_off_pi, worst_identity, active_instances);
  r.tolerance = "criteria 4-5 tolerances within 4000 steps (window k >= 3000); identity <= 1e-10";
  r.pass = err_on_p < 0.005 && err_on_pi < 0.005 && plateau.pass && err_off_pi < 0.005 &&
           worst_identity <= 1e-10;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 7

CriterionResult masking_suite() {
  CriterionResult r = header("7", "masking", "masking high-probability groups perturbs entropy more");
  int agree = 0, agree_p = 0, agree_n = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ScenarioConfig cfg;
    cfg.steps = 50;
    cfg.seed = seed;
    cfg.controller.enabled = false;
    const Trace base = run_masking_ablation(cfg, MaskSpec{});
    auto deviation = [&](MaskSpec m) {
      const Trace t = run_masking_ablation(cfg, m);
      double d = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) d += std::abs(entropy_after(t[k]) - entropy_after(base[k]));
      return d / static_cast<double>(t.size());
    };
    const double p_hi = deviation({true, false, false, false, std::nullopt});
    const double p_lo = deviation({false, true, false, false, std::nullopt});
    const double n_hi = deviation({false, false, true, false, std::nullopt});
    const double n_lo = deviation({false, false, false, true, std::nullopt});
    const bool p_ok = p_hi > p_lo;
    const bool n_ok = n_hi > n_lo;
    agree_p += p_ok;
    agree_n += n_ok;
    agree += p_ok && n_ok;
    if (seed < 3) detail << fmt(" seed%d[P^=%.3g Pv=%.3g N^=%.3g Nv=%.3g]", static_cast<int>(seed), p_hi, p_lo, n_hi, n_lo);
  }
  r.measured = fmt("seeds agreeing on both signs=%d/10 (positive %d/10, negative %d/10);", agree, agree_p,
                   agree_n) +
               detail.str();
  r.tolerance = ">= 9/10 seeds with dev(P^) > dev(Pv) and dev(N^) > dev(Nv) over 50 steps";
  r.pass = agree >= 9;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 8

CriterionResult stability_suite() {
  CriterionResult r = header("8", "stability", "stability inequalities vs eigenvalues; Lyapunov descent");
  int counterexamples = 0, stable_points = 0;
  double worst_modulus_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double x = 2.0 * (i + 0.5) / 50.0;
      const double y = (j + 0.5) / 50.0;
      const StabilityReport rep = stability_report(1.0, x, y);
      const auto& m = rep.recurrence_matrix;
      const auto moduli = oracle::eigen_moduli(m[0][0], m[0][1], m[1][0], m[1][1]);
      const double radius = moduli[1];
      auto lib = std::vector<double>{rep.eigenvalue_moduli[0], rep.eigenvalue_moduli[1]};
      std::sort(lib.begin(), lib.end());
      worst_modulus_gap = std::max({worst_modulus_gap, std::abs(lib[0] - moduli[0]), std::abs(lib[1] - moduli[1])});
      if (rep.stable) {
        ++stable_points;
        if (!(radius < 1.0)) ++counterexamples;
      }
    }
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int settings = 0, increases = 0;
  while (settings < 50) {
    const double c0 = 0.05 + 0.95 * u(rng);
    const double kp = 2.0 * u(rng) / c0;
    const double ki = (0.01 + 0.98 * u(rng)) / c0;
    const StabilityReport rep = stability_report(c0, kp, ki);
    if (!rep.stable) continue;
    ++settings;
    double e = 2.0 * u(rng) - 1.0, integral = 4.0 * u(rng) - 2.0;
    double v = lyapunov_value(e, integral, rep.lyapunov_b);
    for (int k = 0; k < 300; ++k) {
      std::tie(e, integral) = recurrence_step(rep, e, integral);
      const double next = lyapunov_value(e, integral, rep.lyapunov_b);
      if (next > v) ++increases;
      v = next;
    }
  }
  r.measured = fmt("grid: %d stable points, %d counterexamples, eigenvalue modulus gap vs eigensolver=%.1e; "
                   "Lyapunov increases=%d over 50 settings x 300 steps",
                   stable_points, counterexamples, worst_modulus_gap, increases);
  r.tolerance = "zero counterexamples; V non-increasing";
  r.pass = counterexamples == 0 && increases == 0 && worst_modulus_gap < 1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 9

CriterionResult plug_and_play_suite() {
  CriterionResult r = header("9", "plug_and_play", "late controller activation recovers target");
  ScenarioConfig cfg;
  cfg.controller_start_step = 500;
  const Trace t = run_plug_and_play(cfg);
  const double h_before = t[500].entropy_exact;
  const double alpha_at = t[500].alpha;
  const double e_1500 = t[1500].error_e;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 500; k <= 1500; ++k) best = std::min(best, std::abs(t[k].error_e));
  r.measured = fmt("H at activation=%.4g (target 0.1), alpha at activation=%.4g, |e| at step 1500=%.4g "
                   "(closest in [500,1500]=%.4g)",
                   h_before, alpha_at, std::abs(e_1500), best);
  r.tolerance = "H below target at step 500, alpha < 0 at activation, |e_1500| <= 0.01";
  r.pass = h_before < cfg.controller.target_entropy && alpha_at < 0.0 && std::abs(e_1500) <= 0.01;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 10

CriterionResult determinism_suite() {
  CriterionResult r = header("10", "determinism_io", "bit-identical repeated runs; exact CSV round trip");
  ScenarioConfig exact_cfg;
  ScenarioConfig sampled_cfg;
  sampled_cfg.mode.kind = ModeKind::kSampled;
  sampled_cfg.steps = 500;
  ScenarioConfig off_cfg;
  off_cfg.loss.kind = LossKind::kOffPolicyClipped;
  bool identical = true;
  bool round_trip = true;
  std::vector<ScenarioConfig> configs{exact_cfg, sampled_cfg, off_cfg};
  const auto swept = sweep(configs);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string a = trace_to_string(run_scenario(configs[i]));
    const std::string b = trace_to_string(run_scenario(configs[i]));
    identical = identical && a == b && !swept[i].error && trace_to_string(swept[i].trace) == a;
    std::istringstream in(a);
    const Trace back = read_trace(in);
    round_trip = round_trip && trace_to_string(back) == a && back == swept[i].trace;
  }
  Trace edge(1);
  edge[0].step = 7;
  edge[0].entropy_exact = std::numeric_limits<double>::denorm_min();
  edge[0].entropy_mc = std::numeric_limits<double>::max();
  edge[0].alpha = -0.1;
  edge[0].error_e = 1.0 / 3.0;
  edge[0].integral_I = -1e-300;
  edge[0].predicted_dH = std::nextafter(1.0, 2.0);
  std::istringstream in(trace_to_string(edge));
  round_trip = round_trip && read_trace(in) == edge;
  r.measured = fmt("repeated/sweep runs identical=%s, CSV round trip exact=%s (3 configs + edge values)",
                   identical ? "yes" : "no", round_trip ? "yes" : "no");
  r.tolerance = "bit-identical";
  r.pass = identical && round_trip;
  return r;
}

// ---------------------------------------------------------------------------
// Extra property suite: sampled vs exact trajectories

CriterionResult sampled_consistency_suite() {
  CriterionResult r = header("P1", "sampled_consistency", "sampled-mode mean trajectory within 3 SE of exact");
  ScenarioConfig exact;
  exact.steps = 200;
  exact.controller.enabled = false;
  exact.advantage_scale = AdvantageScale::kGrpoLimit;
  exact.task.seed = 0;
  exact.policy_init.seed = 0;
  const Trace ref = run_scenario(exact);
  std::vector<ScenarioConfig> configs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioConfig c = exact;
    c.mode = ModeSpec{ModeKind::kSampled, 64, 1.0};
    c.seed = 100 + seed;
    configs.push_back(c);
  }
  const auto runs = sweep(configs);
  int outside = 0;
  double worst_z = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    double mean = 0.0, sq = 0.0;
    for (const auto& run : runs) {
      if (run.error) {
        r.measured = "run failed: " + *run.error;
        return r;
      }
      const double h = entropy_after(run.trace[k]);
      mean += h;
      sq += h * h;
    }
    const double n = static_cast<double>(runs.size());
    mean /= n;
    const double sd = std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1.0)));
    const double se = sd / std::sqrt(n);
    const double diff = std::abs(mean - entropy_after(ref[k]));
    if (diff > 3.0 * se) ++outside;
    if (se > 0) worst_z = std::max(worst_z, diff / se);
  }
  r.measured = fmt("steps outside 3 SE: %d/200, worst |z|=%.3g (K=64, temperature 1, 20 seeds)", outside, worst_z);
  r.tolerance = "every step of the first 200 within 3 SE";
  r.pass = outside == 0;
  return r;
}

using Suite = std::function<CriterionResult(const VerifyOptions&)>;

const std::vector<std::pair<std::string, Suite>>& registry() {
  static const std::vector<std::pair<std::string, Suite>> suites = {
      {"gradients", [](const VerifyOptions& o) { return gradient_suite(o.inject_gradient_fault); }},
      {"class_monotonicity", [](const VerifyOptions&) { return class_monotonicity_suite(); }},
      {"one_step", [](const VerifyOptions&) { return one_step_suite(); }},
      {"onpolicy_convergence", [](const VerifyOptions&) { return onpolicy_convergence_suite(); }},
      {"offpolicy_steady_state", [](const VerifyOptions&) { return offpolicy_steady_state_suite(); }},
      {"highprob_convergence", [](const VerifyOptions&) { return highprob_convergence_suite(); }},
      {"masking", [](const VerifyOptions&) { return masking_suite(); }},
      {"stability", [](const VerifyOptions&) { return stability_suite(); }},
      {"plug_and_play", [](const VerifyOptions&) { return plug_and_play_suite(); }},
      {"determinism_io", [](const VerifyOptions&) { return determinism_suite(); }},
      {"sampled_consistency", [](const VerifyOptions&) { return sampled_consistency_suite(); }},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& criterion_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 10; ++i) out.push_back(registry()[i].first);
    return out;
  }();
  return names;
}

const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, suite] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<CriterionResult> run_verification(const VerifyOptions& options) {
  const auto& names = options.suites.empty() ? all_suites() : options.suites;
  for (const auto& name : names) {
    const auto& all = all_suites();
    if (std::find(all.begin(), all.end(), name) == all.end()) {
      std::string valid;
      for (const auto& n : all) valid += (valid.empty() ? "" : ", ") + n;
      throw Error(ErrorCode::kConfig, "unknown suite '" + name + "' (valid: " + valid + ")");
    }
  }
  std::vector<CriterionResult> out;
  for (const auto& [name, suite] : registry()) {
    if (std::find(names.begin(), names.end(), name) == names.end()) continue;
    try {
      out.push_back(suite(options));
    } catch (const std::exception& e) {
      CriterionResult r;
      r.suite = name;
      r.title = name;
      r.measured = std::string("suite raised: ") + e.what();
      out.push_back(r);
    }
  }
  return out;
}

std::string format_result(const CriterionResult& result) {
  std::string id = result.id.empty() ? "?" : result.id;
  return fmt("%s  [%s] %s | measured: %s | required: %s", result.pass ? "PASS" : "FAIL", id.c_str(),
             result.title.c_str(), result.measured.c_str(), result.tolerance.c_str());
}

}  // namespace entropic
