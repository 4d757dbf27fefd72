#include "pgrates/optimizer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

namespace pgrates {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

// H(pi) x = pi .* (x - pi^T x); the exact per-row softmax Jacobian action.
VectorXd h_apply(const VectorXd& pi, const VectorXd& x) {
  return (pi.array() * (x.array() - pi.dot(x))).matrix();
}

double centered_norm(const VectorXd& z) {
  return (z.array() - z.mean()).matrix().norm();
}

// Reward gap of a bandit: +inf with a single action, 0 under optimal ties,
// else the margin of the best action over the runner-up.
double bandit_gap(const VectorXd& r, const std::vector<int>& a_star) {
  if (r.size() == 1) return std::numeric_limits<double>::infinity();
  if (a_star.size() > 1) return 0.0;
  const double v_star = r.maxCoeff();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < r.size(); ++a)
    if (a != a_star[0]) gap = std::min(gap, v_star - r(a));
  return gap;
}

struct RecordRule {
  long long horizon;
  long long stride;
  bool explicit_stride;

  bool operator()(long long t) const {
    if (t == 1 || t == horizon || t % stride == 0) return true;
    return !explicit_stride && t <= 10000;
  }
};

RecordRule make_record_rule(const RunConfig& cfg) {
  RecordRule rule{cfg.iterations, 1, cfg.record_every.has_value()};
  if (rule.explicit_stride)
    rule.stride = *cfg.record_every;
  else
    rule.stride = std::max<long long>(1, (cfg.iterations + 9999) / 10000);
  return rule;
}

struct PhaseState {
  bool entropy = false;       // current step uses the entropy update
  long long switch_iter = -1; // first plainly-stepped t (two_stage)
};

RunTrace run_bandit(const RunConfig& cfg) {
  const VectorXd& r = std::get<VectorXd>(cfg.problem);
  const int k = static_cast<int>(r.size());
  const MethodSpec& m = cfg.method;
  const long long horizon = cfg.iterations;

  const std::vector<int> a_star = argmax_set(r);
  const double v_star = r.maxCoeff();
  const double gap = bandit_gap(r, a_star);
  if (m.kind == MethodKind::kDecaying)
    require(std::isfinite(gap) && gap > 0.0,
            "decaying schedule undefined: reward gap must be positive and finite");

  const double tau = m.tau;
  const bool fixed_tau_family =
      m.kind == MethodKind::kEntropy || m.kind == MethodKind::kTwoStage;
  // Soft optimum value for fixed-tau runs: max_pi pi^T(r - tau log pi) = tau lse(r/tau).
  const double v_soft_star = fixed_tau_family ? tau * logsumexp(r / tau) : kNaN;

  const double eta_entropy =
      fixed_tau_family ? m.eta.value_or(default_eta(m, cfg.problem, true)) : kNaN;
  const double eta_plain =
      (m.kind == MethodKind::kPlain || m.kind == MethodKind::kTwoStage)
          ? m.eta.value_or(default_eta(m, cfg.problem, false))
          : kNaN;

  VectorXd theta = cfg.init.materialize(1, k).row(0).transpose();
  PhaseState phase;
  phase.entropy = fixed_tau_family;

  RunTrace trace;
  trace.config = cfg;
  const RecordRule record = make_record_rule(cfg);
  trace.records.reserve(static_cast<std::size_t>(
      std::min<long long>(horizon, 10000 + horizon / record.stride + 2)));
  trace.c_running.reserve(trace.records.capacity());

  VectorXd pi(k), logpi(k), grad(k), prev_pi;
  double c_run = std::numeric_limits<double>::infinity();
  double post_switch_inf = std::numeric_limits<double>::infinity();

  for (long long t = 1; t <= horizon; ++t) {
    const bool needs_log = phase.entropy || m.kind == MethodKind::kDecaying ||
                           (m.kind == MethodKind::kTwoStage && phase.switch_iter < 0);
    if (needs_log) {
      logpi = log_softmax_vec(theta);
      pi = logpi.array().exp().matrix();
    } else {
      pi = softmax_vec(theta);
    }

    if (m.kind == MethodKind::kTwoStage && phase.entropy && t >= 2) {
      const bool leave = m.t1 ? (t > *m.t1) : ((pi - prev_pi).lpNorm<1>() < m.switch_tol);
      if (leave) {
        phase.entropy = false;
        phase.switch_iter = t;
      }
    }

    const double tau_t = m.kind == MethodKind::kDecaying
                             ? temperature_at(m, gap, t)
                             : (phase.entropy ? tau : 0.0);

    if (m.kind == MethodKind::kDecaying || phase.entropy)
      grad = h_apply(pi, r - tau_t * logpi);
    else
      grad = h_apply(pi, r);

    const double v_plain = pi.dot(r);
    double opt_prob = 0.0;
    for (int a : a_star) opt_prob += pi(a);
    c_run = std::min(c_run, opt_prob);
    if (phase.switch_iter >= 0) post_switch_inf = std::min(post_switch_inf, opt_prob);

    if (record(t)) {
      IterationRecord rec;
      rec.t = t;
      rec.delta = v_star - v_plain;
      rec.opt_prob = opt_prob;
      rec.min_prob = pi.minCoeff();
      rec.grad_norm = grad.norm();
      rec.tau_t = tau_t;
      if (phase.entropy) {
        rec.soft_delta = v_soft_star - pi.dot((r - tau * logpi));
        rec.zeta_norm = centered_norm(tau * theta - r);
      } else if (m.kind == MethodKind::kDecaying) {
        rec.zeta_norm = centered_norm(tau_t * theta - r);
      }
      trace.records.push_back(rec);
      trace.c_running.push_back(c_run);
    }

    if (t == horizon) break;

    if (m.kind == MethodKind::kDecaying) {
      const double tau_next = temperature_at(m, gap, t + 1);
      theta = (tau_t / tau_next) * (theta + (1.0 / tau_t) * grad);
    } else {
      theta += (phase.entropy ? eta_entropy : eta_plain) * grad;
    }
    if (!theta.allFinite())
      throw NumericalFailure("optimizer produced a non-finite logit", t + 1);

    if (m.kind == MethodKind::kTwoStage && phase.entropy && !m.t1) prev_pi = pi;
  }

  trace.switch_iteration = phase.switch_iter;
  trace.eta_effective = m.kind == MethodKind::kDecaying
                            ? kNaN
                            : (fixed_tau_family ? eta_entropy : eta_plain);
  if (phase.switch_iter >= 0) trace.post_switch_opt_prob_inf = post_switch_inf;
  return trace;
}

RunTrace run_mdp(const RunConfig& cfg) {
  const TabularMdp& mdp = std::get<TabularMdp>(cfg.problem);
  const MethodSpec& m = cfg.method;
  const long long horizon = cfg.iterations;
  const StateDistribution mu = cfg.effective_mu();
  const StateDistribution rho = cfg.effective_rho();

  const OptimalSolution opt = solve_optimal(mdp);
  const double v_star_rho = rho.p.dot(opt.v_star);

  const double tau = m.tau;
  const bool fixed_tau_family =
      m.kind == MethodKind::kEntropy || m.kind == MethodKind::kTwoStage;
  double v_soft_star_rho = kNaN;
  if (fixed_tau_family)
    v_soft_star_rho = rho.p.dot(solve_soft_optimal(mdp, tau).values.v_soft);

  const double eta_entropy =
      fixed_tau_family ? m.eta.value_or(default_eta(m, cfg.problem, true)) : kNaN;
  const double eta_plain =
      (m.kind == MethodKind::kPlain || m.kind == MethodKind::kTwoStage)
          ? m.eta.value_or(default_eta(m, cfg.problem, false))
          : kNaN;

  MatrixXd theta = cfg.init.materialize(mdp.num_states, mdp.num_actions);
  PhaseState phase;
  phase.entropy = fixed_tau_family;

  RunTrace trace;
  trace.config = cfg;
  const RecordRule record = make_record_rule(cfg);

  MatrixXd grad, prev_pi;
  double c_run = std::numeric_limits<double>::infinity();
  double post_switch_inf = std::numeric_limits<double>::infinity();
  const double scale = 1.0 / (1.0 - mdp.gamma);

  for (long long t = 1; t <= horizon; ++t) {
    const PolicyTable pol = softmax_policy(PolicyLogits{theta});

    if (m.kind == MethodKind::kTwoStage && phase.entropy && t >= 2) {
      const bool leave =
          m.t1 ? (t > *m.t1) : ((pol.pi - prev_pi).cwiseAbs().sum() < m.switch_tol);
      if (leave) {
        phase.entropy = false;
        phase.switch_iter = t;
      }
    }

    ValueBundle vb;
    double soft_delta = kNaN;
    try {
      vb = policy_values(mdp, pol, mu);
      if (phase.entropy) {
        const SoftValueBundle sb = soft_values_from_logits(mdp, PolicyLogits{theta}, mu, tau);
        soft_delta = v_soft_star_rho - rho.p.dot(sb.v_soft);
        grad = ((pol.pi.array() * sb.adv_soft.array()).colwise() *
                (vb.d.array() * scale))
                   .matrix();
      } else {
        grad = ((pol.pi.array() * vb.adv.array()).colwise() * (vb.d.array() * scale))
                   .matrix();
      }
    } catch (const NumericalFailure& e) {
      if (e.iteration < 0) throw NumericalFailure(e.what(), t);
      throw;
    }

    double opt_prob = std::numeric_limits<double>::infinity();
    for (int s = 0; s < mdp.num_states; ++s)
      opt_prob = std::min(opt_prob, pol.pi(s, opt.a_star[s]));
    c_run = std::min(c_run, opt_prob);
    if (phase.switch_iter >= 0) post_switch_inf = std::min(post_switch_inf, opt_prob);

    if (record(t)) {
      IterationRecord rec;
      rec.t = t;
      rec.delta = v_star_rho - rho.p.dot(vb.v);
      rec.soft_delta = soft_delta;
      rec.opt_prob = opt_prob;
      rec.min_prob = pol.pi.minCoeff();
      rec.grad_norm = grad.norm();
      rec.tau_t = phase.entropy ? tau : 0.0;
      trace.records.push_back(rec);
      trace.c_running.push_back(c_run);
    }

    if (t == horizon) break;

    theta += (phase.entropy ? eta_entropy : eta_plain) * grad;
    if (!theta.allFinite())
      throw NumericalFailure("optimizer produced a non-finite logit", t + 1);

    if (m.kind == MethodKind::kTwoStage && phase.entropy && !m.t1) prev_pi = pol.pi;
  }

  trace.switch_iteration = phase.switch_iter;
  trace.eta_effective = fixed_tau_family ? eta_entropy : eta_plain;
  if (phase.switch_iter >= 0) trace.post_switch_opt_prob_inf = post_switch_inf;
  return trace;
}

void append_field(std::string& line, double v) {
  if (std::isnan(v)) return;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

}  // namespace

std::string method_kind_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kPlain: return "plain";
    case MethodKind::kEntropy: return "entropy";
    case MethodKind::kTwoStage: return "two_stage";
    case MethodKind::kDecaying: return "decaying";
  }
  throw InvalidInput("unknown method kind");
}

MethodKind method_kind_from_name(const std::string& name) {
  if (name == "plain") return MethodKind::kPlain;
  if (name == "entropy") return MethodKind::kEntropy;
  if (name == "two_stage") return MethodKind::kTwoStage;
  if (name == "decaying") return MethodKind::kDecaying;
  throw InvalidInput("field 'kind': unknown method '" + name +
                     "' (expected plain, entropy, two_stage, or decaying)");
}

void MethodSpec::validate() const {
  if (eta) require(*eta > 0.0 && std::isfinite(*eta), "field 'eta': must be positive");
  switch (kind) {
    case MethodKind::kPlain:
      break;
    case MethodKind::kEntropy:
    case MethodKind::kTwoStage:
      require(tau > 0.0 && std::isfinite(tau), "field 'tau': must be positive");
      if (eta)
        require(tau * *eta <= 1.0 + kAlgebraTol,
                "field 'eta': entropy updates require tau*eta <= 1");
      if (kind == MethodKind::kTwoStage) {
        if (t1) require(*t1 >= 1, "field 't1': must be at least 1");
        require(switch_tol > 0.0, "field 'switch_tol': must be positive");
      }
      break;
    case MethodKind::kDecaying:
      require(alpha > 0.0 && std::isfinite(alpha), "field 'alpha': must be positive");
      require(!eta.has_value(),
              "field 'eta': decaying schedule always steps with eta_t = 1/tau_t");
      break;
  }
}

MethodSpec MethodSpec::plain(std::optional<double> eta) {
  MethodSpec m;
  m.kind = MethodKind::kPlain;
  m.eta = eta;
  return m;
}

MethodSpec MethodSpec::entropy(double tau, std::optional<double> eta) {
  MethodSpec m;
  m.kind = MethodKind::kEntropy;
  m.tau = tau;
  m.eta = eta;
  return m;
}

MethodSpec MethodSpec::two_stage(double tau, std::optional<double> eta,
                                 std::optional<long long> t1, double switch_tol) {
  MethodSpec m;
  m.kind = MethodKind::kTwoStage;
  m.tau = tau;
  m.eta = eta;
  m.t1 = t1;
  m.switch_tol = switch_tol;
  return m;
}

MethodSpec MethodSpec::decaying(double alpha) {
  MethodSpec m;
  m.kind = MethodKind::kDecaying;
  m.alpha = alpha;
  return m;
}

InitSpec InitSpec::uniform() { return InitSpec{}; }

InitSpec InitSpec::random(std::uint64_t seed) {
  InitSpec init;
  init.kind = Kind::kRandom;
  init.seed = seed;
  return init;
}

InitSpec InitSpec::explicit_logits(MatrixXd theta) {
  InitSpec init;
  init.kind = Kind::kExplicit;
  init.theta = std::move(theta);
  return init;
}

InitSpec InitSpec::explicit_probs(const MatrixXd& probs) {
  require(probs.size() > 0, "field 'init.probs': must be nonempty");
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    require(probs.row(s).minCoeff() > 0.0,
            "field 'init.probs': entries must be strictly positive");
    require(std::abs(probs.row(s).sum() - 1.0) <= 1e-9,
            "field 'init.probs': rows must sum to 1");
  }
  return explicit_logits(probs.array().log().matrix());
}

MatrixXd InitSpec::materialize(int num_states, int num_actions) const {
  switch (kind) {
    case Kind::kUniform:
      return MatrixXd::Zero(num_states, num_actions);
    case Kind::kRandom: {
      std::mt19937_64 gen(seed);
      return random_logits(gen, num_states, num_actions);
    }
    case Kind::kExplicit:
      require(theta.rows() == num_states && theta.cols() == num_actions,
              "field 'init': logits must have shape num_states x num_actions");
      require(theta.allFinite(), "field 'init': logits must be finite");
      return theta;
  }
  throw InvalidInput("unknown init kind");
}

bool RunConfig::is_bandit() const { return std::holds_alternative<VectorXd>(problem); }

int RunConfig::num_states() const {
  return is_bandit() ? 1 : std::get<TabularMdp>(problem).num_states;
}

int RunConfig::num_actions() const {
  return is_bandit() ? static_cast<int>(std::get<VectorXd>(problem).size())
                     : std::get<TabularMdp>(problem).num_actions;
}

StateDistribution RunConfig::effective_mu() const {
  return mu ? *mu : StateDistribution::uniform(num_states());
}

StateDistribution RunConfig::effective_rho() const {
  return rho ? *rho : effective_mu();
}

void RunConfig::validate() const {
  method.validate();
  require(iterations >= 1, "field 'iterations': must be at least 1");
  if (record_every) require(*record_every >= 1, "field 'record_every': must be at least 1");
  if (is_bandit()) {
    const VectorXd& r = std::get<VectorXd>(problem);
    require(r.size() >= 1, "field 'rewards': must be nonempty");
    require(r.allFinite() && r.minCoeff() >= 0.0 && r.maxCoeff() <= 1.0,
            "field 'rewards': must lie in [0,1]");
  } else {
    require(method.kind != MethodKind::kDecaying,
            "field 'kind': the decaying temperature schedule is bandit-only");
  }
  const int s = num_states();
  if (mu) {
    require(mu->size() == s, "field 'mu': must have one entry per state");
    require(mu->p.minCoeff() > 0.0, "field 'mu': must be strictly positive");
  }
  if (rho) require(rho->size() == s, "field 'rho': must have one entry per state");
}

double default_eta(const MethodSpec& method, const Problem& problem, bool entropy_phase) {
  bool entropy = entropy_phase;
  if (method.kind == MethodKind::kPlain) entropy = false;
  if (method.kind == MethodKind::kEntropy) entropy = true;
  if (method.kind == MethodKind::kDecaying)
    throw InvalidInput("decaying schedule steps with eta_t = 1/tau_t, not a fixed eta");
  if (std::holds_alternative<VectorXd>(problem))
    return entropy ? 1.0 / method.tau : 2.0 / 5.0;
  const TabularMdp& mdp = std::get<TabularMdp>(problem);
  const double cube = std::pow(1.0 - mdp.gamma, 3);
  if (!entropy) return cube / 8.0;
  return cube / (8.0 + method.tau * (4.0 + 8.0 * std::log(mdp.num_actions)));
}

double temperature_at(const MethodSpec& method, double delta_star, long long t) {
  if (t < 1) throw InvalidInput("temperature_at: t must be at least 1");
  switch (method.kind) {
    case MethodKind::kPlain:
      return 0.0;
    case MethodKind::kEntropy:
    case MethodKind::kTwoStage:
      return method.tau;
    case MethodKind::kDecaying: {
      if (!(delta_star > 0.0) || !std::isfinite(delta_star))
        throw InvalidInput(
            "decaying schedule undefined: reward gap must be positive and finite");
      const auto tt = static_cast<double>(std::max<long long>(t, 2));
      return method.alpha * delta_star / std::log(tt);
    }
  }
  throw InvalidInput("unknown method kind");
}

MatrixXd resolved_initial_logits(const RunConfig& config) {
  return config.init.materialize(config.num_states(), config.num_actions());
}

RunTrace run(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunTrace trace = config.is_bandit() ? run_bandit(config) : run_mdp(config);
  trace.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

void write_trace_csv(const RunTrace& trace, std::ostream& os) {
  std::string line = "t,delta,soft_delta,opt_prob,min_prob,zeta_norm,grad_norm,tau_t\n";
  os << line;
  for (const IterationRecord& rec : trace.records) {
    line.clear();
    line += std::to_string(rec.t);
    for (double v : {rec.delta, rec.soft_delta, rec.opt_prob, rec.min_prob,
                     rec.zeta_norm, rec.grad_norm, rec.tau_t}) {
      line += ',';
      append_field(line, v);
    }
    line += '\n';
    os << line;
  }
}

}  // namespace pgrates
