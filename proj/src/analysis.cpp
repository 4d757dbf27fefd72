#include "pgrates/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace pgrates {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// One-hot table for a deterministic per-state action choice.
PolicyTable deterministic_policy(int num_states, int num_actions,
                                 const std::vector<int>& actions) {
  MatrixXd pi = MatrixXd::Zero(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) pi(s, actions[s]) = 1.0;
  return PolicyTable{pi};
}

double mismatch_coefficient(const VectorXd& d_opt, const VectorXd& d_cur) {
  return (d_opt.array() / d_cur.array()).maxCoeff();
}

// Soft sub-optimality of the policy at theta, both values under rho.
double soft_suboptimality(const TabularMdp& mdp, const PolicyLogits& theta,
                          const StateDistribution& mu, const StateDistribution& rho,
                          double tau, const SoftOptimum& opt) {
  const SoftValueBundle sb = soft_values_from_logits(mdp, theta, mu, tau);
  return rho.p.dot(opt.values.v_soft) - rho.p.dot(sb.v_soft);
}

double bandit_soft_suboptimality(const VectorXd& r, const VectorXd& theta, double tau) {
  const VectorXd logpi = log_softmax_vec(theta);
  const VectorXd pi = logpi.array().exp().matrix();
  return tau * logsumexp(r / tau) - pi.dot((r - tau * logpi));
}

struct LinearFit {
  double slope, intercept, r_squared;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "rate_fit: window has no spread in t");
  LinearFit fit{};
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 1e-30) {
    fit.r_squared = 1.0;  // constant series, perfectly explained
  } else {
    const double ss_res = syy - fit.slope * sxy;
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

}  // namespace

CheckReport make_ge_check(std::string name, double lhs, double rhs, double tol,
                          std::string context) {
  CheckReport c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = lhs - rhs;
  c.tol = tol;
  c.pass = c.margin >= -tol;
  c.context = std::move(context);
  return c;
}

CheckReport make_eq_check(std::string name, double lhs, double rhs, double tol,
                          std::string context) {
  CheckReport c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = -std::abs(lhs - rhs);
  c.tol = tol;
  c.pass = c.margin >= -tol;
  c.context = std::move(context);
  return c;
}

std::string check_to_json_line(const CheckReport& check) {
  nlohmann::json j{{"name", check.name},     {"lhs", check.lhs},
                   {"rhs", check.rhs},       {"margin", check.margin},
                   {"tol", check.tol},       {"pass", check.pass},
                   {"context", check.context}};
  return j.dump();
}

std::string rate_fit_to_json_line(const RateFit& fit) {
  nlohmann::json j{{"model", fit.model},
                   {"slope", fit.slope},
                   {"intercept", fit.intercept},
                   {"r_squared", fit.r_squared},
                   {"window", {fit.t_lo, fit.t_hi}}};
  return j.dump();
}

CheckReport lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta, double tol,
                               std::string context) {
  const VectorXd pi = softmax_vec(theta);
  const std::vector<int> a_star = argmax_set(r);
  const double delta = r.maxCoeff() - pi.dot(r);
  double opt_mass = 0.0;
  for (int a : a_star) opt_mass += pi(a);
  const double coef =
      a_star.size() == 1 ? opt_mass : opt_mass / std::sqrt(static_cast<double>(a_star.size()));
  const double lhs = bandit_pg_gradient(r, theta).norm();
  return make_ge_check("lojasiewicz_bandit", lhs, coef * delta, tol, std::move(context));
}

CheckReport lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                            const StateDistribution& mu, const StateDistribution& rho,
                            double tol, std::string context) {
  require(mu.p.minCoeff() > 0.0, "lojasiewicz_mdp: mu must be strictly positive");
  const OptimalSolution opt = solve_optimal(mdp);
  const PolicyTable pol = softmax_policy(theta);
  const PolicyTable pol_star =
      deterministic_policy(mdp.num_states, mdp.num_actions, opt.a_star);
  const VectorXd d_opt = discounted_state_distribution(mdp, pol_star, rho).p;
  const VectorXd d_cur = discounted_state_distribution(mdp, pol, mu).p;
  const ValueBundle vb = policy_values(mdp, pol, rho);
  const double delta = rho.p.dot(opt.v_star) - rho.p.dot(vb.v);
  double min_opt_prob = kInf;
  for (int s = 0; s < mdp.num_states; ++s)
    min_opt_prob = std::min(min_opt_prob, pol.pi(s, opt.a_star[s]));
  const double coef = min_opt_prob / (std::sqrt(static_cast<double>(mdp.num_states)) *
                                      mismatch_coefficient(d_opt, d_cur));
  const double lhs = mdp_pg_gradient(mdp, theta, mu).norm();
  return make_ge_check("lojasiewicz_mdp", lhs, coef * delta, tol, std::move(context));
}

CheckReport entropy_lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta,
                                       double tau, double tol, std::string context) {
  require(tau > 0.0, "entropy_lojasiewicz_bandit: tau must be positive");
  const VectorXd pi = softmax_vec(theta);
  const double soft_delta = std::max(0.0, bandit_soft_suboptimality(r, theta, tau));
  const double rhs = std::sqrt(2.0 * tau) * pi.minCoeff() * std::sqrt(soft_delta);
  const double lhs = bandit_entropy_gradient(r, theta, tau).norm();
  return make_ge_check("entropy_lojasiewicz_bandit", lhs, rhs, tol, std::move(context));
}

CheckReport entropy_lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                                    const StateDistribution& mu,
                                    const StateDistribution& rho, double tau, double tol,
                                    std::string context) {
  require(tau > 0.0, "entropy_lojasiewicz_mdp: tau must be positive");
  require(mu.p.minCoeff() > 0.0, "entropy_lojasiewicz_mdp: mu must be strictly positive");
  const SoftOptimum opt = solve_soft_optimal(mdp, tau);
  const PolicyTable pol = softmax_policy(theta);
  const VectorXd d_opt = discounted_state_distribution(mdp, opt.pi, rho).p;
  const VectorXd d_cur = discounted_state_distribution(mdp, pol, mu).p;
  const double soft_delta = std::max(0.0, soft_suboptimality(mdp, theta, mu, rho, tau, opt));
  const double coef = std::sqrt(2.0 * tau) /
                      std::sqrt(static_cast<double>(mdp.num_states)) *
                      std::sqrt(mu.p.minCoeff()) * pol.pi.minCoeff() /
                      std::sqrt(mismatch_coefficient(d_opt, d_cur));
  const double lhs = mdp_entropy_gradient(mdp, theta, mu, tau).norm();
  return make_ge_check("entropy_lojasiewicz_mdp", lhs, coef * std::sqrt(soft_delta), tol,
                       std::move(context));
}

CheckReport reversed_lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta,
                                        double tol, std::string context) {
  const std::vector<int> a_star = argmax_set(r);
  require(a_star.size() == 1 && r.size() >= 2,
          "reversed_lojasiewicz_bandit: needs a unique best action");
  double gap = kInf;
  for (Eigen::Index a = 0; a < r.size(); ++a)
    if (a != a_star[0]) gap = std::min(gap, r(a_star[0]) - r(a));
  require(gap > 0.0, "reversed_lojasiewicz_bandit: reward gap is zero");
  const VectorXd pi = softmax_vec(theta);
  const double delta = r.maxCoeff() - pi.dot(r);
  const double bound = std::sqrt(2.0) / gap * delta;
  const double norm = bandit_pg_gradient(r, theta).norm();
  return make_ge_check("reversed_lojasiewicz_bandit", bound, norm, tol, std::move(context));
}

CheckReport reversed_lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                                     const StateDistribution& mu, double tol,
                                     std::string context) {
  require(mu.p.minCoeff() > 0.0, "reversed_lojasiewicz_mdp: mu must be strictly positive");
  const OptimalSolution opt = solve_optimal(mdp);
  require(std::isfinite(opt.delta_star) && opt.delta_star > 0.0,
          "reversed_lojasiewicz_mdp: optimal value gap is degenerate");
  const PolicyTable pol = softmax_policy(theta);
  const ValueBundle vb = policy_values(mdp, pol, mu);
  const double delta = mu.p.dot(opt.v_star) - mu.p.dot(vb.v);
  const double bound = std::sqrt(2.0) / ((1.0 - mdp.gamma) * opt.delta_star) * delta;
  const double norm = mdp_pg_gradient(mdp, theta, mu).norm();
  return make_ge_check("reversed_lojasiewicz_mdp", bound, norm, tol, std::move(context));
}

std::pair<VectorXd, double> contraction_residual(const VectorXd& r, const VectorXd& theta,
                                                 double tau) {
  require(r.size() == theta.size(), "contraction_residual: size mismatch");
  VectorXd zeta = tau * theta - r;
  zeta.array() -= zeta.mean();
  return {zeta, zeta.norm()};
}

CheckReport smoothness_witness(const Objective& objective, const MatrixXd& theta,
                               const MatrixXd& theta_prime, double beta,
                               std::string context) {
  require(beta > 0.0, "smoothness_witness: beta must be positive");
  const MatrixXd diff = theta_prime - theta;
  const double sq = diff.squaredNorm();
  const double linear = objective.gradient(theta).cwiseProduct(diff).sum();
  const double residual = std::abs(objective.value(theta_prime) - objective.value(theta) - linear);
  const double tol = 1e-10 * (1.0 + beta * sq);
  return make_ge_check("smoothness_witness", 0.5 * beta * sq, residual, tol,
                       std::move(context));
}

std::vector<CheckReport> degree_probe(const VectorXd& r, double tau, double xi,
                                      int num_samples, DegreeMode mode,
                                      std::uint64_t seed) {
  require(xi >= 0.0 && xi <= 1.0, "degree_probe: xi must lie in [0,1]");
  require(num_samples >= 1, "degree_probe: num_samples must be at least 1");
  std::vector<CheckReport> reports;
  reports.reserve(static_cast<std::size_t>(num_samples));
  const std::string tag =
      (mode == DegreeMode::kPlain ? "degree_plain_xi=" : "degree_entropy_xi=") +
      fmt_double(xi);

  if (mode == DegreeMode::kPlain) {
    require(r.size() == 3 && r(0) > r(1) && r(1) > r(2),
            "degree_probe: plain mode needs three strictly descending rewards");
    for (int i = 0; i < num_samples; ++i) {
      const double frac = num_samples == 1 ? 1.0
                                           : static_cast<double>(i) /
                                                 static_cast<double>(num_samples - 1);
      const double eps = std::pow(10.0, -1.0 - 7.0 * frac);  // 1e-1 down to 1e-8
      VectorXd pi(3);
      pi << 1.0 - 3.0 * eps, 2.0 * eps, eps;
      const VectorXd theta = pi.array().log().matrix();
      const double delta = r.maxCoeff() - pi.dot(r);
      const double rhs = pi(0) * std::pow(delta, 1.0 - xi);
      const double lhs = bandit_pg_gradient(r, theta).norm();
      reports.push_back(make_ge_check(tag, lhs, rhs, 1e-10, "eps=" + fmt_double(eps)));
    }
    return reports;
  }

  require(tau > 0.0, "degree_probe: entropy mode needs tau > 0");
  for (int i = 0; i < num_samples; ++i) {
    std::mt19937_64 gen(split_seed(seed, static_cast<std::uint64_t>(i)));
    const int k = 2 + static_cast<int>(gen() % 9);  // 2..10 actions
    const VectorXd ri = random_rewards(gen, k);
    const VectorXd theta = random_logits(gen, 1, k).row(0).transpose();
    const VectorXd pi = softmax_vec(theta);
    const double soft_delta = std::max(0.0, bandit_soft_suboptimality(ri, theta, tau));
    const double rhs =
        std::sqrt(2.0 * tau) * pi.minCoeff() * std::pow(soft_delta, 1.0 - xi);
    const double lhs = bandit_entropy_gradient(ri, theta, tau).norm();
    reports.push_back(make_ge_check(
        tag, lhs, rhs, 1e-10, "seed=" + std::to_string(seed) + "/" + std::to_string(i)));
  }
  return reports;
}

RateFit rate_fit(const RunTrace& trace, const std::string& model,
                 std::optional<std::pair<long long, long long>> window) {
  require(model == "power" || model == "exponential",
          "rate_fit: model must be 'power' or 'exponential'");
  require(!trace.records.empty(), "rate_fit: empty trace");
  const bool exponential = model == "exponential";

  bool has_soft = false;
  if (exponential)
    for (const auto& rec : trace.records)
      if (std::isfinite(rec.soft_delta)) {
        has_soft = true;
        break;
      }

  const long long t_last = trace.records.back().t;
  long long lo, hi;
  if (window) {
    lo = window->first;
    hi = window->second;
    require(lo >= 1 && lo <= hi, "rate_fit: invalid window");
    require(lo <= t_last, "rate_fit: window lies beyond the trace");
  } else if (exponential) {
    lo = t_last / 2 + 1;
    hi = t_last;
  } else {
    lo = std::max<long long>(1, t_last / 10);
    hi = t_last;
  }

  std::vector<double> xs, ys;
  for (const auto& rec : trace.records) {
    if (rec.t < lo || rec.t > hi) continue;
    const double y = has_soft ? rec.soft_delta : rec.delta;
    if (!std::isfinite(y) || y <= 0.0) continue;  // shrink past nonpositive values
    xs.push_back(exponential ? static_cast<double>(rec.t)
                             : std::log(static_cast<double>(rec.t)));
    ys.push_back(std::log(y));
  }
  require(xs.size() >= 2, "rate_fit: window is empty after dropping nonpositive values");

  const LinearFit fit = least_squares(xs, ys);
  RateFit out;
  out.model = model;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.t_lo = lo;
  out.t_hi = hi;
  return out;
}

CheckReport lower_bound_check(const RunTrace& trace, double delta_star, double gamma) {
  require(trace.records.size() >= 100, "lower_bound_check: trace too short (< 100 records)");
  require(delta_star > 0.0 && std::isfinite(delta_star),
          "lower_bound_check: needs a positive finite gap");
  const bool bandit = trace.config.is_bandit();
  const double coef = bandit
                          ? delta_star * delta_star / 6.0
                          : std::pow(1.0 - gamma, 5) * delta_star * delta_star / 12.0;
  const long long t_last = trace.records.back().t;
  const long long t_from = t_last - t_last / 4;

  double min_scaled = kInf;
  double max_delta = 0.0;
  long long used = 0;
  for (const auto& rec : trace.records) {
    if (rec.t < t_from) continue;
    ++used;
    max_delta = std::max(max_delta, rec.delta);
    min_scaled = std::min(min_scaled, static_cast<double>(rec.t) * rec.delta);
  }
  require(used >= 1, "lower_bound_check: final quarter holds no records");
  if (max_delta < 1e-300) {
    CheckReport c = make_ge_check("lower_bound", kInf, coef, 0.0,
                                  "not-applicable: delta underflowed to zero");
    c.lhs = 0.0;
    c.margin = 0.0;
    return c;
  }
  return make_ge_check("lower_bound", min_scaled, coef, 0.0,
                       "final quarter t >= " + std::to_string(t_from));
}

CheckReport nonconcavity_fixture() {
  VectorXd r(3);
  r << 1.0, 0.9, 0.1;
  VectorXd theta1 = VectorXd::Zero(3);
  VectorXd theta2(3);
  theta2 << std::log(9.0), std::log(16.0), std::log(25.0);
  const VectorXd mid = 0.5 * (theta1 + theta2);
  const double average =
      0.5 * (softmax_vec(theta1).dot(r) + softmax_vec(theta2).dot(r));
  const double midpoint = softmax_vec(mid).dot(r);
  return make_ge_check("nonconcavity_gap", average, midpoint, 1e-12,
                       "r=(1,9/10,1/10), logits 0 vs (log9,log16,log25)");
}

double corner_escape_threshold(const VectorXd& r) {
  require(r.size() == 3 && r(0) > r(1) && r(1) > r(2),
          "corner_escape_threshold: needs three strictly descending rewards");
  return (r(1) - r(2)) / (2.0 * (r(0) - r(1)));
}

double entropy_min_prob_floor(int k, double tau, double theta1_inf) {
  require(k >= 1 && tau > 0.0, "entropy_min_prob_floor: bad arguments");
  const double root_k = std::sqrt(static_cast<double>(k));
  return 1.0 / k * std::exp(-1.0 / tau) *
         std::exp(-4.0 * (theta1_inf + 1.0 / tau) * root_k);
}

CheckReport check_contraction_along_trace(const RunTrace& trace, double tol) {
  require(trace.config.is_bandit() && trace.config.method.kind == MethodKind::kEntropy,
          "check_contraction_along_trace: needs an entropy bandit trace");
  const double tau = trace.config.method.tau;
  const double eta = trace.eta_effective;
  double worst = kInf;
  long long pairs = 0;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const auto& a = trace.records[i];
    const auto& b = trace.records[i + 1];
    if (b.t != a.t + 1) continue;
    ++pairs;
    worst = std::min(worst, (1.0 - tau * eta * a.min_prob) * a.zeta_norm - b.zeta_norm);
  }
  require(pairs >= 1, "check_contraction_along_trace: no consecutive records");
  return make_ge_check("zeta_contraction", worst, 0.0, tol,
                       std::to_string(pairs) + " consecutive steps");
}

CheckReport check_min_prob_floor(const RunTrace& trace) {
  require(trace.config.is_bandit() && trace.config.method.kind == MethodKind::kEntropy,
          "check_min_prob_floor: needs an entropy bandit trace");
  const double theta1_inf = resolved_initial_logits(trace.config).cwiseAbs().maxCoeff();
  const double floor = entropy_min_prob_floor(trace.config.num_actions(),
                                              trace.config.method.tau, theta1_inf);
  double min_prob = kInf;
  for (const auto& rec : trace.records) min_prob = std::min(min_prob, rec.min_prob);
  return make_ge_check("min_prob_floor", min_prob, floor, 0.0,
                       "closed-form floor " + fmt_double(floor));
}

CheckReport check_exponential_envelope(const RunTrace& trace) {
  require(trace.config.is_bandit() && trace.config.method.kind == MethodKind::kEntropy,
          "check_exponential_envelope: needs an entropy bandit trace");
  const double tau = trace.config.method.tau;
  const double eta = trace.eta_effective;
  const double theta1_inf = resolved_initial_logits(trace.config).cwiseAbs().maxCoeff();
  const int k = trace.config.num_actions();
  const double c = entropy_min_prob_floor(k, tau, theta1_inf);
  const double lead = 2.0 * std::pow(tau * theta1_inf + 1.0, 2) * k / tau;
  double worst = kInf;
  for (const auto& rec : trace.records) {
    const double envelope =
        lead * std::exp(-2.0 * tau * eta * c * static_cast<double>(rec.t - 1));
    worst = std::min(worst, envelope - rec.soft_delta);
  }
  return make_ge_check("exponential_envelope", worst, 0.0, 0.0,
                       "lead constant " + fmt_double(lead));
}

CheckReport check_pseudo_rate_envelope(const RunTrace& trace) {
  require(trace.config.is_bandit() && trace.config.method.kind == MethodKind::kPlain,
          "check_pseudo_rate_envelope: needs a plain bandit trace");
  require(std::abs(trace.eta_effective - 0.4) <= 1e-12,
          "check_pseudo_rate_envelope: holds for eta = 2/5");
  double worst = kInf;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    const double c_t = trace.c_running[i];
    const double envelope = 5.0 / (static_cast<double>(rec.t) * c_t * c_t);
    worst = std::min(worst, envelope - rec.delta);
  }
  return make_ge_check("pseudo_rate_envelope", worst, 0.0, 0.0, "");
}

CheckReport check_uniform_init_envelope(const RunTrace& trace) {
  require(trace.config.is_bandit() && trace.config.method.kind == MethodKind::kPlain,
          "check_uniform_init_envelope: needs a plain bandit trace");
  require(trace.config.init.kind == InitSpec::Kind::kUniform,
          "check_uniform_init_envelope: needs uniform initialization");
  const double k = trace.config.num_actions();
  double worst = kInf;
  for (const auto& rec : trace.records)
    worst = std::min(worst, 5.0 * k * k / static_cast<double>(rec.t) - rec.delta);
  return make_ge_check("uniform_init_envelope", worst, 0.0, 0.0, "");
}

CheckReport check_opt_prob_nondecreasing(const RunTrace& trace, double tol) {
  require(!trace.records.empty(), "check_opt_prob_nondecreasing: empty trace");
  double worst = kInf;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i)
    worst = std::min(worst, trace.records[i + 1].opt_prob - trace.records[i].opt_prob);
  if (trace.records.size() == 1) worst = 0.0;
  return make_ge_check("opt_prob_nondecreasing", worst, 0.0, tol, "");
}

CheckReport check_descent_monotone(const RunTrace& trace, bool soft, double tol) {
  require(!trace.records.empty(), "check_descent_monotone: empty trace");
  double worst = kInf;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const double a = soft ? trace.records[i].soft_delta : trace.records[i].delta;
    const double b = soft ? trace.records[i + 1].soft_delta : trace.records[i + 1].delta;
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    worst = std::min(worst, a - b);
  }
  if (!std::isfinite(worst)) worst = 0.0;
  return make_ge_check(soft ? "soft_delta_nonincreasing" : "delta_nonincreasing", worst,
                       0.0, tol, "");
}

}  // namespace pgrates
