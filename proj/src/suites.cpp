#include "pgrates/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

namespace pgrates {
namespace {

long long count_or(long long trials, long long dflt) {
  return trials < 0 ? dflt : trials;
}

int draw_int(std::mt19937_64& gen, int lo, int hi) {
  return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ctx(const char* tag, long long i) {
  return std::string(tag) + "[" + std::to_string(i) + "]";
}

// Runs fn(0..n-1), possibly across threads, and flattens results in index
// order so output is deterministic regardless of scheduling.
void run_indexed(long long n,
                 const std::function<std::vector<CheckReport>(long long)>& fn,
                 SuiteResult& out) {
  if (n <= 0) return;
  std::vector<std::vector<CheckReport>> slots(static_cast<std::size_t>(n));
  const int workers =
      static_cast<int>(std::min<long long>(effective_threads(), n));
  if (workers <= 1) {
    for (long long i = 0; i < n; ++i) slots[static_cast<std::size_t>(i)] = fn(i);
  } else {
    std::atomic<long long> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
      for (long long i; (i = next.fetch_add(1)) < n;) {
        try {
          slots[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  for (auto& slot : slots)
    for (auto& check : slot) {
      if (!check.pass) ++out.failures;
      out.reports.push_back(std::move(check));
    }
}

struct RandomBandit {
  VectorXd r;
  VectorXd theta;
};

RandomBandit random_bandit(std::mt19937_64& gen, int k_max = 10) {
  const int k = draw_int(gen, 2, k_max);
  RandomBandit b;
  b.r = random_rewards(gen, k);
  b.theta = random_logits(gen, 1, k).row(0).transpose();
  return b;
}

struct RandomMdpInstance {
  TabularMdp mdp;
  PolicyLogits theta;
  StateDistribution mu;
  StateDistribution rho;
};

RandomMdpInstance random_mdp_instance(std::mt19937_64& gen, int dim_max, double gamma) {
  const int s = draw_int(gen, 2, dim_max);
  const int a = draw_int(gen, 2, dim_max);
  TabularMdp mdp = random_mdp(gen, s, a, gamma);
  PolicyLogits theta{random_logits(gen, s, a)};
  StateDistribution mu{random_distribution(gen, s)};
  StateDistribution rho{random_distribution(gen, s)};
  return RandomMdpInstance{std::move(mdp), std::move(theta), std::move(mu), std::move(rho)};
}

SuiteResult suite_lojasiewicz(const SuiteOptions& o) {
  SuiteResult out;
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomBandit b = random_bandit(gen);
        return std::vector<CheckReport>{
            lojasiewicz_bandit(b.r, b.theta, 1e-10, ctx("bandit", i))};
      },
      out);
  run_indexed(
      count_or(o.trials, 200),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 1000000 + static_cast<std::uint64_t>(i)));
        const double gamma = i % 2 == 0 ? 0.5 : 0.9;
        const RandomMdpInstance m = random_mdp_instance(gen, 4, gamma);
        return std::vector<CheckReport>{
            lojasiewicz_mdp(m.mdp, m.theta, m.mu, m.rho, 1e-9, ctx("mdp", i))};
      },
      out);
  return out;
}

SuiteResult suite_reversed(const SuiteOptions& o) {
  SuiteResult out;
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomBandit b = random_bandit(gen);
        return std::vector<CheckReport>{
            reversed_lojasiewicz_bandit(b.r, b.theta, 1e-10, ctx("bandit", i))};
      },
      out);
  run_indexed(
      count_or(o.trials, 200),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 1000000 + static_cast<std::uint64_t>(i)));
        const double gamma = i % 2 == 0 ? 0.5 : 0.9;
        const RandomMdpInstance m = random_mdp_instance(gen, 4, gamma);
        return std::vector<CheckReport>{
            reversed_lojasiewicz_mdp(m.mdp, m.theta, m.mu, 1e-9, ctx("mdp", i))};
      },
      out);
  return out;
}

SuiteResult suite_entropy_lojasiewicz(const SuiteOptions& o) {
  SuiteResult out;
  static constexpr double kTaus[] = {0.05, 0.2, 1.0};
  run_indexed(
      count_or(o.trials, 500),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomBandit b = random_bandit(gen);
        const double tau = kTaus[i % 3];
        return std::vector<CheckReport>{entropy_lojasiewicz_bandit(
            b.r, b.theta, tau, 1e-10, ctx("bandit", i) + " tau=" + fmt(tau))};
      },
      out);
  run_indexed(
      count_or(o.trials, 200),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 1000000 + static_cast<std::uint64_t>(i)));
        const double gamma = i % 2 == 0 ? 0.5 : 0.9;
        const RandomMdpInstance m = random_mdp_instance(gen, 4, gamma);
        return std::vector<CheckReport>{entropy_lojasiewicz_mdp(
            m.mdp, m.theta, m.mu, m.rho, 0.2, 1e-9, ctx("mdp", i))};
      },
      out);
  return out;
}

// theta' = theta + a random direction of length at most max_len.
MatrixXd perturb(std::mt19937_64& gen, const MatrixXd& theta, double max_len) {
  MatrixXd dir = random_logits(gen, static_cast<int>(theta.rows()),
                               static_cast<int>(theta.cols()));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double norm = dir.norm();
  if (norm > 0.0) dir *= max_len * u01(gen) / norm;
  return theta + dir;
}

SuiteResult suite_smoothness(const SuiteOptions& o) {
  SuiteResult out;
  run_indexed(
      count_or(o.trials, 10000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomBandit b = random_bandit(gen);
        const MatrixXd theta = b.theta.transpose();
        const MatrixXd theta_prime = perturb(gen, theta, 1.0);
        const Objective obj{
            [&](const MatrixXd& th) {
              return softmax_vec(th.row(0).transpose()).dot(b.r);
            },
            [&](const MatrixXd& th) -> MatrixXd {
              return bandit_pg_gradient(b.r, th.row(0).transpose()).transpose();
            }};
        return std::vector<CheckReport>{
            smoothness_witness(obj, theta, theta_prime, 2.5, ctx("bandit", i))};
      },
      out);
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 1000000 + static_cast<std::uint64_t>(i)));
        const RandomMdpInstance m = random_mdp_instance(gen, 5, 0.9);
        const MatrixXd theta_prime = perturb(gen, m.theta.theta, 1.0);
        const double beta = 8.0 / std::pow(1.0 - m.mdp.gamma, 3);
        const Objective obj{
            [&](const MatrixXd& th) {
              return m.mu.p.dot(
                  policy_values(m.mdp, softmax_policy(PolicyLogits{th}), m.mu).v);
            },
            [&](const MatrixXd& th) -> MatrixXd {
              return mdp_pg_gradient(m.mdp, PolicyLogits{th}, m.mu);
            }};
        return std::vector<CheckReport>{
            smoothness_witness(obj, m.theta.theta, theta_prime, beta, ctx("mdp", i))};
      },
      out);
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 2000000 + static_cast<std::uint64_t>(i)));
        const RandomMdpInstance m = random_mdp_instance(gen, 5, 0.9);
        const MatrixXd theta_prime = perturb(gen, m.theta.theta, 1.0);
        const double beta = (4.0 + 8.0 * std::log(m.mdp.num_actions)) /
                            std::pow(1.0 - m.mdp.gamma, 3);
        // Exact gradient of the discounted entropy: the soft value at tau = 1
        // decomposes as V + entropy, so its gradient minus the plain one.
        const Objective obj{
            [&](const MatrixXd& th) {
              return discounted_entropy(m.mdp, softmax_policy(PolicyLogits{th}), m.mu);
            },
            [&](const MatrixXd& th) -> MatrixXd {
              return mdp_entropy_gradient(m.mdp, PolicyLogits{th}, m.mu, 1.0) -
                     mdp_pg_gradient(m.mdp, PolicyLogits{th}, m.mu);
            }};
        return std::vector<CheckReport>{smoothness_witness(
            obj, m.theta.theta, theta_prime, beta, ctx("entropy_rate", i))};
      },
      out);
  return out;
}

SuiteResult suite_spectrum(const SuiteOptions& o) {
  SuiteResult out;
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomBandit b = random_bandit(gen);
        const VectorXd pi = softmax_vec(b.theta);
        const MatrixXd h = h_matrix(pi);
        const int k = static_cast<int>(pi.size());

        Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
        const VectorXd lam = es.eigenvalues();  // ascending
        std::vector<double> sorted(pi.data(), pi.data() + k);
        std::sort(sorted.begin(), sorted.end());

        double slack = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
          slack = std::min(slack, sorted[static_cast<std::size_t>(j)] - lam(j));
          if (j > 0)
            slack = std::min(slack, lam(j) - sorted[static_cast<std::size_t>(j - 1)]);
        }
        const double null_residual = (h * VectorXd::Ones(k)).cwiseAbs().maxCoeff();
        std::vector<CheckReport> reports;
        reports.push_back(make_eq_check("spectrum_null_direction", null_residual, 0.0,
                                        1e-12, ctx("bandit", i)));
        reports.push_back(
            make_eq_check("spectrum_lambda_min", lam(0), 0.0, 1e-10, ctx("bandit", i)));
        reports.push_back(
            make_ge_check("spectrum_interlacing", slack, 0.0, 1e-10, ctx("bandit", i)));
        return reports;
      },
      out);
  return out;
}

SuiteResult suite_gradcheck(const SuiteOptions& o) {
  SuiteResult out;
  static constexpr double kGammas[] = {0.0, 0.5, 0.9};
  run_indexed(
      count_or(o.trials, 100),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        const RandomMdpInstance m = random_mdp_instance(gen, 5, kGammas[i % 3]);
        const double tau = 0.2;

        const MatrixXd plain = mdp_pg_gradient(m.mdp, m.theta, m.mu);
        const MatrixXd plain_fd = finite_difference_gradient(
            [&](const MatrixXd& th) {
              return m.mu.p.dot(
                  policy_values(m.mdp, softmax_policy(PolicyLogits{th}), m.mu).v);
            },
            m.theta.theta);
        const MatrixXd soft = mdp_entropy_gradient(m.mdp, m.theta, m.mu, tau);
        const MatrixXd soft_fd = finite_difference_gradient(
            [&](const MatrixXd& th) {
              return m.mu.p.dot(
                  soft_values_from_logits(m.mdp, PolicyLogits{th}, m.mu, tau).v_soft);
            },
            m.theta.theta);

        const std::string c =
            ctx("mdp", i) + " gamma=" + fmt(m.mdp.gamma);
        return std::vector<CheckReport>{
            make_ge_check("gradcheck_plain", 1e-5, gradient_rel_error(plain, plain_fd),
                          0.0, c),
            make_ge_check("gradcheck_entropy", 1e-5, gradient_rel_error(soft, soft_fd),
                          0.0, c)};
      },
      out);
  return out;
}

std::vector<CheckReport> identity_checks_bandit(std::mt19937_64& gen, long long i) {
  static constexpr double kTaus[] = {0.05, 0.2, 1.0};
  const RandomBandit b = random_bandit(gen);
  const double tau = kTaus[i % 3];
  const int k = static_cast<int>(b.r.size());
  const VectorXd theta_other = random_logits(gen, 1, k).row(0).transpose();
  const VectorXd x = random_logits(gen, 1, k).row(0).transpose();
  const std::string c = ctx("bandit", i) + " tau=" + fmt(tau);

  const VectorXd logpi = log_softmax_vec(b.theta);
  const VectorXd pi = logpi.array().exp().matrix();
  const MatrixXd h = h_matrix(pi);
  std::vector<CheckReport> reports;

  // The entropy gradient equals H(pi)(r - tau*theta): the log-pi and logit
  // forms differ by a per-row constant that H annihilates.
  const VectorXd grad = bandit_entropy_gradient(b.r, b.theta, tau);
  const VectorXd via_logits = h * (b.r - tau * b.theta);
  reports.push_back(make_eq_check("entropy_gradient_two_forms",
                                  (grad - via_logits).cwiseAbs().maxCoeff(), 0.0, 1e-10,
                                  c));

  // Soft sub-optimality as a KL divergence to softmax(r/tau).
  const double lse = logsumexp(b.r / tau);
  const double direct = tau * lse - pi.dot((b.r - tau * logpi));
  const VectorXd log_pi_star = (b.r / tau).array() - lse;
  const double kl_form = tau * pi.dot((logpi - log_pi_star));
  reports.push_back(make_eq_check("soft_subopt_kl_dual", direct, kl_form, 1e-10, c));

  // Norm decay of H and I - H on mean-centered vectors.
  const VectorXd centered = (x.array() - x.mean()).matrix();
  const double cn = centered.norm();
  const double min_prob = pi.minCoeff();
  const VectorXd hx = h * centered;
  reports.push_back(
      make_ge_check("norm_decay_lower", hx.norm(), min_prob * cn, 1e-10, c));
  reports.push_back(make_ge_check("norm_decay_upper", (1.0 - min_prob) * cn,
                                  (centered - hx).norm(), 1e-10, c));

  // KL and total-variation bounds through mean-centered logit differences.
  const VectorXd diff = theta_other - b.theta;
  const VectorXd centered_diff = (diff.array() - diff.mean()).matrix();
  const double inf_norm = centered_diff.cwiseAbs().maxCoeff();
  const VectorXd logpi_other = log_softmax_vec(theta_other);
  const double kl = pi.dot((logpi - logpi_other));
  reports.push_back(
      make_ge_check("kl_logit_bound", 0.5 * inf_norm * inf_norm, kl, 1e-10, c));
  const double l1 = (pi - logpi_other.array().exp().matrix()).lpNorm<1>();
  reports.push_back(make_ge_check("policy_logit_bound", inf_norm, l1, 1e-10, c));
  return reports;
}

std::vector<CheckReport> identity_checks_mdp(std::mt19937_64& gen, long long i) {
  const double gamma = i % 2 == 0 ? 0.5 : 0.9;
  const RandomMdpInstance m = random_mdp_instance(gen, 4, gamma);
  const double tau = 0.2;
  const std::string c = ctx("mdp", i) + " gamma=" + fmt(gamma);

  const PolicyTable pol = softmax_policy(m.theta);
  const SoftValueBundle sb = soft_values_from_logits(m.mdp, m.theta, m.mu, tau);
  std::vector<CheckReport> reports;

  // pi(a|s) * soft_adv(s,a) == [H(pi_s)(q_soft(s,.) - tau*theta(s,.))](a).
  double two_forms = 0.0;
  for (int s = 0; s < m.mdp.num_states; ++s) {
    const VectorXd pi_row = pol.pi.row(s).transpose();
    const VectorXd lhs_row =
        (pi_row.array() * sb.adv_soft.row(s).transpose().array()).matrix();
    const VectorXd rhs_row =
        h_matrix(pi_row) *
        (sb.q_soft.row(s) - tau * m.theta.theta.row(s)).transpose();
    two_forms = std::max(two_forms, (lhs_row - rhs_row).cwiseAbs().maxCoeff());
  }
  reports.push_back(make_eq_check("soft_advantage_two_forms", two_forms, 0.0, 1e-8, c));

  // Soft-optimal consistency: pi* = exp((q* - v*)/tau) and v* = tau lse(q*/tau).
  const SoftOptimum sopt = solve_soft_optimal(m.mdp, tau);
  double policy_residual = 0.0;
  double value_residual = 0.0;
  for (int s = 0; s < m.mdp.num_states; ++s) {
    const VectorXd q_row = sopt.values.q_soft.row(s).transpose();
    const VectorXd implied =
        ((q_row.array() - sopt.values.v_soft(s)) / tau).exp().matrix();
    policy_residual = std::max(
        policy_residual,
        (implied - sopt.pi.pi.row(s).transpose()).cwiseAbs().maxCoeff());
    value_residual = std::max(
        value_residual, std::abs(sopt.values.v_soft(s) - tau * logsumexp(q_row / tau)));
  }
  reports.push_back(
      make_eq_check("soft_optimal_policy_consistency", policy_residual, 0.0, 1e-8, c));
  reports.push_back(
      make_eq_check("soft_optimal_value_lse", value_residual, 0.0, 1e-8, c));

  // Soft sub-optimality equals the discounted KL to the soft-optimal policy.
  const double direct = m.rho.p.dot(sopt.values.v_soft) - m.rho.p.dot(
      soft_values_from_logits(m.mdp, m.theta, m.rho, tau).v_soft);
  const VectorXd d_rho = discounted_state_distribution(m.mdp, pol, m.rho).p;
  const MatrixXd log_pi = log_softmax(m.theta.theta);
  double kl_sum = 0.0;
  for (int s = 0; s < m.mdp.num_states; ++s) {
    double kl_row = 0.0;
    for (int a = 0; a < m.mdp.num_actions; ++a)
      kl_row += pol.pi(s, a) * (log_pi(s, a) - std::log(sopt.pi.pi(s, a)));
    kl_sum += d_rho(s) * tau * kl_row;
  }
  reports.push_back(make_eq_check("soft_subopt_kl_dual", direct,
                                  kl_sum / (1.0 - m.mdp.gamma), 1e-8, c));

  // Soft value decomposes into plain value plus tau times discounted entropy.
  const ValueBundle vb = policy_values(m.mdp, pol, m.rho);
  const double lhs_val = m.rho.p.dot(sb.v_soft);
  const double rhs_val =
      m.rho.p.dot(vb.v) + tau * discounted_entropy(m.mdp, pol, m.rho);
  reports.push_back(make_eq_check("soft_value_decomposition", lhs_val, rhs_val, 1e-8, c));

  // Entropy-regularized gradient is linear in tau through the entropy gradient.
  const MatrixXd g_tau = mdp_entropy_gradient(m.mdp, m.theta, m.mu, tau);
  const MatrixXd g_one = mdp_entropy_gradient(m.mdp, m.theta, m.mu, 1.0);
  const MatrixXd g_plain = mdp_pg_gradient(m.mdp, m.theta, m.mu);
  const double linearity =
      (g_tau - (g_plain + tau * (g_one - g_plain))).cwiseAbs().maxCoeff();
  reports.push_back(make_eq_check("entropy_gradient_linearity", linearity, 0.0, 1e-8, c));
  return reports;
}

SuiteResult suite_identities(const SuiteOptions& o) {
  SuiteResult out;
  run_indexed(
      count_or(o.trials, 1000),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, static_cast<std::uint64_t>(i)));
        return identity_checks_bandit(gen, i);
      },
      out);
  run_indexed(
      count_or(o.trials, 200),
      [&](long long i) {
        std::mt19937_64 gen(split_seed(o.seed, 1000000 + static_cast<std::uint64_t>(i)));
        return identity_checks_mdp(gen, i);
      },
      out);
  return out;
}

SuiteResult suite_degree(const SuiteOptions& o) {
  SuiteResult out;
  VectorXd r(3);
  r << 0.6, 0.4, 0.2;
  const auto grid_points = static_cast<int>(count_or(o.trials, 25));
  const auto entropy_samples = static_cast<int>(count_or(o.trials, 1000));
  if (grid_points > 0) {
    // Degree 0 holds along the corner family.
    for (auto& check : degree_probe(r, 0.0, 0.0, grid_points, DegreeMode::kPlain)) {
      if (!check.pass) ++out.failures;
      out.reports.push_back(std::move(check));
    }
    // Any positive degree must fail once the corner is close enough.
    for (const auto& raw :
         degree_probe(r, 0.0, 0.1, grid_points, DegreeMode::kPlain)) {
      const double eps = std::stod(raw.context.substr(raw.context.find('=') + 1));
      if (eps > 1e-5) continue;
      CheckReport meta = make_ge_check("degree_plain_xi=0.1_expected_fail", raw.rhs,
                                       raw.lhs + raw.tol, 0.0, raw.context);
      if (!meta.pass) ++out.failures;
      out.reports.push_back(std::move(meta));
    }
  }
  if (entropy_samples > 0) {
    for (auto& check : degree_probe(r, 0.2, 0.5, entropy_samples, DegreeMode::kEntropy,
                                    split_seed(o.seed, 777))) {
      if (!check.pass) ++out.failures;
      out.reports.push_back(std::move(check));
    }
  }
  return out;
}

SuiteResult suite_fixtures(const SuiteOptions& o) {
  SuiteResult out;
  if (o.trials == 0) return out;
  std::vector<CheckReport> reports;

  reports.push_back(nonconcavity_fixture());
  {
    VectorXd r(3);
    r << 1.0, 0.9, 0.1;
    VectorXd theta2(3);
    theta2 << std::log(9.0), std::log(16.0), std::log(25.0);
    const double average =
        0.5 * (softmax_vec(VectorXd::Zero(3)).dot(r) + softmax_vec(theta2).dot(r));
    const double midpoint = softmax_vec((0.5 * theta2).eval()).dot(r);
    reports.push_back(make_eq_check("nonconcavity_average_value", average,
                                    1777.0 / 3000.0, 1e-12, "exact rational"));
    reports.push_back(make_eq_check("nonconcavity_midpoint_value", midpoint,
                                    71.0 / 120.0, 1e-12, "exact rational"));
  }
  {
    VectorXd r(3), pi(3), expected(3);
    r << 5.0, 4.0, 4.0;
    pi << 0.2, 0.3, 0.5;
    expected << 0.16, -0.06, -0.10;
    const VectorXd g = bandit_pg_gradient(r, pi.array().log().matrix());
    reports.push_back(make_eq_check("gradient_fixture_components",
                                    (g - expected).cwiseAbs().maxCoeff(), 0.0, 1e-12,
                                    "r=(5,4,4), pi=(0.2,0.3,0.5)"));
    reports.push_back(make_eq_check("gradient_fixture_norm", g.norm(),
                                    0.1 * std::sqrt(3.92), 1e-12,
                                    "r=(5,4,4), pi=(0.2,0.3,0.5)"));
  }
  {
    VectorXd r(3);
    r << 1.0, 0.9, 0.1;
    reports.push_back(make_eq_check("corner_escape_threshold",
                                    corner_escape_threshold(r), 4.0, 1e-12,
                                    "r=(1,0.9,0.1)"));
  }
  for (auto& check : reports) {
    if (!check.pass) ++out.failures;
    out.reports.push_back(std::move(check));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "lojasiewicz", "reversed",  "entropy_lojasiewicz", "smoothness", "spectrum",
      "gradcheck",   "identities", "degree",             "fixtures"};
  return names;
}

int effective_threads() {
  if (const char* env = std::getenv("PGRATES_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  if (opts.trials == 0) return SuiteResult{};
  if (name == "lojasiewicz") return suite_lojasiewicz(opts);
  if (name == "reversed") return suite_reversed(opts);
  if (name == "entropy_lojasiewicz") return suite_entropy_lojasiewicz(opts);
  if (name == "smoothness") return suite_smoothness(opts);
  if (name == "spectrum") return suite_spectrum(opts);
  if (name == "gradcheck") return suite_gradcheck(opts);
  if (name == "identities") return suite_identities(opts);
  if (name == "degree") return suite_degree(opts);
  if (name == "fixtures") return suite_fixtures(opts);
  throw InvalidInput("unknown suite '" + name + "'");
}

}  // namespace pgrates
