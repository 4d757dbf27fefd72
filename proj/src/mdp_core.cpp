#include "pgrates/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pgrates/json_io.hpp"

namespace pgrates {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

// Sweep cap for the fixed-point solvers; generous for any gamma of interest.
constexpr int kMaxSweeps = 2'000'000;

double value_iteration_threshold(double gamma, double tol) {
  if (gamma <= 0.0) return std::numeric_limits<double>::infinity();
  return tol * (1.0 - gamma) / (2.0 * gamma);
}

}  // namespace

// ----- domain types -------------------------------------------------------------

StateDistribution::StateDistribution(VectorXd w) : p(std::move(w)) {
  require(p.size() > 0, "state distribution must be nonempty");
  require(p.allFinite() && p.minCoeff() >= 0.0,
          "state distribution entries must be finite and nonnegative");
  require(std::abs(p.sum() - 1.0) <= kProbRowTol,
          "state distribution must sum to 1");
}

StateDistribution StateDistribution::uniform(int n) {
  require(n > 0, "state distribution must be nonempty");
  return StateDistribution(VectorXd::Constant(n, 1.0 / n));
}

PolicyLogits::PolicyLogits(MatrixXd t) : theta(std::move(t)) {
  require(theta.size() > 0, "logit table must be nonempty");
  require(theta.allFinite(), "logit table entries must be finite");
}

PolicyTable::PolicyTable(MatrixXd p) : pi(std::move(p)) {
  require(pi.size() > 0, "policy table must be nonempty");
  require(pi.allFinite() && pi.minCoeff() >= 0.0,
          "policy table entries must be finite and nonnegative");
  for (int s = 0; s < pi.rows(); ++s) {
    require(std::abs(pi.row(s).sum() - 1.0) <= kProbRowTol,
            "policy table rows must sum to 1");
  }
}

TabularMdp::TabularMdp(int S, int A, double gamma_, MatrixXd rewards_,
                       std::vector<MatrixXd> transitions_)
    : num_states(S),
      num_actions(A),
      gamma(gamma_),
      rewards(std::move(rewards_)),
      transitions(std::move(transitions_)) {
  require(S > 0, "num_states must be positive");
  require(A > 0, "num_actions must be positive");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
  require(rewards.rows() == S && rewards.cols() == A,
          "rewards must be a num_states x num_actions table");
  require(rewards.allFinite() && rewards.minCoeff() >= 0.0 && rewards.maxCoeff() <= 1.0,
          "rewards must lie in [0,1]");
  require(static_cast<int>(transitions.size()) == A,
          "transitions must have one matrix per action");
  for (const MatrixXd& pa : transitions) {
    require(pa.rows() == S && pa.cols() == S, "transitions must be S x S per action");
    require(pa.allFinite() && pa.minCoeff() >= 0.0,
            "transitions entries must be finite and nonnegative");
    for (int s = 0; s < S; ++s) {
      require(std::abs(pa.row(s).sum() - 1.0) <= kProbRowTol,
              "transitions rows must sum to 1");
    }
  }
}

TabularMdp TabularMdp::bandit(const VectorXd& r) {
  require(r.size() > 0, "rewards must be nonempty");
  MatrixXd rewards = r.transpose();
  std::vector<MatrixXd> transitions(r.size(), MatrixXd::Ones(1, 1));
  return TabularMdp(1, static_cast<int>(r.size()), 0.0, std::move(rewards),
                    std::move(transitions));
}

MatrixXd TabularMdp::policy_transition(const MatrixXd& pi) const {
  MatrixXd p_pi = MatrixXd::Zero(num_states, num_states);
  for (int a = 0; a < num_actions; ++a) {
    p_pi.noalias() += pi.col(a).asDiagonal() * transitions[a];
  }
  return p_pi;
}

// ----- policy transforms ----------------------------------------------------------

PolicyTable softmax_policy(const PolicyLogits& logits) {
  const MatrixXd& th = logits.theta;
  MatrixXd pi(th.rows(), th.cols());
  for (int s = 0; s < th.rows(); ++s) {
    Eigen::ArrayXd e = (th.row(s).array() - th.row(s).maxCoeff()).exp();
    pi.row(s) = e / e.sum();
  }
  return PolicyTable(std::move(pi));
}

MatrixXd log_softmax(const MatrixXd& theta) {
  if (!theta.allFinite()) throw InvalidInput("logit table entries must be finite");
  MatrixXd out(theta.rows(), theta.cols());
  for (int s = 0; s < theta.rows(); ++s) {
    const double m = theta.row(s).maxCoeff();
    const double lse = m + std::log((theta.row(s).array() - m).exp().sum());
    out.row(s) = theta.row(s).array() - lse;
  }
  return out;
}

MatrixXd h_matrix(const VectorXd& pi_row) {
  if (pi_row.size() == 0 || !pi_row.allFinite() || pi_row.minCoeff() < 0.0 ||
      std::abs(pi_row.sum() - 1.0) > kProbRowTol) {
    throw InvalidInput("h_matrix needs a probability vector");
  }
  MatrixXd h = MatrixXd(pi_row.asDiagonal());
  h.noalias() -= pi_row * pi_row.transpose();
  return h;
}

double logsumexp(const VectorXd& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

VectorXd softmax_vec(const VectorXd& theta) {
  if (!theta.allFinite()) throw InvalidInput("logits must be finite");
  Eigen::ArrayXd e = (theta.array() - theta.maxCoeff()).exp();
  return e / e.sum();
}

VectorXd log_softmax_vec(const VectorXd& theta) {
  if (!theta.allFinite()) throw InvalidInput("logits must be finite");
  return theta.array() - logsumexp(theta);
}

std::vector<int> argmax_set(const VectorXd& r) {
  const double m = r.maxCoeff();
  std::vector<int> out;
  for (int a = 0; a < r.size(); ++a) {
    if (r(a) == m) out.push_back(a);
  }
  return out;
}

// ----- evaluation and solution -----------------------------------------------------

ValueBundle policy_values(const TabularMdp& mdp, const PolicyTable& pol,
                          const StateDistribution& mu) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  require(pol.pi.rows() == S && pol.pi.cols() == A, "policy shape mismatch");
  require(mu.size() == S, "mu length mismatch");

  const MatrixXd p_pi = mdp.policy_transition(pol.pi);
  const VectorXd r_pi = (pol.pi.array() * mdp.rewards.array()).rowwise().sum().matrix();
  MatrixXd sys = MatrixXd::Identity(S, S) - mdp.gamma * p_pi;

  ValueBundle b;
  b.v = sys.partialPivLu().solve(r_pi);
  b.q = mdp.rewards;
  for (int a = 0; a < A; ++a) {
    b.q.col(a).noalias() += mdp.gamma * (mdp.transitions[a] * b.v);
  }
  b.adv = b.q.colwise() - b.v;
  b.d = (1.0 - mdp.gamma) * sys.transpose().partialPivLu().solve(mu.p);

  const double vmax = 1.0 / (1.0 - mdp.gamma);
  if (!b.v.allFinite() || b.v.minCoeff() < -kSolveTol ||
      b.v.maxCoeff() > vmax + kSolveTol) {
    throw NumericalFailure("policy evaluation produced out-of-range values");
  }
  if (std::abs(b.d.sum() - 1.0) > kAlgebraTol) {
    throw NumericalFailure("discounted state distribution failed its sum check");
  }
  return b;
}

StateDistribution discounted_state_distribution(const TabularMdp& mdp,
                                                const PolicyTable& pol,
                                                const StateDistribution& mu) {
  const int S = mdp.num_states;
  require(pol.pi.rows() == S && pol.pi.cols() == mdp.num_actions,
          "policy shape mismatch");
  require(mu.size() == S, "mu length mismatch");
  MatrixXd sys = MatrixXd::Identity(S, S) - mdp.gamma * mdp.policy_transition(pol.pi);
  VectorXd d = (1.0 - mdp.gamma) * sys.transpose().partialPivLu().solve(mu.p);
  if (std::abs(d.sum() - 1.0) > kAlgebraTol) {
    throw NumericalFailure("discounted state distribution failed its sum check");
  }
  // Exact sums can drift by a few ulp; the constructor demands 1e-12.
  d /= d.sum();
  return StateDistribution(std::move(d));
}

OptimalSolution solve_optimal(const TabularMdp& mdp, double tol) {
  require(tol > 0.0, "tol must be positive");
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double thresh = value_iteration_threshold(mdp.gamma, tol);

  MatrixXd q = MatrixXd::Zero(S, A);
  for (int sweep = 0;; ++sweep) {
    if (sweep >= kMaxSweeps) throw NumericalFailure("value iteration did not converge");
    const VectorXd v = q.rowwise().maxCoeff();
    MatrixXd next = mdp.rewards;
    for (int a = 0; a < A; ++a) {
      next.col(a).noalias() += mdp.gamma * (mdp.transitions[a] * v);
    }
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change < thresh) break;
  }

  OptimalSolution opt;
  opt.q_star = q;
  opt.v_star = q.rowwise().maxCoeff();
  opt.a_star.resize(S);
  opt.unique.resize(S);
  opt.delta_star = std::numeric_limits<double>::infinity();
  for (int s = 0; s < S; ++s) {
    int best = 0;
    for (int a = 1; a < A; ++a) {
      if (q(s, a) > q(s, best)) best = a;  // lowest index wins ties
    }
    opt.a_star[s] = best;
    int near = 0;
    for (int a = 0; a < A; ++a) {
      if (q(s, best) - q(s, a) <= 10.0 * tol) ++near;
      if (a != best) opt.delta_star = std::min(opt.delta_star, q(s, best) - q(s, a));
    }
    opt.unique[s] = (near == 1);
  }
  return opt;
}

namespace {

// Shared soft evaluation once pi and log pi are known.
SoftValueBundle soft_values_impl(const TabularMdp& mdp, const MatrixXd& pi,
                                 const MatrixXd& log_pi, const StateDistribution& mu,
                                 double tau) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const VectorXd r_soft =
      (pi.array() * (mdp.rewards.array() - tau * log_pi.array())).rowwise().sum().matrix();
  MatrixXd sys = MatrixXd::Identity(S, S) - mdp.gamma * mdp.policy_transition(pi);
  Eigen::PartialPivLU<MatrixXd> lu(sys);

  SoftValueBundle b;
  b.temperature = tau;
  b.v_soft = lu.solve(r_soft);
  b.q_soft = mdp.rewards;
  for (int a = 0; a < A; ++a) {
    b.q_soft.col(a).noalias() += mdp.gamma * (mdp.transitions[a] * b.v_soft);
  }
  b.adv_soft = (b.q_soft - tau * log_pi).colwise() - b.v_soft;

  const VectorXd h_pi = -(pi.array() * log_pi.array()).rowwise().sum().matrix();
  b.entropy_rate = mu.p.dot(lu.solve(h_pi));

  const double cap = (1.0 + tau * std::log(static_cast<double>(A))) / (1.0 - mdp.gamma);
  if (!b.v_soft.allFinite() || b.v_soft.minCoeff() < -kSolveTol ||
      b.v_soft.maxCoeff() > cap + kSolveTol) {
    throw NumericalFailure("soft policy evaluation produced out-of-range values");
  }
  return b;
}

}  // namespace

SoftValueBundle soft_policy_values(const TabularMdp& mdp, const PolicyTable& pol,
                                   const StateDistribution& mu, double tau) {
  require(tau > 0.0, "tau must be positive");
  require(pol.pi.rows() == mdp.num_states && pol.pi.cols() == mdp.num_actions,
          "policy shape mismatch");
  require(mu.size() == mdp.num_states, "mu length mismatch");
  require(pol.pi.minCoeff() > 0.0, "soft values need a strictly positive policy");
  return soft_values_impl(mdp, pol.pi, pol.pi.array().log().matrix(), mu, tau);
}

SoftValueBundle soft_values_from_logits(const TabularMdp& mdp, const PolicyLogits& logits,
                                        const StateDistribution& mu, double tau) {
  require(tau > 0.0, "tau must be positive");
  require(logits.theta.rows() == mdp.num_states && logits.theta.cols() == mdp.num_actions,
          "logit shape mismatch");
  require(mu.size() == mdp.num_states, "mu length mismatch");
  const MatrixXd log_pi = log_softmax(logits.theta);
  return soft_values_impl(mdp, log_pi.array().exp().matrix(), log_pi, mu, tau);
}

SoftOptimum solve_soft_optimal(const TabularMdp& mdp, double tau, double tol) {
  require(tau > 0.0, "tau must be positive");
  require(tol > 0.0, "tol must be positive");
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double thresh = value_iteration_threshold(mdp.gamma, tol);

  VectorXd v = VectorXd::Zero(S);
  MatrixXd q(S, A);
  for (int sweep = 0;; ++sweep) {
    if (sweep >= kMaxSweeps) {
      throw NumericalFailure("soft value iteration did not converge");
    }
    q = mdp.rewards;
    for (int a = 0; a < A; ++a) {
      q.col(a).noalias() += mdp.gamma * (mdp.transitions[a] * v);
    }
    VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      next(s) = tau * logsumexp(q.row(s).transpose() / tau);
    }
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (change < thresh) break;
  }

  // pi(a|s) = exp{(q - v)/tau}; the softmax keeps rows normalized exactly.
  MatrixXd pi(S, A);
  for (int s = 0; s < S; ++s) {
    pi.row(s) = softmax_vec(q.row(s).transpose() / tau).transpose();
  }
  SoftOptimum out;
  out.pi = PolicyTable(std::move(pi));
  out.values = soft_policy_values(mdp, out.pi, StateDistribution::uniform(S), tau);
  return out;
}

double discounted_entropy(const TabularMdp& mdp, const PolicyTable& pol,
                          const StateDistribution& rho) {
  require(pol.pi.rows() == mdp.num_states && pol.pi.cols() == mdp.num_actions,
          "policy shape mismatch");
  require(rho.size() == mdp.num_states, "rho length mismatch");
  require(pol.pi.minCoeff() > 0.0, "discounted entropy needs a strictly positive policy");
  const VectorXd h_pi =
      -(pol.pi.array() * pol.pi.array().log()).rowwise().sum().matrix();
  MatrixXd sys =
      MatrixXd::Identity(mdp.num_states, mdp.num_states) -
      mdp.gamma * mdp.policy_transition(pol.pi);
  const double value = rho.p.dot(sys.partialPivLu().solve(h_pi));
  const double cap = std::log(static_cast<double>(mdp.num_actions)) / (1.0 - mdp.gamma);
  if (!(value >= -kSolveTol && value <= cap + kSolveTol)) {
    throw NumericalFailure("discounted entropy out of range");
  }
  return value;
}

// ----- random instances -------------------------------------------------------------

std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

VectorXd random_rewards(std::mt19937_64& gen, int k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd r(k);
  for (int a = 0; a < k; ++a) r(a) = unif(gen);
  return r;
}

VectorXd random_distribution(std::mt19937_64& gen, int n) {
  // Dirichlet(1) == normalized i.i.d. Exp(1) draws.
  std::exponential_distribution<double> expo(1.0);
  VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = expo(gen);
  w /= w.sum();
  return w;
}

TabularMdp random_mdp(std::mt19937_64& gen, int num_states, int num_actions,
                      double gamma) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MatrixXd rewards(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) rewards(s, a) = unif(gen);
  }
  std::vector<MatrixXd> transitions(num_actions, MatrixXd(num_states, num_states));
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      transitions[a].row(s) = random_distribution(gen, num_states).transpose();
    }
  }
  return TabularMdp(num_states, num_actions, gamma, std::move(rewards),
                    std::move(transitions));
}

MatrixXd random_logits(std::mt19937_64& gen, int num_states, int num_actions,
                       double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  MatrixXd theta(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) theta(s, a) = normal(gen);
  }
  return theta;
}

// ----- JSON wire format ---------------------------------------------------------------

namespace {

MatrixXd parse_matrix(const json& rows, int want_rows, int want_cols,
                      const std::string& field) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != want_rows) {
    throw InvalidInput("field '" + field + "': expected " + std::to_string(want_rows) +
                       " rows");
  }
  MatrixXd out(want_rows, want_cols);
  for (int r = 0; r < want_rows; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || static_cast<int>(row.size()) != want_cols) {
      throw InvalidInput("field '" + field + "': row " + std::to_string(r) +
                         " must have " + std::to_string(want_cols) + " entries");
    }
    for (int c = 0; c < want_cols; ++c) {
      if (!row[c].is_number()) {
        throw InvalidInput("field '" + field + "': entries must be numbers");
      }
      out(r, c) = row[c].get<double>();
    }
  }
  return out;
}

}  // namespace

TabularMdp mdp_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("problem must be a JSON object");
  if (!j.contains("num_states")) {
    // Bandit shorthand.
    if (!j.contains("rewards") || !j["rewards"].is_array()) {
      throw InvalidInput("field 'rewards': required");
    }
    VectorXd r(j["rewards"].size());
    for (int a = 0; a < r.size(); ++a) {
      if (!j["rewards"][a].is_number()) {
        throw InvalidInput("field 'rewards': entries must be numbers");
      }
      r(a) = j["rewards"][a].get<double>();
    }
    try {
      return TabularMdp::bandit(r);
    } catch (const InvalidInput& e) {
      throw InvalidInput(std::string("field 'rewards': ") + e.what());
    }
  }

  for (const char* key : {"num_states", "num_actions", "gamma", "rewards", "transitions"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("field '") + key + "': required");
  }
  if (!j["num_states"].is_number_integer() || !j["num_actions"].is_number_integer()) {
    throw InvalidInput("field 'num_states'/'num_actions': must be integers");
  }
  const int S = j["num_states"].get<int>();
  const int A = j["num_actions"].get<int>();
  if (S <= 0) throw InvalidInput("field 'num_states': must be positive");
  if (A <= 0) throw InvalidInput("field 'num_actions': must be positive");
  if (!j["gamma"].is_number()) throw InvalidInput("field 'gamma': must be a number");
  const double gamma = j["gamma"].get<double>();
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw InvalidInput("field 'gamma': must lie in [0,1)");
  }

  MatrixXd rewards = parse_matrix(j["rewards"], S, A, "rewards");

  const json& tr = j["transitions"];
  if (!tr.is_array() || static_cast<int>(tr.size()) != S) {
    throw InvalidInput("field 'transitions': expected one entry per state");
  }
  std::vector<MatrixXd> transitions(A, MatrixXd(S, S));
  for (int s = 0; s < S; ++s) {
    const json& per_action = tr[s];
    if (!per_action.is_array() || static_cast<int>(per_action.size()) != A) {
      throw InvalidInput("field 'transitions': state " + std::to_string(s) +
                         " must list one row per action");
    }
    for (int a = 0; a < A; ++a) {
      const json& row = per_action[a];
      if (!row.is_array() || static_cast<int>(row.size()) != S) {
        throw InvalidInput("field 'transitions': rows must have num_states entries");
      }
      for (int s2 = 0; s2 < S; ++s2) {
        if (!row[s2].is_number()) {
          throw InvalidInput("field 'transitions': entries must be numbers");
        }
        transitions[a](s, s2) = row[s2].get<double>();
      }
    }
  }

  try {
    return TabularMdp(S, A, gamma, std::move(rewards), std::move(transitions));
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field 'problem': ") + e.what());
  }
}

json mdp_to_json(const TabularMdp& mdp) {
  json j;
  j["num_states"] = mdp.num_states;
  j["num_actions"] = mdp.num_actions;
  j["gamma"] = mdp.gamma;
  json rewards = json::array();
  for (int s = 0; s < mdp.num_states; ++s) {
    json row = json::array();
    for (int a = 0; a < mdp.num_actions; ++a) row.push_back(mdp.rewards(s, a));
    rewards.push_back(std::move(row));
  }
  j["rewards"] = std::move(rewards);
  json transitions = json::array();
  for (int s = 0; s < mdp.num_states; ++s) {
    json per_action = json::array();
    for (int a = 0; a < mdp.num_actions; ++a) {
      json row = json::array();
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        row.push_back(mdp.transitions[a](s, s2));
      }
      per_action.push_back(std::move(row));
    }
    transitions.push_back(std::move(per_action));
  }
  j["transitions"] = std::move(transitions);
  return j;
}

std::variant<VectorXd, TabularMdp> problem_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("field 'problem': must be a JSON object");
  if (!j.contains("num_states")) {
    TabularMdp embedded = mdp_from_json(j);  // validates the bandit shorthand
    return VectorXd(embedded.rewards.row(0).transpose());
  }
  return mdp_from_json(j);
}

json problem_to_json(const std::variant<VectorXd, TabularMdp>& problem) {
  if (std::holds_alternative<VectorXd>(problem)) {
    const VectorXd& r = std::get<VectorXd>(problem);
    json j;
    j["rewards"] = std::vector<double>(r.data(), r.data() + r.size());
    return j;
  }
  return mdp_to_json(std::get<TabularMdp>(problem));
}

}  // namespace pgrates
