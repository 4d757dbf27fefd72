#pragma once
// Finite tabular MDPs with softmax policies: exact policy evaluation by dense
// linear solves, optimal / soft-optimal solutions by value iteration, and the
// discounted quantities (state distribution, entropy rate) everything else is
// built on.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgrates {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ----- errors -----------------------------------------------------------------

// Rejected inputs: bad shapes, invalid probabilities, out-of-range parameters.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown at run time (non-finite iterate, failed residual check).
// `iteration` carries the offending optimizer step where applicable, else -1.
struct NumericalFailure : std::runtime_error {
  long long iteration;
  explicit NumericalFailure(const std::string& msg, long long t = -1)
      : std::runtime_error(msg), iteration(t) {}
};

// ----- shared tolerances --------------------------------------------------------

inline constexpr double kProbRowTol = 1e-12;  // probability rows must sum to 1
inline constexpr double kAlgebraTol = 1e-10;  // closed-form algebraic identities
inline constexpr double kSolveTol = 1e-8;     // identities routed through linear solves
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ----- domain types -------------------------------------------------------------

// Length-S probability vector (initial distribution mu/rho or visitation d).
struct StateDistribution {
  VectorXd p;
  StateDistribution() = default;
  explicit StateDistribution(VectorXd w);
  static StateDistribution uniform(int n);
  int size() const { return static_cast<int>(p.size()); }
};

// S x A table of finite logits theta(s,a).
struct PolicyLogits {
  MatrixXd theta;
  PolicyLogits() = default;
  explicit PolicyLogits(MatrixXd t);
};

// S x A row-stochastic policy table.
struct PolicyTable {
  MatrixXd pi;
  PolicyTable() = default;
  explicit PolicyTable(MatrixXd p);
};

// []P[s][a][s'] stored per action as transitions[a](s, s'); rewards in [0,1],
// discount strictly below 1.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  MatrixXd rewards;                   // S x A
  std::vector<MatrixXd> transitions;  // A matrices, each S x S

  TabularMdp() = default;
  TabularMdp(int S, int A, double gamma_, MatrixXd rewards_,
             std::vector<MatrixXd> transitions_);

  // One-state embedding of a reward vector: gamma = 0, self-loop transition.
  static TabularMdp bandit(const VectorXd& r);

  // P_pi(s, s') = sum_a pi(a|s) P(s'|s,a)
  MatrixXd policy_transition(const MatrixXd& pi) const;
};

// On-policy values for a stated mu: state values v, action values q,
// advantages adv = q - v, and discounted visitation d (sums to 1).
struct ValueBundle {
  VectorXd v;
  MatrixXd q;
  MatrixXd adv;
  VectorXd d;
};

// Optimal solution with per-state argmax (lowest index on ties), per-state
// uniqueness flags at 10*tol, and the optimal value gap delta_star (0 when a
// tie makes the gap degenerate; +inf for single-action problems).
struct OptimalSolution {
  VectorXd v_star;
  MatrixXd q_star;
  std::vector<int> a_star;
  std::vector<bool> unique;
  double delta_star = 0.0;
};

// Entropy-regularized values at temperature tau: v_soft solves the soft
// Bellman system, adv_soft = q_soft - tau*log pi - v_soft, and entropy_rate is
// the discounted entropy for the stated distribution.
struct SoftValueBundle {
  VectorXd v_soft;
  MatrixXd q_soft;
  MatrixXd adv_soft;
  double entropy_rate = 0.0;
  double temperature = 0.0;
};

struct SoftOptimum {
  PolicyTable pi;
  SoftValueBundle values;
};

// ----- policy transforms ----------------------------------------------------------

// Row-wise softmax, max-subtracted for overflow safety.
PolicyTable softmax_policy(const PolicyLogits& logits);

// Row-wise log softmax: theta - logsumexp(theta), stable for extreme logits.
MatrixXd log_softmax(const MatrixXd& theta);

// H(pi) = diag(pi) - pi pi^T for one policy row; H 1 = 0.
MatrixXd h_matrix(const VectorXd& pi_row);

// Vector forms used on one-state problems.
double logsumexp(const VectorXd& x);
VectorXd softmax_vec(const VectorXd& theta);
VectorXd log_softmax_vec(const VectorXd& theta);

// Indices attaining max(r) (exact ties).
std::vector<int> argmax_set(const VectorXd& r);

// ----- evaluation and solution -----------------------------------------------------

// Solves (I - gamma P_pi) v = r_pi directly; q from the Bellman identity; d by
// the transposed resolvent, d = (1-gamma) (I - gamma P_pi^T)^{-1} mu.
ValueBundle policy_values(const TabularMdp& mdp, const PolicyTable& pi,
                          const StateDistribution& mu);

StateDistribution discounted_state_distribution(const TabularMdp& mdp,
                                                const PolicyTable& pi,
                                                const StateDistribution& mu);

// Value iteration on q until the sup-norm change is below tol*(1-gamma)/(2*gamma)
// (q error below tol); gamma = 0 converges in one sweep.
OptimalSolution solve_optimal(const TabularMdp& mdp, double tol = 1e-10);

// Soft Bellman evaluation of a strictly positive policy at temperature tau.
SoftValueBundle soft_policy_values(const TabularMdp& mdp, const PolicyTable& pi,
                                   const StateDistribution& mu, double tau);

// Same bundle computed from logits: log pi comes from log_softmax, so it works
// even where softmax underflows a policy entry to zero.
SoftValueBundle soft_values_from_logits(const TabularMdp& mdp, const PolicyLogits& logits,
                                        const StateDistribution& mu, double tau);

// Soft value iteration, v <- tau*logsumexp(q/tau) row-wise (max-subtracted);
// returns the softmax-optimal policy exp{(q - v)/tau} and its bundle.
SoftOptimum solve_soft_optimal(const TabularMdp& mdp, double tau, double tol = 1e-10);

// Discounted entropy: solves (I - gamma P_pi) h = h_pi with
// h_pi(s) = -sum_a pi(a|s) log pi(a|s) and returns rho^T h.
double discounted_entropy(const TabularMdp& mdp, const PolicyTable& pi,
                          const StateDistribution& rho);

// ----- random instances -------------------------------------------------------------

// Deterministic per-instance seed derivation (splitmix64 finalizer).
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

// Rewards i.i.d. uniform [0,1].
VectorXd random_rewards(std::mt19937_64& gen, int k);

// Transition rows from a symmetric Dirichlet(1); rewards uniform [0,1].
TabularMdp random_mdp(std::mt19937_64& gen, int num_states, int num_actions, double gamma);

// Logits i.i.d. normal with the given stddev.
MatrixXd random_logits(std::mt19937_64& gen, int num_states, int num_actions,
                       double stddev = 1.0);

// Dirichlet(1) probability vector.
VectorXd random_distribution(std::mt19937_64& gen, int n);

}  // namespace pgrates
