#pragma once
// Numerical certificates: Łojasiewicz-type gradient-domination bounds, the
// reversed bound, smoothness witnesses, degree probes, rate fitting from
// traces, theory envelopes along traces, and small exact fixtures.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgrates/gradients.hpp"
#include "pgrates/optimizer.hpp"

namespace pgrates {

// One verified inequality. Convention: margin = lhs - rhs and pass iff
// margin >= -tol, so every check is phrased as "lhs >= rhs". Equality checks
// use margin = -|lhs - rhs|.
struct CheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string context;
};

CheckReport make_ge_check(std::string name, double lhs, double rhs, double tol,
                          std::string context = "");
CheckReport make_eq_check(std::string name, double lhs, double rhs, double tol,
                          std::string context = "");

// Least-squares fit of a sub-optimality series: log delta against log t
// (power) or against t (exponential).
struct RateFit {
  std::string model;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  long long t_lo = 0;
  long long t_hi = 0;
};

std::string check_to_json_line(const CheckReport& check);
std::string rate_fit_to_json_line(const RateFit& fit);

// ----- gradient-domination bounds -----------------------------------------------

// ||grad||_2 >= pi(a*) * (pi* - pi)^T r; ties use (1/sqrt(|A*|)) * sum pi(a*).
CheckReport lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta,
                               double tol = 1e-10, std::string context = "");

// ||grad||_2 >= min_s pi(a*(s)|s) / (sqrt(S) * mismatch) * (V*(rho) - V(rho)),
// mismatch = max_s d_rho^{pi*}(s) / d_mu^{pi}(s).
CheckReport lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                            const StateDistribution& mu, const StateDistribution& rho,
                            double tol = 1e-9, std::string context = "");

// ||soft grad||_2 >= sqrt(2 tau) * min_a pi(a) * soft_delta^{1/2}.
CheckReport entropy_lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta,
                                       double tau, double tol = 1e-10,
                                       std::string context = "");

// MDP form with C(theta) = sqrt(2 tau)/sqrt(S) * min_s sqrt(mu(s)) *
// min_{s,a} pi(a|s) * mismatch^{-1/2}, mismatch w.r.t. the soft-optimal policy.
CheckReport entropy_lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                                    const StateDistribution& mu,
                                    const StateDistribution& rho, double tau,
                                    double tol = 1e-9, std::string context = "");

// ||grad||_2 <= (sqrt(2)/gap) * delta. Reported with lhs = bound, rhs = norm.
CheckReport reversed_lojasiewicz_bandit(const VectorXd& r, const VectorXd& theta,
                                        double tol = 1e-10, std::string context = "");

// ||grad||_2 <= sqrt(2)/((1-gamma) gap*) * delta, gradient and delta both at mu.
CheckReport reversed_lojasiewicz_mdp(const TabularMdp& mdp, const PolicyLogits& theta,
                                     const StateDistribution& mu, double tol = 1e-9,
                                     std::string context = "");

// ----- contraction / smoothness --------------------------------------------------

// zeta = tau*theta - r mean-centered, and its 2-norm.
std::pair<VectorXd, double> contraction_residual(const VectorXd& r, const VectorXd& theta,
                                                 double tau);

// A differentiable objective handed to smoothness_witness: value and exact
// gradient at arbitrary logits.
struct Objective {
  std::function<double(const MatrixXd&)> value;
  std::function<MatrixXd(const MatrixXd&)> gradient;
};

// |f(theta') - f(theta) - <grad f(theta), theta' - theta>| <= (beta/2)||theta'-theta||^2,
// tol 1e-10 * (1 + beta * ||theta' - theta||^2).
CheckReport smoothness_witness(const Objective& objective, const MatrixXd& theta,
                               const MatrixXd& theta_prime, double beta,
                               std::string context = "");

// ----- Łojasiewicz degree probes --------------------------------------------------

enum class DegreeMode { kPlain, kEntropy };

// Evaluates ||grad|| >= C(theta) * delta^{1-xi}. Plain mode walks the corner
// family pi = (1-3eps, 2eps, eps) over a log grid of eps down to 1e-8 with
// C = pi(a*) (r must be 3 strictly descending rewards); entropy mode draws
// num_samples random bandit instances with C = sqrt(2 tau) * min_a pi(a).
std::vector<CheckReport> degree_probe(const VectorXd& r, double tau, double xi,
                                      int num_samples, DegreeMode mode,
                                      std::uint64_t seed = 0);

// ----- trace analysis -------------------------------------------------------------

// model "power" or "exponential". Exponential fits soft_delta when the trace
// has it, else delta; power always fits delta. Default window: last decade of
// t (power) or second half (exponential). Nonpositive values are dropped;
// an empty window is an error.
RateFit rate_fit(const RunTrace& trace, const std::string& model,
                 std::optional<std::pair<long long, long long>> window = std::nullopt);

// delta_t >= gap^2/(6t) (bandit) or (1-gamma)^5 gap*^2/(12t) (MDP) over the
// final quarter of the trace. Reported as lhs = min t*delta_t, rhs = the
// constant. Traces with fewer than 100 records are an error; a final quarter
// entirely below 1e-300 makes the bound vacuous (pass, context says so).
CheckReport lower_bound_check(const RunTrace& trace, double delta_star, double gamma);

// Three-action instance where the value of the midpoint parameter lies below
// the average of the endpoint values: lhs = average, rhs = midpoint value.
CheckReport nonconcavity_fixture();

// (r(2)-r(3)) / (2(r(1)-r(2))) for three strictly descending rewards: once
// pi(1)/pi(3) clears this ratio, the running minimum of pi(1) is monotone.
double corner_escape_threshold(const VectorXd& r);

// Closed-form floor (1/K) exp(-1/tau) exp(-4(||theta1||_inf + 1/tau) sqrt(K)).
double entropy_min_prob_floor(int k, double tau, double theta1_inf);

// Per-step contraction along an entropy bandit trace:
// zeta_{t+1} <= (1 - tau*eta*min_prob_t) * zeta_t at consecutive records.
CheckReport check_contraction_along_trace(const RunTrace& trace, double tol = 1e-10);

// min_prob >= entropy_min_prob_floor at every recorded step.
CheckReport check_min_prob_floor(const RunTrace& trace);

// soft_delta_t <= 2(tau||theta1||_inf + 1)^2 K / tau * exp(-2 tau eta c (t-1)).
CheckReport check_exponential_envelope(const RunTrace& trace);

// delta_t <= 5 / (t * c_t^2) along a plain bandit trace run at eta = 2/5.
CheckReport check_pseudo_rate_envelope(const RunTrace& trace);

// delta_t <= 5 K^2 / t along a plain bandit trace from uniform init.
CheckReport check_uniform_init_envelope(const RunTrace& trace);

// opt_prob nondecreasing across recorded steps (plain bandit, uniform init).
CheckReport check_opt_prob_nondecreasing(const RunTrace& trace, double tol = 1e-12);

// delta (soft = false) or soft_delta (soft = true) nonincreasing across
// recorded steps; equivalent to per-step objective ascent.
CheckReport check_descent_monotone(const RunTrace& trace, bool soft, double tol = 1e-12);

}  // namespace pgrates
