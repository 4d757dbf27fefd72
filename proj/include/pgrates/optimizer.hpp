#pragma once
// Gradient-ascent loops for the four update rules (plain, entropy-regularized,
// two-stage, decaying temperature) with full per-iteration tracing.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "pgrates/mdp_core.hpp"

namespace pgrates {

enum class MethodKind { kPlain, kEntropy, kTwoStage, kDecaying };

std::string method_kind_name(MethodKind kind);
MethodKind method_kind_from_name(const std::string& name);

// An update rule plus its hyperparameters. eta empty means "auto": the step
// size each method's convergence theory prescribes (see default_eta).
struct MethodSpec {
  MethodKind kind = MethodKind::kPlain;
  std::optional<double> eta;
  double tau = 0.0;        // temperature (entropy, two_stage)
  double alpha = 0.0;      // decaying-schedule scale
  std::optional<long long> t1;  // explicit two_stage switch; empty = adaptive
  double switch_tol = 1e-6;     // adaptive switch threshold on ||pi_t - pi_{t-1}||_1

  // Throws InvalidInput on bad fields. Entropy-family methods with an explicit
  // eta must satisfy tau*eta <= 1 (the per-step contraction precondition).
  void validate() const;

  static MethodSpec plain(std::optional<double> eta = std::nullopt);
  static MethodSpec entropy(double tau, std::optional<double> eta = std::nullopt);
  static MethodSpec two_stage(double tau, std::optional<double> eta = std::nullopt,
                              std::optional<long long> t1 = std::nullopt,
                              double switch_tol = 1e-6);
  static MethodSpec decaying(double alpha);
};

// Initial logits: zero (uniform policy), i.i.d. standard normal from a seed,
// or an explicit table.
struct InitSpec {
  enum class Kind { kUniform, kRandom, kExplicit };
  Kind kind = Kind::kUniform;
  std::uint64_t seed = 0;
  MatrixXd theta;

  static InitSpec uniform();
  static InitSpec random(std::uint64_t seed);
  static InitSpec explicit_logits(MatrixXd theta);
  static InitSpec explicit_probs(const MatrixXd& probs);  // logits = log(probs)

  MatrixXd materialize(int num_states, int num_actions) const;
};

// A problem instance: a bandit reward vector or a full MDP.
using Problem = std::variant<VectorXd, TabularMdp>;

struct RunConfig {
  Problem problem;
  std::optional<StateDistribution> mu;   // gradient distribution; default uniform
  std::optional<StateDistribution> rho;  // evaluation distribution; default mu
  MethodSpec method;
  InitSpec init;
  long long iterations = 1;
  std::optional<long long> record_every;  // explicit stride; empty = auto thinning

  bool is_bandit() const;
  int num_states() const;
  int num_actions() const;
  StateDistribution effective_mu() const;
  StateDistribution effective_rho() const;
  // Throws InvalidInput. Bandit rewards must lie in [0,1]; MDP runs require
  // min_s mu(s) > 0; decaying runs are bandit-only and always use eta_t=1/tau_t.
  void validate() const;
};

// Per-iteration statistics, taken before the step-t update. NaN marks a field
// that does not apply to the run (it serializes as an empty CSV cell).
struct IterationRecord {
  long long t = 0;
  double delta = kNaN;      // V*(rho) - V(rho); bandit (pi* - pi)^T r
  double soft_delta = kNaN; // soft sub-optimality at the temperature in force
  double opt_prob = kNaN;   // pi(a*) (bandit, summed over ties) or min_s pi(a*(s)|s)
  double min_prob = kNaN;   // min_{s,a} pi(a|s)
  double zeta_norm = kNaN;  // ||tau*theta - r||, mean-centered (entropy-family bandit)
  double grad_norm = kNaN;
  double tau_t = kNaN;      // temperature in force (0 for plain updates)
};

struct RunTrace {
  RunConfig config;
  std::vector<IterationRecord> records;
  // Running minimum over ALL steps (not just recorded ones) of opt_prob,
  // sampled at each recorded row; parallel to records.
  std::vector<double> c_running;
  double wall_time_sec = 0.0;
  long long switch_iteration = -1;        // two_stage: first t stepped plainly
  double eta_effective = kNaN;            // resolved step size (NaN when scheduled)
  double post_switch_opt_prob_inf = kNaN; // two_stage: inf of opt_prob from the switch on
};

// Step size prescribed by the convergence theory when eta is "auto":
//   plain    2/5 (bandit) or (1-gamma)^3/8 (MDP)
//   entropy  1/tau (bandit) or (1-gamma)^3/(8 + tau(4 + 8 log A)) (MDP)
//   two_stage: per-phase entropy/plain defaults
//   decaying: scheduled, eta_t = 1/tau_t (query temperature_at)
double default_eta(const MethodSpec& method, const Problem& problem, bool entropy_phase);

// Temperature in force at iteration t. Plain -> 0; entropy/two_stage -> tau;
// decaying -> alpha*delta_star/log t for t >= 2 and the t=2 value at t=1.
// Decaying with delta_star == 0 is an invalid configuration.
double temperature_at(const MethodSpec& method, double delta_star, long long t);

// Initial logits the config resolves to (shape num_states x num_actions).
MatrixXd resolved_initial_logits(const RunConfig& config);

// Run T iterations, recording statistics for iteration t before its update
// (the final iterate is recorded and not stepped). Records every t when
// record_every is explicit (plus t=1 and t=T); otherwise every t <= 10^4 and
// then every ceil(T/10^4) steps. Throws NumericalFailure with the offending
// iteration if an update produces a non-finite logit.
RunTrace run(const RunConfig& config);

// CSV with header t,delta,soft_delta,opt_prob,min_prob,zeta_norm,grad_norm,tau_t;
// doubles in shortest round-trip form, NaN as an empty field.
void write_trace_csv(const RunTrace& trace, std::ostream& os);

}  // namespace pgrates
