#pragma once
// Independent oracles for the tests: truncated power series for values,
// distributions, and entropy; brute-force policy enumeration for optimal
// values; fixed-point iteration for soft-optimal values. Written with plain
// loops so no code path is shared with the library implementations.

#include <cmath>
#include <limits>
#include <vector>

#include "pgrates/mdp_core.hpp"

namespace oracles {

using pgrates::MatrixXd;
using pgrates::TabularMdp;
using pgrates::VectorXd;

inline MatrixXd transition_under(const TabularMdp& mdp, const MatrixXd& pi) {
  MatrixXd p = MatrixXd::Zero(mdp.num_states, mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      for (int s2 = 0; s2 < mdp.num_states; ++s2)
        p(s, s2) += pi(s, a) * mdp.transitions[a](s, s2);
  return p;
}

// V = sum_{k<=terms} gamma^k P_pi^k r_pi, truncated.
inline VectorXd series_values(const TabularMdp& mdp, const MatrixXd& pi,
                              int terms = 500) {
  const MatrixXd p = transition_under(mdp, pi);
  VectorXd r_pi = VectorXd::Zero(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) r_pi(s) += pi(s, a) * mdp.rewards(s, a);
  VectorXd term = r_pi;
  VectorXd v = r_pi;
  for (int k = 1; k <= terms; ++k) {
    term = mdp.gamma * (p * term);
    v += term;
  }
  return v;
}

// d = (1-gamma) sum_{k<=terms} gamma^k (P_pi^T)^k mu, truncated.
inline VectorXd series_distribution(const TabularMdp& mdp, const MatrixXd& pi,
                                    const VectorXd& mu, int terms = 500) {
  const MatrixXd pt = transition_under(mdp, pi).transpose();
  VectorXd term = mu;
  VectorXd d = mu;
  for (int k = 1; k <= terms; ++k) {
    term = mdp.gamma * (pt * term);
    d += term;
  }
  return (1.0 - mdp.gamma) * d;
}

// Discounted entropy sum_{k<=terms} gamma^k E[h(s_k)] from rho.
inline double series_entropy(const TabularMdp& mdp, const MatrixXd& pi,
                             const VectorXd& rho, int terms = 500) {
  VectorXd h_pi = VectorXd::Zero(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      if (pi(s, a) > 0.0) h_pi(s) -= pi(s, a) * std::log(pi(s, a));
  const MatrixXd pt = transition_under(mdp, pi).transpose();
  VectorXd dist = rho;
  double total = dist.dot(h_pi);
  for (int k = 1; k <= terms; ++k) {
    dist = mdp.gamma * (pt * dist);
    total += dist.dot(h_pi);
  }
  return total;
}

// Soft values of a fixed positive policy: series on r_pi with the entropy
// bonus folded into the per-state reward.
inline VectorXd series_soft_values(const TabularMdp& mdp, const MatrixXd& pi,
                                   double tau, int terms = 500) {
  TabularMdp shifted = mdp;
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      shifted.rewards(s, a) = mdp.rewards(s, a) - tau * std::log(pi(s, a));
  return series_values(shifted, pi, terms);
}

// V* by exhaustive enumeration of all A^S deterministic policies.
inline VectorXd enumerate_optimal_values(const TabularMdp& mdp, int terms = 500) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  std::vector<int> choice(static_cast<std::size_t>(S), 0);
  VectorXd best = VectorXd::Constant(S, -std::numeric_limits<double>::infinity());
  while (true) {
    MatrixXd pi = MatrixXd::Zero(S, A);
    for (int s = 0; s < S; ++s) pi(s, choice[static_cast<std::size_t>(s)]) = 1.0;
    best = best.cwiseMax(series_values(mdp, pi, terms));
    int i = 0;
    while (i < S && ++choice[static_cast<std::size_t>(i)] == A) {
      choice[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == S) break;
  }
  return best;
}

// Soft-optimal values by direct fixed-point iteration of the soft Bellman
// operator v <- tau*lse(q(v)/tau), max-subtracted.
inline VectorXd soft_optimal_values(const TabularMdp& mdp, double tau,
                                    int max_iters = 200000) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  VectorXd v = VectorXd::Zero(S);
  for (int iter = 0; iter < max_iters; ++iter) {
    VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double m = -std::numeric_limits<double>::infinity();
      std::vector<double> q(static_cast<std::size_t>(A));
      for (int a = 0; a < A; ++a) {
        double future = 0.0;
        for (int s2 = 0; s2 < S; ++s2) future += mdp.transitions[a](s, s2) * v(s2);
        q[static_cast<std::size_t>(a)] = mdp.rewards(s, a) + mdp.gamma * future;
        m = std::max(m, q[static_cast<std::size_t>(a)]);
      }
      double sum = 0.0;
      for (int a = 0; a < A; ++a) sum += std::exp((q[static_cast<std::size_t>(a)] - m) / tau);
      next(s) = m + tau * std::log(sum);
    }
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-14) break;
  }
  return v;
}

// Plain-loop softmax for cross-checking the library transform.
inline VectorXd softmax_loops(const VectorXd& theta) {
  double m = theta(0);
  for (int i = 1; i < theta.size(); ++i) m = std::max(m, theta(i));
  VectorXd out(theta.size());
  double z = 0.0;
  for (int i = 0; i < theta.size(); ++i) {
    out(i) = std::exp(theta(i) - m);
    z += out(i);
  }
  return out / z;
}

}  // namespace oracles
