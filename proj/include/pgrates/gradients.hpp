#pragma once
// Exact policy gradients for the plain and entropy-regularized objectives,
// plus a central finite-difference oracle for cross-checking them.

#include <functional>

#include "pgrates/mdp_core.hpp"

namespace pgrates {

// S x A table aligned with PolicyLogits. Exact gradient ops have zero row
// sums (each row is an H(pi) image, and H annihilates constants); the
// finite-difference oracle only matches that up to O(h^2).
using GradientTable = MatrixXd;

// g(a) = pi(a) * (r(a) - pi^T r)
VectorXd bandit_pg_gradient(const VectorXd& r, const VectorXd& theta);

// g = H(pi) (r - tau * log pi); the log pi term shifts by a constant per row,
// so this equals H(pi) (r - tau * theta) as well.
VectorXd bandit_entropy_gradient(const VectorXd& r, const VectorXd& theta, double tau);

// g(s,a) = d_mu(s)/(1-gamma) * pi(a|s) * adv(s,a)
GradientTable mdp_pg_gradient(const TabularMdp& mdp, const PolicyLogits& theta,
                              const StateDistribution& mu);

// g(s,a) = d_mu(s)/(1-gamma) * pi(a|s) * adv_soft(s,a)
GradientTable mdp_entropy_gradient(const TabularMdp& mdp, const PolicyLogits& theta,
                                   const StateDistribution& mu, double tau);

// Central differences, (f(theta + h e) - f(theta - h e)) / 2h per coordinate.
GradientTable finite_difference_gradient(
    const std::function<double(const MatrixXd&)>& objective, const MatrixXd& theta,
    double h = 1e-5);

// max |a - n| / max(1, ||a||_inf); the floor keeps the metric meaningful near
// stationary points.
double gradient_rel_error(const MatrixXd& analytic, const MatrixXd& numeric);

}  // namespace pgrates
