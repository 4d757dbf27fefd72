#include "pgrates/gradients.hpp"

#include <cmath>

namespace pgrates {

VectorXd bandit_pg_gradient(const VectorXd& r, const VectorXd& theta) {
  if (r.size() != theta.size())
    throw InvalidInput("bandit_pg_gradient: rewards and logits must have equal length");
  const VectorXd pi = softmax_vec(theta);
  const double mean = pi.dot(r);
  return (pi.array() * (r.array() - mean)).matrix();
}

VectorXd bandit_entropy_gradient(const VectorXd& r, const VectorXd& theta, double tau) {
  if (r.size() != theta.size())
    throw InvalidInput("bandit_entropy_gradient: rewards and logits must have equal length");
  if (!(tau > 0.0)) throw InvalidInput("bandit_entropy_gradient: tau must be positive");
  const VectorXd pi = softmax_vec(theta);
  const VectorXd x = r - tau * log_softmax_vec(theta);
  const double mean = pi.dot(x);
  return (pi.array() * (x.array() - mean)).matrix();
}

GradientTable mdp_pg_gradient(const TabularMdp& mdp, const PolicyLogits& theta,
                              const StateDistribution& mu) {
  const PolicyTable pol = softmax_policy(theta);
  const ValueBundle vals = policy_values(mdp, pol, mu);
  const VectorXd scale = vals.d / (1.0 - mdp.gamma);
  return ((pol.pi.array() * vals.adv.array()).colwise() * scale.array()).matrix();
}

GradientTable mdp_entropy_gradient(const TabularMdp& mdp, const PolicyLogits& theta,
                                   const StateDistribution& mu, double tau) {
  const SoftValueBundle vals = soft_values_from_logits(mdp, theta, mu, tau);
  const PolicyTable pol = softmax_policy(theta);
  const StateDistribution d = discounted_state_distribution(mdp, pol, mu);
  const VectorXd scale = d.p / (1.0 - mdp.gamma);
  return ((pol.pi.array() * vals.adv_soft.array()).colwise() * scale.array()).matrix();
}

GradientTable finite_difference_gradient(
    const std::function<double(const MatrixXd&)>& objective, const MatrixXd& theta,
    double h) {
  if (!(h > 0.0)) throw InvalidInput("finite_difference_gradient: h must be positive");
  GradientTable g(theta.rows(), theta.cols());
  MatrixXd probe = theta;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
      probe(i, j) = theta(i, j) + h;
      const double up = objective(probe);
      probe(i, j) = theta(i, j) - h;
      const double down = objective(probe);
      probe(i, j) = theta(i, j);
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

double gradient_rel_error(const MatrixXd& analytic, const MatrixXd& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols())
    throw InvalidInput("gradient_rel_error: shape mismatch");
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace pgrates
