#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pgrates/gradients.hpp"

using namespace pgrates;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

VectorXd vec3(double a, double b, double c) {
  VectorXd v(3);
  v << a, b, c;
  return v;
}

double plain_value(const TabularMdp& mdp, const StateDistribution& mu,
                   const MatrixXd& theta) {
  ValueBundle vb = policy_values(mdp, softmax_policy(PolicyLogits(theta)), mu);
  return mu.p.dot(vb.v);
}

double soft_value(const TabularMdp& mdp, const StateDistribution& mu,
                  const MatrixXd& theta, double tau) {
  SoftValueBundle vb = soft_values_from_logits(mdp, PolicyLogits(theta), mu, tau);
  return mu.p.dot(vb.v_soft);
}

}  // namespace

TEST_CASE("bandit_pg_gradient fixtures") {
  SUBCASE("two arms at the uniform policy") {
    VectorXd g = bandit_pg_gradient(vec2(1.0, 0.0), vec2(0.0, 0.0));
    CHECK(std::abs(g(0) - 0.25) <= 1e-15);
    CHECK(std::abs(g(1) + 0.25) <= 1e-15);
  }
  SUBCASE("three arms at an interior policy") {
    VectorXd pi = vec3(0.2, 0.3, 0.5);
    VectorXd g = bandit_pg_gradient(vec3(5.0, 4.0, 4.0), pi.array().log().matrix());
    CHECK(std::abs(g(0) - 0.16) <= 1e-12);
    CHECK(std::abs(g(1) + 0.06) <= 1e-12);
    CHECK(std::abs(g(2) + 0.10) <= 1e-12);
    CHECK(std::abs(g.norm() - 0.1 * std::sqrt(3.92)) <= 1e-12);
  }
  SUBCASE("gradient vanishes at a vertex") {
    std::mt19937_64 gen(2);
    for (int i = 0; i < 20; ++i) {
      VectorXd r = random_rewards(gen, 3);
      CHECK(bandit_pg_gradient(r, vec3(30.0, 0.0, 0.0)).norm() < 1e-9);
    }
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(bandit_pg_gradient(vec2(1.0, 0.0), vec3(0.0, 0.0, 0.0)),
                    InvalidInput);
  }
}

TEST_CASE("bandit_entropy_gradient") {
  SUBCASE("theta = r/tau is the fixed point") {
    VectorXd r = vec3(1.0, 0.9, 0.1);
    const double tau = 0.4;
    CHECK(bandit_entropy_gradient(r, r / tau, tau).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("vanishing temperature recovers the plain gradient") {
    std::mt19937_64 gen(3);
    VectorXd r = random_rewards(gen, 4);
    VectorXd th = random_logits(gen, 1, 4).row(0).transpose();
    VectorXd soft = bandit_entropy_gradient(r, th, 1e-8);
    VectorXd plain = bandit_pg_gradient(r, th);
    CHECK((soft - plain).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("two arms, unit temperature, uniform policy") {
    VectorXd g = bandit_entropy_gradient(vec2(1.0, 0.0), vec2(0.0, 0.0), 1.0);
    CHECK(std::abs(g(0) - 0.25) <= 1e-14);
    CHECK(std::abs(g(1) + 0.25) <= 1e-14);
  }
  SUBCASE("equals the H-matrix form on random instances") {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 100; ++i) {
      VectorXd r = random_rewards(gen, 5);
      VectorXd th = random_logits(gen, 1, 5, 2.0).row(0).transpose();
      const double tau = 0.3;
      VectorXd g = bandit_entropy_gradient(r, th, tau);
      VectorXd via_h = h_matrix(softmax_vec(th)) * (r - tau * log_softmax_vec(th));
      VectorXd via_theta = h_matrix(softmax_vec(th)) * (r - tau * th);
      CHECK((g - via_h).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((g - via_theta).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("nonpositive temperature is rejected") {
    CHECK_THROWS_AS(bandit_entropy_gradient(vec2(1.0, 0.0), vec2(0.0, 0.0), 0.0),
                    InvalidInput);
  }
}

TEST_CASE("mdp_pg_gradient") {
  SUBCASE("one state, gamma zero reduces to the bandit gradient") {
    std::mt19937_64 gen(7);
    VectorXd r = random_rewards(gen, 4);
    MatrixXd th = random_logits(gen, 1, 4);
    GradientTable g = mdp_pg_gradient(TabularMdp::bandit(r), PolicyLogits(th),
                                      StateDistribution::uniform(1));
    VectorXd gb = bandit_pg_gradient(r, th.row(0).transpose());
    CHECK((g.row(0).transpose() - gb).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("unvisited self-loop states get exactly zero gradient") {
    // Every state loops to itself under every action, so states outside the
    // support of mu are never reached and their logits cannot matter.
    MatrixXd rewards(2, 2);
    rewards << 0.1, 0.9, 0.8, 0.2;
    std::vector<MatrixXd> tr(2, MatrixXd::Identity(2, 2));
    TabularMdp mdp(2, 2, 0.9, rewards, tr);
    VectorXd w(2);
    w << 1.0, 0.0;
    std::mt19937_64 gen(11);
    for (int i = 0; i < 20; ++i) {
      MatrixXd th = random_logits(gen, 2, 2, 3.0);
      GradientTable g = mdp_pg_gradient(mdp, PolicyLogits(th), StateDistribution(w));
      CHECK(g.row(1).cwiseAbs().maxCoeff() == 0.0);
      CHECK(g.row(0).cwiseAbs().maxCoeff() > 0.0);
    }
  }
  SUBCASE("matches central differences on random MDPs") {
    std::mt19937_64 gen(13);
    TabularMdp mdp = random_mdp(gen, 3, 3, 0.9);
    VectorXd w = random_distribution(gen, 3).array() + 0.1;
    StateDistribution mu(w / w.sum());
    MatrixXd th = random_logits(gen, 3, 3);
    GradientTable g = mdp_pg_gradient(mdp, PolicyLogits(th), mu);
    GradientTable fd = finite_difference_gradient(
        [&](const MatrixXd& t) { return plain_value(mdp, mu, t); }, th);
    CHECK(gradient_rel_error(g, fd) <= 1e-6);
  }
}

TEST_CASE("mdp_entropy_gradient") {
  std::mt19937_64 gen(17);
  TabularMdp mdp = random_mdp(gen, 3, 3, 0.8);
  StateDistribution mu = StateDistribution::uniform(3);

  SUBCASE("tiny temperature matches the plain gradient") {
    MatrixXd th = random_logits(gen, 3, 3);
    GradientTable soft = mdp_entropy_gradient(mdp, PolicyLogits(th), mu, 1e-12);
    GradientTable plain = mdp_pg_gradient(mdp, PolicyLogits(th), mu);
    CHECK((soft - plain).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("soft optimum is stationary") {
    const double tau = 0.5;
    SoftOptimum opt = solve_soft_optimal(mdp, tau);
    MatrixXd th = opt.pi.pi.array().log().matrix();
    CHECK(mdp_entropy_gradient(mdp, PolicyLogits(th), mu, tau).norm() < 1e-6);
  }
  SUBCASE("matches central differences of the soft value") {
    const double tau = 0.2;
    MatrixXd th = random_logits(gen, 3, 3);
    GradientTable g = mdp_entropy_gradient(mdp, PolicyLogits(th), mu, tau);
    GradientTable fd = finite_difference_gradient(
        [&](const MatrixXd& t) { return soft_value(mdp, mu, t, tau); }, th);
    CHECK(gradient_rel_error(g, fd) <= 1e-6);
  }
}

TEST_CASE("finite_difference_gradient") {
  SUBCASE("linear-in-pi objective at the uniform point") {
    VectorXd r = vec2(1.0, 0.0);
    GradientTable fd = finite_difference_gradient(
        [&](const MatrixXd& t) {
          return softmax_vec(t.row(0).transpose()).dot(r);
        },
        MatrixXd::Zero(1, 2));
    CHECK(std::abs(fd(0, 0) - 0.25) <= 1e-9);
    CHECK(std::abs(fd(0, 1) + 0.25) <= 1e-9);
  }
  SUBCASE("constant objectives have a zero table") {
    GradientTable fd = finite_difference_gradient([](const MatrixXd&) { return 3.5; },
                                                  MatrixXd::Zero(2, 3));
    CHECK(fd.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("nonpositive step is rejected") {
    CHECK_THROWS_AS(finite_difference_gradient([](const MatrixXd&) { return 0.0; },
                                               MatrixXd::Zero(1, 2), 0.0),
                    InvalidInput);
  }
}

TEST_CASE("gradient_rel_error metric") {
  MatrixXd a(1, 2), b(1, 2);
  a << 2.0, -1.0;
  b << 2.0, -1.0;
  CHECK(gradient_rel_error(a, b) == 0.0);
  b << 2.0, -1.5;
  CHECK(std::abs(gradient_rel_error(a, b) - 0.25) <= 1e-15);  // 0.5 / max(1, 2)
}

TEST_CASE("gradient rows sum to zero") {
  std::mt19937_64 gen(19);
  for (int i = 0; i < 50; ++i) {
    TabularMdp mdp = random_mdp(gen, 3, 4, 0.85);
    MatrixXd th = random_logits(gen, 3, 4, 2.0);
    StateDistribution mu(random_distribution(gen, 3));
    GradientTable g = mdp_pg_gradient(mdp, PolicyLogits(th), mu);
    GradientTable gs = mdp_entropy_gradient(mdp, PolicyLogits(th), mu, 0.3);
    for (int s = 0; s < 3; ++s) {
      CHECK(std::abs(g.row(s).sum()) <= 1e-10);
      CHECK(std::abs(gs.row(s).sum()) <= 1e-10);
    }
    VectorXd r = random_rewards(gen, 4);
    VectorXd thv = random_logits(gen, 1, 4).row(0).transpose();
    CHECK(std::abs(bandit_pg_gradient(r, thv).sum()) <= 1e-10);
    CHECK(std::abs(bandit_entropy_gradient(r, thv, 0.3).sum()) <= 1e-10);
  }
}

TEST_CASE("finite differences agree over random instances") {
  std::mt19937_64 gen(23);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int S = 2 + static_cast<int>(gen() % 4);
    const int A = 2 + static_cast<int>(gen() % 4);
    TabularMdp mdp = random_mdp(gen, S, A, 0.8);
    MatrixXd th = random_logits(gen, S, A);
    StateDistribution mu = StateDistribution::uniform(S);
    const double tau = 0.1 + 0.4 * (static_cast<double>(gen() % 1000) / 1000.0);

    GradientTable g = mdp_pg_gradient(mdp, PolicyLogits(th), mu);
    GradientTable fd = finite_difference_gradient(
        [&](const MatrixXd& t) { return plain_value(mdp, mu, t); }, th);
    worst = std::max(worst, gradient_rel_error(g, fd));

    GradientTable gs = mdp_entropy_gradient(mdp, PolicyLogits(th), mu, tau);
    GradientTable fds = finite_difference_gradient(
        [&](const MatrixXd& t) { return soft_value(mdp, mu, t, tau); }, th);
    worst = std::max(worst, gradient_rel_error(gs, fds));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("one gradient step at eta = 1/beta never decreases the objective") {
  std::mt19937_64 gen(29);
  SUBCASE("bandit, beta = 5/2") {
    for (int i = 0; i < 100; ++i) {
      VectorXd r = random_rewards(gen, 5);
      VectorXd th = random_logits(gen, 1, 5, 2.0).row(0).transpose();
      VectorXd g = bandit_pg_gradient(r, th);
      const double before = softmax_vec(th).dot(r);
      const double after = softmax_vec(th + (1.0 / 2.5) * g).dot(r);
      CHECK(after >= before - 1e-12);
    }
  }
  SUBCASE("mdp, beta = 8/(1-gamma)^3") {
    const double gamma = 0.9;
    const double beta = 8.0 / std::pow(1.0 - gamma, 3);
    for (int i = 0; i < 20; ++i) {
      TabularMdp mdp = random_mdp(gen, 3, 3, gamma);
      StateDistribution mu = StateDistribution::uniform(3);
      MatrixXd th = random_logits(gen, 3, 3);
      GradientTable g = mdp_pg_gradient(mdp, PolicyLogits(th), mu);
      CHECK(plain_value(mdp, mu, th + g / beta) >= plain_value(mdp, mu, th) - 1e-12);
    }
  }
  SUBCASE("soft mdp, beta = (8 + tau(4 + 8 log A))/(1-gamma)^3") {
    const double gamma = 0.8;
    const double tau = 0.4;
    const double beta = (8.0 + tau * (4.0 + 8.0 * std::log(3.0))) / std::pow(1.0 - gamma, 3);
    for (int i = 0; i < 20; ++i) {
      TabularMdp mdp = random_mdp(gen, 3, 3, gamma);
      StateDistribution mu = StateDistribution::uniform(3);
      MatrixXd th = random_logits(gen, 3, 3);
      GradientTable g = mdp_entropy_gradient(mdp, PolicyLogits(th), mu, tau);
      CHECK(soft_value(mdp, mu, th + g / beta, tau) >=
            soft_value(mdp, mu, th, tau) - 1e-12);
    }
  }
}
