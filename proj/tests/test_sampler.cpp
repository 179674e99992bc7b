#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dpbayes/metrics.hpp"
#include "dpbayes/naive_bayes.hpp"
#include "dpbayes/sampler.hpp"
#include "oracles.hpp"

using namespace dpbayes;

TEST(Lipschitz, ComposeIsMax) {
  EXPECT_EQ(compose_lipschitz({{2.0, 3.0, 1.0}}), 3.0);
  EXPECT_EQ(compose_lipschitz({{0.7}}), 0.7);
  EXPECT_THROW(compose_lipschitz({{1.0, -1.0}}), Error);
}

TEST(Lipschitz, StochasticComposition) {
  EXPECT_NEAR(compose_stochastic_lipschitz({{2.0, 3.0}, 1.0}), 2.0 - std::log(2.0), 1e-15);
  EXPECT_NEAR(compose_stochastic_lipschitz({{2.0, 3.0}, 1.0}), 1.3069, 1e-4);
  try {
    compose_stochastic_lipschitz({std::vector<double>(100, 0.1), 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConditionViolated);
  }
}

TEST(Lipschitz, ExhaustiveFourNodeCertificate) {
  const BayesNetGraph g(4, {{}, {0}, {0, 1}, {2}});
  ThetaTable theta(g, 0.0);
  Rng rng = substream(3, {});
  for (double& t : theta.values()) t = 0.05 + 0.9 * uniform01(rng);
  const double l = compose_lipschitz(lipschitz_spec(g, theta));
  for (Record x = 0; x < 16; ++x)
    for (Record y = 0; y < 16; ++y) {
      const double lr = std::abs(log_likelihood(g, theta, x) - log_likelihood(g, theta, y));
      EXPECT_LE(lr, l * family_distance(g, x, y) + 1e-12);
    }
}

TEST(MConstant, MatchesIndependentTranscription) {
  EXPECT_NEAR(thm5_M(1.0, 1.0, 0.5, 2.0), oracle::m_constant(1.0, 1.0, 0.5, 2.0), 1e-12);
  EXPECT_NEAR(thm5_M(0.3, 2.5, 0.2, 7.0), oracle::m_constant(0.3, 2.5, 0.2, 7.0), 1e-10);
}

TEST(MConstant, IncreasingInC) {
  double prev = thm5_M(1.0, 1.0, 0.5, 1.0);
  for (double c : {1.5, 2.0, 5.0, 50.0}) {
    const double m = thm5_M(1.0, 1.0, 0.5, c);
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(MConstant, KappaTermContributesOne) {
  const double c = kKappa;
  const double w = kOmegaConstant;
  const double tail = std::exp(-0.5 * c) / (std::exp(-0.5 * w) - std::exp(-w)) + std::exp(0.5 * c);
  const double rest = (1.0 / (1.0 - std::exp(-w)) + 1.0) + std::log(tail);
  EXPECT_NEAR(thm5_M(c, 1.0, 0.5, 1.0) - rest, 1.0, 1e-12);
}

TEST(MConstant, ReportCapsDelta) {
  const auto r = stochastic_privacy_report(1.0, 1.0, 0.5, 2.0);
  EXPECT_NEAR(r.delta_bound, std::sqrt(r.m_constant / 2.0), 1e-12);
  EXPECT_LE(r.delta, 1.0);
  EXPECT_TRUE(r.vacuous());
  EXPECT_EQ(pure_privacy_report({{0.5, 1.25}}).epsilon, 2.5);
}

TEST(Trim, LevelAndInterval) {
  EXPECT_NEAR(trim_level(2.0), 0.3679, 1e-4);
  const BayesNetGraph g = BayesNetGraph::naive_bayes(3);
  const BetaTable post = make_priors(g, {0.5, 4.0}, {});
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto theta = trimmed_posterior_sample(post, 2.0, s);
    for (double t : theta.values()) {
      EXPECT_GE(t, std::exp(-1.0));
      EXPECT_LE(t, 1.0 - std::exp(-1.0));
    }
  }
}

TEST(Trim, OmegaTooLarge) {
  const BetaTable post = make_priors(BayesNetGraph::isolated(1), {1, 1}, {});
  try {
    trimmed_posterior_sample(post, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OmegaTooLarge);
  }
  Rng rng = substream(1, {});
  EXPECT_THROW(sample_trimmed_beta({1, 1}, 0.5, rng), Error);
}

TEST(Trim, LargeEpsilonLeavesBetaUntouched) {
  Rng a = substream(9, {});
  Rng b = substream(9, {});
  for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_trimmed_beta({3, 2}, 1e-300, a), sample_beta(3, 2, b));
}

TEST(Trim, KolmogorovAgainstTruncatedBeta) {
  const double omega = trim_level(2.0);
  Rng rng = substream(5, {});
  std::vector<double> draws(20000);
  for (double& d : draws) d = sample_trimmed_beta({3, 2}, omega, rng);
  const double stat = oracle::ks_statistic(draws, [&](double x) {
    return oracle::truncated_beta_cdf(x, 3, 2, omega, 1.0 - omega);
  });
  EXPECT_GT(oracle::ks_pvalue(stat, draws.size()), 0.01);
}

TEST(Trim, PosteriorRatioWithinTwiceL) {
  // neighbouring one-node datasets differ in one Bernoulli outcome; the
  // trimmed posterior density ratio on a theta grid stays within 2 L
  const double eps = 3.0;
  const double omega = trim_level(eps);
  const double l = trimmed_lipschitz(omega);
  const BetaParams p{1.0 + 7.0, 1.0 + 3.0};
  const BetaParams q{1.0 + 6.0, 1.0 + 4.0};
  auto log_norm = [&](BetaParams b) {
    using boost::math::ibeta;
    return std::log(ibeta(b.alpha, b.beta, 1.0 - omega) - ibeta(b.alpha, b.beta, omega));
  };
  for (int k = 0; k <= 200; ++k) {
    const double th = omega + (1.0 - 2.0 * omega) * k / 200.0;
    const double lr = oracle::log_beta_density(th, p.alpha, p.beta) - log_norm(p) -
                      oracle::log_beta_density(th, q.alpha, q.beta) + log_norm(q);
    EXPECT_LE(std::abs(lr), 2.0 * l + 1e-9);
  }
  EXPECT_LE(l, eps);
}

TEST(Predictive, SymmetricPosteriorIsHalf) {
  const auto g = BayesNetGraph::naive_bayes(4);
  const BetaTable post = make_priors(g, {3, 3}, {});
  const double p = sampler_predictive(g, post, 0b01010, 4.0, 4000, 11);
  EXPECT_NEAR(p, 0.5, 0.03);
}

TEST(Predictive, MatchesQuadratureForOneFeature) {
  const auto g = BayesNetGraph::naive_bayes(1);
  BetaTable post = make_priors(g, {1, 1}, {});
  post(0, 0) = {6, 3};
  post(1, 0) = {2, 5};
  post(1, 1) = {7, 2};
  const double eps = 3.0;
  const double omega = trim_level(eps);
  // E[theta] under each trimmed Beta
  auto trimmed_mean = [&](BetaParams b) {
    auto dens = [&](double t) { return std::exp(oracle::log_beta_density(t, b.alpha, b.beta)); };
    const double z = oracle::simpson(dens, omega, 1.0 - omega);
    return oracle::simpson([&](double t) { return t * dens(t); }, omega, 1.0 - omega) / z;
  };
  const double py = trimmed_mean(post(0, 0));
  const double p1 = trimmed_mean(post(1, 1));
  const double p0 = trimmed_mean(post(1, 0));
  const double expect = py * p1 / (py * p1 + (1.0 - py) * p0);  // x_1 = 1
  EXPECT_NEAR(sampler_predictive(g, post, 0b10, eps, 100000, 4), expect, 0.01);
}

TEST(Predictive, Deterministic) {
  const auto g = BayesNetGraph::naive_bayes(3);
  const BetaTable post = make_priors(g, {2, 5}, {});
  EXPECT_EQ(sampler_predictive(g, post, 0b0110, 3.0, 200, 8), sampler_predictive(g, post, 0b0110, 3.0, 200, 8));
  EXPECT_THROW(sampler_predictive(g, post, 0, 3.0, 0, 8), Error);
}
