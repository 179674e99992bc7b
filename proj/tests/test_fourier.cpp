#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dpbayes/fourier.hpp"
#include "dpbayes/verify.hpp"
#include "oracles.hpp"

using namespace dpbayes;

namespace {

Dataset make_data(std::size_t k, std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, {});
  Dataset d(k);
  for (std::size_t r = 0; r < n; ++r) d.add(rng() & low_mask(k));
  return d;
}

}  // namespace

TEST(Closure, Examples) {
  EXPECT_EQ(downward_closure(BayesNetGraph::isolated(1)).size(), 2U);
  for (std::size_t d : {1, 2, 5, 16}) EXPECT_EQ(downward_closure(BayesNetGraph::naive_bayes(d)).size(), 2 * d + 2);
  const auto c = downward_closure(BayesNetGraph::chain(3));
  EXPECT_EQ(c.members(), (std::vector<FourierIndex>{0b000, 0b001, 0b010, 0b011, 0b100, 0b110}));
  EXPECT_TRUE(c.is_closed());
}

TEST(Closure, SizeWithinEconomyBound) {
  for (std::size_t k = 1; k <= 4; ++k) {
    for (const auto& g : enumerate_dags(k)) {
      const auto c = downward_closure(g);
      EXPECT_TRUE(c.is_closed());
      EXPECT_LE(c.size(), g.node_count() * (std::size_t{2} << g.max_indegree()));
    }
  }
}

TEST(Coefficient, Examples) {
  const auto d = make_data(5, 37, 1);
  EXPECT_NEAR(fourier_coefficient(d, 0), 37.0 * std::pow(2.0, -2.5), 1e-12);
  const Dataset k1(1, {0, 0, 0, 1, 1, 1, 1, 1});
  EXPECT_NEAR(fourier_coefficient(k1, 1), -1.41421, 1e-5);
  EXPECT_NEAR(fourier_coefficient(k1, 1), -2.0 / std::numbers::sqrt2, 1e-12);
}

TEST(Coefficient, StreamingMatchesDenseOracleAndFastTransform) {
  for (std::size_t k : {1, 3, 6, 10}) {
    const auto d = make_data(k, 300, k);
    const auto dense = oracle::dense_counts(d);
    const auto table = build_table(d);
    const auto fast = dense_walsh_coefficients(table);
    for (FourierIndex g = 0; g < (FourierIndex{1} << k); ++g) {
      const double expect = oracle::dense_coefficient(dense, k, g);
      EXPECT_NEAR(fourier_coefficient(d, g), expect, 1e-9);
      EXPECT_NEAR(fourier_coefficient(table, g), expect, 1e-9);
      EXPECT_NEAR(fast[g], expect, 1e-9);
    }
  }
}

TEST(Release, NoiseScaleAndIncrement) {
  EXPECT_NEAR(fourier_noise_scale(6, 3, 1.0), 4.2426, 1e-4);
  EXPECT_NEAR(fourier_noise_scale(6, 3, 1.0), 12.0 / std::pow(2.0, 1.5), 1e-12);
  EXPECT_NEAR(stealth_increment(6, 3, 1.0, std::numbers::ln10),
              4.0 * std::numbers::ln10 * 36.0 / std::pow(2.0, 1.5), 1e-12);
}

TEST(Release, ZeroNoiseLimit) {
  const auto g = BayesNetGraph::chain(3);
  const auto d = make_data(3, 40, 2);
  const auto closure = downward_closure(g);
  const auto exact = exact_coefficients(d, closure);
  const auto rel = release_coefficients(d, closure, 1e14, 1e-14, 9);
  for (std::size_t k = 0; k < exact.values.size(); ++k) EXPECT_NEAR(rel.values[k], exact.values[k], 1e-9);
}

TEST(Release, Validation) {
  const auto g = BayesNetGraph::chain(2);
  const auto d = make_data(2, 5, 3);
  try {
    release_coefficients(d, downward_closure(g), 1.0, 0.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidT);
  }
  try {
    release_coefficients(d, downward_closure(g), -1.0, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidEpsilon);
  }
}

TEST(Release, DeterministicAndExactIndexSet) {
  const auto g = BayesNetGraph::naive_bayes(3);
  const auto d = make_data(4, 30, 4);
  const auto closure = downward_closure(g);
  const auto a = release_coefficients(d, closure, 1.0, 1.0, 77);
  const auto b = release_coefficients(d, closure, 1.0, 1.0, 77);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.indices, closure.members());
}

TEST(Reconstruct, ExactWithoutNoise) {
  const BayesNetGraph g(4, {{}, {0}, {0, 1}, {1, 2}});
  const auto d = make_data(4, 120, 5);
  const auto coeffs = exact_coefficients(d, downward_closure(g));
  const auto table = build_table(d);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto h = reconstruct_marginal(coeffs, i, g);
    const auto expect = project_marginal(table, g.family_mask(i));
    for (std::size_t c = 0; c < h.cells.size(); ++c) EXPECT_NEAR(h.cells[c], expect.at(c), 1e-9);
  }
}

TEST(Reconstruct, TwoByTwoRecoversTable) {
  const Dataset d(2, {0b00, 0b00, 0b11});
  const auto g = BayesNetGraph::chain(2);
  const auto h = reconstruct_marginal(exact_coefficients(d, downward_closure(g)), 1, g);
  EXPECT_NEAR(h.cells[0b00], 2.0, 1e-12);
  EXPECT_NEAR(h.cells[0b11], 1.0, 1e-12);
  EXPECT_NEAR(h.cells[0b01], 0.0, 1e-12);
  EXPECT_NEAR(h.cells[0b10], 0.0, 1e-12);
}

TEST(Reconstruct, SharedSubMarginalsAgreeUnderNoise) {
  const auto g = BayesNetGraph::naive_bayes(4);
  const auto d = make_data(5, 60, 6);
  const auto coeffs = release_coefficients(d, downward_closure(g), 0.7, 1.0, 12);
  const auto hs = reconstruct_all(coeffs, g);
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const VariableMask shared = hs[i].variables & hs[j].variables;
      const auto a = marginalize(hs[i], shared);
      const auto b = marginalize(hs[j], shared);
      for (std::size_t c = 0; c < a.cells.size(); ++c) EXPECT_NEAR(a.cells[c], b.cells[c], 1e-9);
    }
}

TEST(Reconstruct, MissingCoefficient) {
  CoefficientSet partial;
  partial.dimension = 2;
  partial.indices = {0, 1};
  partial.values = {1.0, 0.5};
  try {
    reconstruct_marginal(partial, 1, BayesNetGraph::chain(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingCoefficient);
  }
}

TEST(FourierPosterior, ZeroNoiseMatchesExactPath) {
  const auto g = BayesNetGraph::naive_bayes(3);
  const auto d = make_data(4, 50, 7);
  const auto priors = make_priors(g, {1, 1}, {});
  const auto fp = fourier_posterior_params(exact_coefficients(d, downward_closure(g)), g, priors);
  const auto exact = posterior_params(priors, compute_updates(g, d));
  for (std::size_t k = 0; k < exact.size(); ++k) {
    EXPECT_NEAR(fp.params[k].alpha, exact[k].alpha, 1e-9);
    EXPECT_NEAR(fp.params[k].beta, exact[k].beta, 1e-9);
  }
  EXPECT_TRUE(fp.flagged.empty());
}

TEST(FourierPosterior, NegativeCells) {
  const auto g = BayesNetGraph::isolated(1);
  const auto priors = make_priors(g, {1, 1}, {});
  // cell 0 is x = 0 (beta), cell 1 is x = 1 (alpha)
  const MarginalTable ok{0b1, {2.0, -0.3}};
  EXPECT_NEAR(posterior_from_marginals(g, {ok}, priors).params(0, 0).alpha, 0.7, 1e-12);
  const MarginalTable bad{0b1, {2.0, -1.5}};
  try {
    posterior_from_marginals(g, {bad}, priors);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositivePosteriorParam);
  }
  EXPECT_EQ(posterior_from_marginals(g, {bad}, priors, StealthPolicy::Flag).flagged.size(), 1U);
  const auto clamped = posterior_from_marginals(g, {bad}, priors, StealthPolicy::Clamp);
  EXPECT_EQ(clamped.params(0, 0).alpha, 1.0);
  EXPECT_EQ(clamped.params(0, 0).beta, 3.0);
}

TEST(FourierPosterior, ReleaseRetriesUntilValid) {
  const auto g = BayesNetGraph::naive_bayes(3);
  const auto d = make_data(4, 20, 8);
  const auto priors = make_priors(g, {1, 1}, {});
  const auto rel = release_fourier_posterior(d, g, priors, 0.05, 0.01, 3, 500);
  EXPECT_GE(rel.attempts, 1U);
  for (const auto& p : rel.params.values()) EXPECT_TRUE(rel.clamped || p.valid());
}

TEST(FourierPosterior, ReleaseWithoutFallbackReportsFailure) {
  const auto g = BayesNetGraph::naive_bayes(3);
  const auto d = make_data(4, 20, 8);
  const auto priors = make_priors(g, {0.01, 0.01}, {});
  std::size_t failures = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    try {
      release_fourier_posterior(d, g, priors, 0.01, 1e-9, s, 1, false);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonPositivePosteriorParam);
      ++failures;
    }
  }
  EXPECT_GT(failures, 0U);
}

TEST(L1Bound, Values) {
  const auto g = BayesNetGraph::naive_bayes(2);
  const double t = std::numbers::ln10;
  // |J| = 6, two parent configurations: (24 / eps)(2 ln 60 + 6 t)
  EXPECT_NEAR(thm4_bound(g, 1, 1.0, 0.1, t), 24.0 * (2.0 * std::log(60.0) + 6.0 * t), 1e-9);
  EXPECT_LT(thm4_bound(g, 1, 1.0, 0.1, 1.0), thm4_bound(g, 1, 1.0, 0.1, 2.0));
}
