#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

// ---------------------------------------------------------------------------
// Lipschitz calculus over networks.
//
// Distances between full assignments use the pseudo-metric
//   rho(x, y) = sum_i rho_i(x, y),   rho_i(x, y) = 1{x restricted to family(i)
//                                                    != y restricted to family(i)},
// the discrete 0/1 metric on each node's family. With it the per-node
// condition |log p(x_i | x_pa) - log p(y_i | y_pa)| <= L_i rho_i(x, y) holds
// for every binary conditional with parameters in (0, 1).
// ---------------------------------------------------------------------------

struct LipschitzSpec {
  std::vector<double> per_node;  // L_i >= 0
};

/// Network constant ||L||_inf.
inline double compose_lipschitz(const LipschitzSpec& spec) {
  require(!spec.per_node.empty(), ErrorCode::InvalidArgument, "need at least one node");
  double best = 0.0;
  for (double l : spec.per_node) {
    require(l >= 0.0, ErrorCode::InvalidArgument, "Lipschitz constants must be non-negative");
    best = std::max(best, l);
  }
  return best;
}

struct StochasticLipschitzSpec {
  std::vector<double> per_node_c;  // c_i > 0
  double l0 = 1.0;                 // L0 > 0
};

/// c' = min_i c_i - ln|I| / L0, valid when |I| <= exp(L0 min_i c_i).
inline double compose_stochastic_lipschitz(const StochasticLipschitzSpec& spec) {
  require(!spec.per_node_c.empty(), ErrorCode::InvalidArgument, "need at least one node");
  require(spec.l0 > 0.0, ErrorCode::InvalidArgument, "L0 must be positive");
  const double c_min = *std::min_element(spec.per_node_c.begin(), spec.per_node_c.end());
  require(c_min > 0.0, ErrorCode::InvalidArgument, "c_i must be positive");
  const double nodes = static_cast<double>(spec.per_node_c.size());
  require(std::log(nodes) <= spec.l0 * c_min, ErrorCode::ConditionViolated,
          "node count exceeds exp(L0 * min c_i)");
  return c_min - std::log(nodes) / spec.l0;
}

inline constexpr double kKappa = 4.91081;
inline constexpr double kOmegaConstant = 1.25643;

/// The M constant of the stochastic-Lipschitz privacy statement:
///   M = C [kappa/c + L0 (1/(1 - e^{-omega}) + 1) + ln C
///          + ln(e^{-L0 delta c} (e^{-omega (1-delta)} - e^{-omega})^{-1} + e^{L0 (1-delta) c})]
inline double thm5_M(double c, double l0, double delta_slack, double big_c) {
  require(c > 0.0 && l0 > 0.0, ErrorCode::InvalidArgument, "c and L0 must be positive");
  require(delta_slack > 0.0 && delta_slack < 1.0, ErrorCode::InvalidArgument,
          "delta must be in (0, 1)");
  require(big_c >= 1.0, ErrorCode::InvalidArgument, "C must be at least 1");
  const double w = kOmegaConstant;
  const double gap = std::exp(-w * (1.0 - delta_slack)) - std::exp(-w);
  const double tail = std::exp(-l0 * delta_slack * c) / gap + std::exp(l0 * (1.0 - delta_slack) * c);
  const double bracket = kKappa / c + l0 * (1.0 / (1.0 - std::exp(-w)) + 1.0) + std::log(big_c) +
                         std::log(tail);
  return bracket * big_c;
}

enum class SamplerPrivacyKind { Pure, Stochastic };

struct SamplerPrivacyReport {
  SamplerPrivacyKind kind = SamplerPrivacyKind::Pure;
  double epsilon = 0.0;      // Pure: 2 ||L||_inf per unit of rho
  double delta = 0.0;        // Stochastic: min(1, sqrt(M/2))
  double delta_bound = 0.0;  // Stochastic: sqrt(M/2) before capping
  double m_constant = 0.0;
  bool vacuous() const noexcept { return kind == SamplerPrivacyKind::Stochastic && delta_bound >= 1.0; }
};

inline SamplerPrivacyReport pure_privacy_report(const LipschitzSpec& spec) {
  SamplerPrivacyReport r;
  r.kind = SamplerPrivacyKind::Pure;
  r.epsilon = 2.0 * compose_lipschitz(spec);
  return r;
}

inline SamplerPrivacyReport stochastic_privacy_report(double c, double l0, double delta_slack,
                                                      double big_c) {
  SamplerPrivacyReport r;
  r.kind = SamplerPrivacyKind::Stochastic;
  r.m_constant = thm5_M(c, l0, delta_slack, big_c);
  r.delta_bound = std::sqrt(r.m_constant / 2.0);
  r.delta = std::min(1.0, r.delta_bound);
  return r;
}

/// C_i for a Bernoulli node with Beta(alpha, beta) prior: the largest ratio of
/// maximum likelihood (searched over a theta grid) to marginal likelihood.
inline double bernoulli_max_marginal_ratio(BetaParams prior, std::size_t grid_points = 10001) {
  require(prior.valid(), ErrorCode::InvalidArgument, "prior must be a proper Beta");
  require(grid_points >= 2, ErrorCode::InvalidArgument, "need at least two grid points");
  double best_one = 0.0;
  double best_zero = 0.0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double theta = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    best_one = std::max(best_one, theta);
    best_zero = std::max(best_zero, 1.0 - theta);
  }
  const double marginal_one = prior.mean();
  return std::max(best_one / marginal_one, best_zero / (1.0 - marginal_one));
}

/// Number of nodes whose family assignment differs between x and y.
inline double family_distance(const BayesNetGraph& graph, Record x, Record y) {
  double d = 0.0;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    if (((x ^ y) & graph.family_mask(i)) != 0) d += 1.0;
  return d;
}

inline double node_probability(const BayesNetGraph& graph, const ThetaTable& theta,
                               std::size_t node, Record x) {
  const double t = theta(node, graph.parent_config(node, x));
  return bit(x, node) ? t : 1.0 - t;
}

inline double log_likelihood(const BayesNetGraph& graph, const ThetaTable& theta, Record x) {
  double s = 0.0;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    s += std::log(node_probability(graph, theta, i, x));
  return s;
}

/// Smallest L_i with |log p(x_i|x_pa) - log p(y_i|y_pa)| <= L_i over all
/// family assignments: log(max prob / min prob) among the node's conditionals.
inline double node_lipschitz(const BayesNetGraph& graph, const ThetaTable& theta, std::size_t node) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t j = 0; j < graph.config_count(node); ++j) {
    const double t = theta(node, j);
    lo = std::min({lo, t, 1.0 - t});
    hi = std::max({hi, t, 1.0 - t});
  }
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(hi / lo);
}

inline LipschitzSpec lipschitz_spec(const BayesNetGraph& graph, const ThetaTable& theta) {
  LipschitzSpec spec;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    spec.per_node.push_back(node_lipschitz(graph, theta, i));
  return spec;
}

/// Per-record log-likelihood sensitivity sum_i L_i: the largest change in
/// log p(x) when one full record is replaced.
inline double record_lipschitz(const BayesNetGraph& graph, const ThetaTable& theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) s += node_lipschitz(graph, theta, i);
  return s;
}

// ---------------------------------------------------------------------------
// Trimmed posterior sampling for Beta-Bernoulli networks.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTrimAttempts = 1000;

/// omega = exp(-eps / 2).
inline double trim_level(double epsilon) {
  require_epsilon(epsilon);
  return std::exp(-epsilon / 2.0);
}

/// Per-node Lipschitz constant of a Bernoulli likelihood with theta in
/// [omega, 1 - omega].
inline double trimmed_lipschitz(double omega) { return std::log((1.0 - omega) / omega); }

/// Beta(alpha, beta) conditioned on [omega, 1 - omega] by rejection; after
/// `attempts` rejections the last draw is clamped into the interval.
inline double sample_trimmed_beta(BetaParams params, double omega, Rng& rng,
                                  std::size_t attempts = kTrimAttempts) {
  require(params.valid(), ErrorCode::NonPositivePosteriorParam, "posterior must be a proper Beta");
  require(omega >= 0.0, ErrorCode::InvalidArgument, "omega must be non-negative");
  require(omega < 0.5, ErrorCode::OmegaTooLarge, "trim interval [omega, 1 - omega] is empty");
  double draw = 0.5;
  for (std::size_t a = 0; a < std::max<std::size_t>(attempts, 1); ++a) {
    draw = sample_beta(params.alpha, params.beta, rng);
    if (draw >= omega && draw <= 1.0 - omega) return draw;
  }
  return std::clamp(draw, omega, 1.0 - omega);
}

/// One draw of every entry from its trimmed posterior, omega = exp(-eps/2).
/// Entries are drawn in flat order from the substream (seed).
inline ThetaTable trimmed_posterior_sample(const BetaTable& posterior, double epsilon,
                                           std::uint64_t seed) {
  const double omega = trim_level(epsilon);
  require(omega < 0.5, ErrorCode::OmegaTooLarge,
          "epsilon below 2 ln 2 leaves no trim interval");
  Rng rng = substream(seed, {});
  ThetaTable out(posterior.layout(), std::vector<double>(posterior.size(), 0.0));
  for (std::size_t k = 0; k < posterior.size(); ++k)
    out[k] = sample_trimmed_beta(posterior[k], omega, rng);
  return out;
}

/// `samples` independent trimmed draws; draw s uses substream (seed, s).
inline std::vector<ThetaTable> trimmed_posterior_draws(const BetaTable& posterior, double epsilon,
                                                       std::size_t samples, std::uint64_t seed) {
  std::vector<ThetaTable> draws;
  draws.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s)
    draws.push_back(trimmed_posterior_sample(posterior, epsilon, derive_seed(seed, {s})));
  return draws;
}

inline double joint_probability(const BayesNetGraph& graph, const ThetaTable& theta, Record x) {
  double p = 1.0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) p *= node_probability(graph, theta, i, x);
  return p;
}

/// Monte Carlo Pr(X_target = 1 | rest of x): average the joint for both
/// target values over the parameter draws, then normalize.
inline double predictive_from_draws(const BayesNetGraph& graph, std::span<const ThetaTable> draws,
                                    Record x, std::size_t target = 0) {
  require(!draws.empty(), ErrorCode::InvalidArgument, "need at least one draw");
  const Record one = x | singleton(target);
  const Record zero = x & ~singleton(target);
  double s1 = 0.0;
  double s0 = 0.0;
  for (const ThetaTable& theta : draws) {
    s1 += joint_probability(graph, theta, one);
    s0 += joint_probability(graph, theta, zero);
  }
  if (s0 + s1 <= 0.0) return 0.5;
  return s1 / (s0 + s1);
}

inline double sampler_predictive(const BayesNetGraph& graph, const BetaTable& posterior, Record x,
                                 double epsilon, std::size_t samples, std::uint64_t seed,
                                 std::size_t target = 0) {
  require(samples >= 1, ErrorCode::InvalidArgument, "samples must be at least 1");
  const auto draws = trimmed_posterior_draws(posterior, epsilon, samples, seed);
  return predictive_from_draws(graph, draws, x, target);
}

}  // namespace dpbayes
