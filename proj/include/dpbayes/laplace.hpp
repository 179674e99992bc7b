#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

/// L1 global sensitivity of the full update vector: one changed record moves
/// at most two counts per node, each by one.
inline double sensitivity(const BayesNetGraph& graph) {
  return 2.0 * static_cast<double>(graph.node_count());
}

struct LaplaceNoiseSpec {
  double epsilon = 1.0;
  double scale = 0.0;    // 2|I| / epsilon
  double ceiling = 0.0;  // record count n; outputs are clamped into [0, n]

  static LaplaceNoiseSpec for_graph(const BayesNetGraph& graph, double epsilon, std::size_t n) {
    require_epsilon(epsilon);
    return {epsilon, sensitivity(graph) / epsilon, static_cast<double>(n)};
  }
};

using PerturbedUpdates = UpdateVector;

/// Adds independent Laplace(0, scale) noise to both counts of every entry,
/// observed or not. Entry k, component c draws from the keyed uniform
/// (seed, k, c), so output is independent of traversal order.
inline UpdateVector noisy_updates(const UpdateVector& updates, const LaplaceNoiseSpec& spec,
                                  std::uint64_t seed) {
  require_epsilon(spec.epsilon);
  UpdateVector out = updates;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].alpha += laplace_from_uniform(spec.scale, keyed_uniform(seed, {k, 0}));
    out[k].beta += laplace_from_uniform(spec.scale, keyed_uniform(seed, {k, 1}));
  }
  return out;
}

inline PerturbedUpdates clamp_updates(UpdateVector updates, double ceiling) {
  for (auto& u : updates.values()) {
    u.alpha = std::clamp(u.alpha, 0.0, ceiling);
    u.beta = std::clamp(u.beta, 0.0, ceiling);
  }
  return updates;
}

/// Laplace mechanism on posterior updates; every output component lies in
/// [0, n].
inline PerturbedUpdates perturb_updates(const UpdateVector& updates, const LaplaceNoiseSpec& spec,
                                        std::uint64_t seed) {
  return clamp_updates(noisy_updates(updates, spec, seed), spec.ceiling);
}

/// m = sum_i 2^{|parents(i)|}.
inline std::size_t entry_count(const BayesNetGraph& graph) { return EntryLayout(graph).size(); }

/// High-probability bound on the sup-norm deviation of the pre-clamp counts:
/// (2|I|/eps) ln(2m/delta).
inline double prop1_bound(const BayesNetGraph& graph, double epsilon, double delta) {
  require_epsilon(epsilon);
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument, "delta must be in (0, 1)");
  const double m = static_cast<double>(entry_count(graph));
  return sensitivity(graph) / epsilon * std::log(2.0 * m / delta);
}

struct Thm2Terms {
  double expectation = 0.0;  // sum of per-entry expectation bounds
  double deviation = 0.0;    // sqrt(-0.5 * sum(c) * ln(delta))
  double total() const noexcept { return expectation + deviation; }
};

/// Per-entry bounded-difference constant (2n+1)[ln(a+n+1) + ln(b+n+1)].
inline double thm2_difference_constant(BetaParams prior, double n) {
  return (2.0 * n + 1.0) * (std::log(prior.alpha + n + 1.0) + std::log(prior.beta + n + 1.0));
}

/// Per-entry expectation bound. Below n = 2|I|/eps it is n ln((a+da)(b+db));
/// from there on the refined form ln[(a+n+1)(b+n+1)] n (1 - exp(-n eps/2|I|)).
inline double thm2_expectation_term(BetaParams prior, UpdateCount exact, double n, double epsilon,
                                    std::size_t node_count) {
  const double scale = 2.0 * static_cast<double>(node_count) / epsilon;
  if (n < scale)
    return n * std::log((prior.alpha + exact.alpha) * (prior.beta + exact.beta));
  return std::log((prior.alpha + n + 1.0) * (prior.beta + n + 1.0)) * n *
         -std::expm1(-n / scale);
}

inline Thm2Terms thm2_terms(const BetaTable& priors, const UpdateVector& updates,
                            const BayesNetGraph& graph, double epsilon, double delta,
                            std::size_t n) {
  require_epsilon(epsilon);
  require(delta > 0.0 && delta <= 1.0, ErrorCode::InvalidArgument, "delta must be in (0, 1]");
  require(priors.layout() == updates.layout() && priors.layout() == EntryLayout(graph),
          ErrorCode::MissingPriorEntry, "priors and updates must cover every graph entry");
  const double nd = static_cast<double>(n);
  Thm2Terms terms;
  double c_sum = 0.0;
  for (std::size_t k = 0; k < priors.size(); ++k) {
    const BetaParams p = priors[k];
    require(p.alpha >= 2.0 && p.beta >= 2.0, ErrorCode::PriorTooSmall,
            "utility bound requires prior parameters >= 2");
    c_sum += thm2_difference_constant(p, nd);
    terms.expectation += thm2_expectation_term(p, updates[k], nd, epsilon, graph.node_count());
  }
  terms.deviation = std::sqrt(std::max(0.0, -0.5 * c_sum * std::log(delta)));
  return terms;
}

/// KL-divergence utility bound for the Laplace mechanism holding w.p. 1 - delta.
inline double thm2_bound(const BetaTable& priors, const UpdateVector& updates,
                         const BayesNetGraph& graph, double epsilon, double delta, std::size_t n) {
  return thm2_terms(priors, updates, graph, epsilon, delta, n).total();
}

}  // namespace dpbayes
