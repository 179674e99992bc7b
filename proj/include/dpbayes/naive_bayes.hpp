#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

inline bool is_naive_bayes(const BayesNetGraph& graph) {
  if (!graph.parents(0).empty()) return false;
  for (std::size_t i = 1; i < graph.node_count(); ++i) {
    const auto p = graph.parents(i);
    if (p.size() != 1 || p[0] != 0) return false;
  }
  return true;
}

/// Pr(Y = 1 | x) for a Beta-Bernoulli naive Bayes posterior (node 0 = Y).
/// Each Beta factor integrates to alpha^v beta^{1-v} / (alpha + beta).
/// Computed in log space so large posterior parameters do not underflow.
inline double nb_predictive_closed_form(const BetaTable& posterior, Record x) {
  const std::size_t nodes = posterior.layout().node_count();
  require(nodes >= 1 && posterior.layout().config_count(0) == 1, ErrorCode::MissingPosteriorEntry,
          "posterior lacks a parentless class entry");
  for (std::size_t i = 1; i < nodes; ++i)
    require(posterior.layout().config_count(i) == 2, ErrorCode::MissingPosteriorEntry,
            "feature " + std::to_string(i) + " lacks both class-conditional entries");
  auto log_factor = [](BetaParams p, bool value) {
    return std::log(value ? p.alpha : p.beta) - std::log(p.alpha + p.beta);
  };
  double log_score[2];
  for (int y = 0; y < 2; ++y) {
    double s = log_factor(posterior(0, 0), y == 1);
    for (std::size_t i = 1; i < nodes; ++i) s += log_factor(posterior(i, y), bit(x, i));
    log_score[y] = s;
  }
  // Pr(Y=1|x) = 1 / (1 + exp(s0 - s1))
  return 1.0 / (1.0 + std::exp(log_score[0] - log_score[1]));
}

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random disjoint split covering 0..n-1 with `train_count` training indices.
inline TrainTestSplit split_indices(std::size_t n, std::size_t train_count, std::uint64_t seed) {
  require(train_count <= n, ErrorCode::InvalidArgument, "training size exceeds dataset size");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = substream(seed, {});
  std::shuffle(idx.begin(), idx.end(), rng);
  TrainTestSplit s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_count));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_count), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Training count for a fraction, at least 1 and leaving at least 1 for test.
inline std::size_t train_count_for(std::size_t n, double train_fraction) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::InvalidArgument,
          "train fraction must be in (0, 1)");
  require(n >= 2, ErrorCode::InvalidArgument, "need at least two records to split");
  const auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

struct NbSynthetic {
  BayesNetGraph graph;
  ThetaTable theta;  // generating Bernoulli parameters
  Dataset data;
  TrainTestSplit split;
};

/// Ancestral sampling from a naive Bayes model with `features` binary
/// features. Parameters not supplied are drawn from Beta(1, 1).
inline NbSynthetic synth_nb(std::size_t features, std::size_t n, std::uint64_t seed,
                            std::optional<ThetaTable> theta = std::nullopt,
                            double train_fraction = 0.05) {
  require(features >= 1 && features < kMaxNodes, ErrorCode::InvalidArgument,
          "feature count must be in [1, 63]");
  require(n >= 2, ErrorCode::InvalidArgument, "need at least two records");
  BayesNetGraph graph = BayesNetGraph::naive_bayes(features);
  ThetaTable params(graph, 0.0);
  if (theta) {
    require(theta->layout() == params.layout(), ErrorCode::DimensionMismatch,
            "generating parameters do not match the naive Bayes layout");
    params = *theta;
  } else {
    Rng prng = substream(seed, {0});
    for (double& t : params.values()) t = uniform01(prng);  // Beta(1, 1)
  }
  Rng rng = substream(seed, {1});
  Dataset data(features + 1);
  for (std::size_t r = 0; r < n; ++r) {
    Record x = 0;
    if (uniform01(rng) < params(0, 0)) x |= 1U;
    const std::size_t y = x & 1U;
    for (std::size_t i = 1; i <= features; ++i)
      if (uniform01(rng) < params(i, y)) x |= singleton(i);
    data.add(x);
  }
  TrainTestSplit split = split_indices(n, train_count_for(n, train_fraction), derive_seed(seed, {2}));
  return {std::move(graph), std::move(params), std::move(data), std::move(split)};
}

}  // namespace dpbayes
