#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

/// Every DAG on `nodes` labelled nodes, parent lists in ascending order.
inline std::vector<BayesNetGraph> enumerate_dags(std::size_t nodes) {
  require(nodes >= 1 && nodes <= 4, ErrorCode::BudgetExceeded, "DAG enumeration limited to 4 nodes");
  std::vector<BayesNetGraph> out;
  const std::size_t per_node = std::size_t{1} << (nodes - 1);
  std::size_t combos = 1;
  for (std::size_t i = 0; i < nodes; ++i) combos *= per_node;
  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<std::vector<std::size_t>> parents(nodes);
    std::size_t rest = code;
    for (std::size_t i = 0; i < nodes; ++i) {
      const std::size_t choice = rest % per_node;
      rest /= per_node;
      std::size_t b = 0;
      for (std::size_t p = 0; p < nodes; ++p) {
        if (p == i) continue;
        if (((choice >> b) & 1U) != 0) parents[i].push_back(p);
        ++b;
      }
    }
    try {
      out.emplace_back(nodes, std::move(parents));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CyclicGraph) throw;
    }
  }
  return out;
}

/// max over every dataset of size 1..n_max and every neighbour (one record
/// replaced) of || updates(D) - updates(D') ||_1, by brute force.
inline double exhaustive_sensitivity(const BayesNetGraph& graph, std::size_t n_max) {
  const std::size_t k = graph.node_count();
  require(k <= 4 && n_max <= 4, ErrorCode::BudgetExceeded,
          "exhaustive enumeration limited to 4 nodes and 4 records");
  const std::size_t values = std::size_t{1} << k;
  double worst = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::size_t count = 1;
    for (std::size_t r = 0; r < n; ++r) count *= values;
    std::vector<UpdateVector> all;
    all.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
      Dataset d(k);
      std::size_t rest = code;
      for (std::size_t r = 0; r < n; ++r, rest /= values) d.add(rest % values);
      all.push_back(compute_updates(graph, d));
    }
    std::size_t stride = 1;
    for (std::size_t pos = 0; pos < n; ++pos, stride *= values) {
      for (std::size_t code = 0; code < count; ++code) {
        const std::size_t digit = (code / stride) % values;
        for (std::size_t v = digit + 1; v < values; ++v) {
          const std::size_t other = code + (v - digit) * stride;
          double l1 = 0.0;
          for (std::size_t e = 0; e < all[code].size(); ++e) {
            l1 += std::abs(all[code][e].alpha - all[other][e].alpha);
            l1 += std::abs(all[code][e].beta - all[other][e].beta);
          }
          worst = std::max(worst, l1);
        }
      }
    }
  }
  return worst;
}

struct PrivacyCheckReport {
  std::string mechanism;
  double epsilon_claimed = 0.0;
  double max_log_ratio_observed = 0.0;
  bool pass = false;
};

inline constexpr double kRatioTolerance = 1e-9;

/// Analytic density-ratio check of a product-Laplace release with the given
/// noise scale: for each output point z and shift s (||s||_1 <= sensitivity)
/// the log-ratio sum_k (|z_k - s_k| - |z_k|) / scale must stay within eps.
inline PrivacyCheckReport laplace_density_ratio_check(
    double sensitivity, double epsilon, double scale, std::span<const std::vector<double>> points,
    std::span<const std::vector<double>> shifts, std::string mechanism = "laplace") {
  require_epsilon(epsilon);
  require(scale > 0.0, ErrorCode::InvalidArgument, "noise scale must be positive");
  PrivacyCheckReport r{std::move(mechanism), epsilon, 0.0, false};
  for (const auto& s : shifts) {
    double l1 = 0.0;
    for (double v : s) l1 += std::abs(v);
    require(l1 <= sensitivity * (1.0 + 1e-12), ErrorCode::InvalidArgument,
            "shift exceeds the claimed sensitivity");
    for (const auto& z : points) {
      require(z.size() == s.size(), ErrorCode::LengthMismatch, "point and shift dimensions differ");
      double lr = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) lr += std::abs(z[k] - s[k]) - std::abs(z[k]);
      r.max_log_ratio_observed = std::max(r.max_log_ratio_observed, std::abs(lr) / scale);
    }
  }
  r.pass = r.max_log_ratio_observed <= epsilon + kRatioTolerance;
  return r;
}

/// Uniformly random direction scaled to L1 norm exactly `l1`.
inline std::vector<double> random_shift(std::size_t dim, double l1, Rng& rng) {
  std::vector<double> s(dim);
  double total = 0.0;
  std::exponential_distribution<double> expo(1.0);
  for (double& v : s) {
    v = expo(rng);
    total += v;
  }
  for (double& v : s) {
    v = v / total * l1;
    if (uniform01(rng) < 0.5) v = -v;
  }
  return s;
}

}  // namespace dpbayes
