#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

/// Finite discretization of a parameter space with its prior masses, which
/// double as the base measure of the exponential mechanism.
struct GridSpec {
  std::vector<std::vector<double>> points;
  std::vector<double> prior_mass;

  std::size_t size() const noexcept { return points.size(); }

  void validate() const {
    require(!points.empty(), ErrorCode::InvalidArgument, "grid is empty");
    require(points.size() == prior_mass.size(), ErrorCode::LengthMismatch,
            "one prior mass per grid point required");
    double total = 0.0;
    for (double m : prior_mass) {
      require(m >= 0.0 && std::isfinite(m), ErrorCode::InvalidArgument,
              "prior masses must be finite and non-negative");
      total += m;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "prior masses must sum to 1");
  }

  static GridSpec normalized(std::vector<std::vector<double>> points, std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    require(total > 0.0, ErrorCode::InvalidArgument, "prior weights sum to zero");
    for (double& w : weights) w /= total;
    GridSpec g{std::move(points), std::move(weights)};
    g.validate();
    return g;
  }

  static GridSpec uniform(std::vector<std::vector<double>> points) {
    std::vector<double> w(points.size(), 1.0);
    return normalized(std::move(points), std::move(w));
  }
};

enum class SensitivityKind { Lipschitz, Stochastic };

struct MapSensitivity {
  SensitivityKind kind = SensitivityKind::Lipschitz;
  double delta_value = 1.0;
};

/// Delta = sqrt(L r) (Lipschitz) or sqrt(M / 2) (stochastic Lipschitz; r unused).
inline MapSensitivity map_sensitivity(SensitivityKind kind, double l_or_m, double r = 1.0) {
  require(l_or_m > 0.0, ErrorCode::InvalidArgument, "L or M must be positive");
  if (kind == SensitivityKind::Lipschitz) {
    require(r > 0.0, ErrorCode::InvalidArgument, "distance r must be positive");
    return {kind, std::sqrt(l_or_m * r)};
  }
  return {kind, std::sqrt(0.5 * l_or_m)};
}

/// Exact probabilities prop. to exp(eps u / (2 Delta)) xi(theta), normalized by
/// log-sum-exp. eps = 0 returns the prior masses unchanged.
inline std::vector<double> sampling_probabilities(const GridSpec& grid, std::span<const double> utility,
                                                  double epsilon, MapSensitivity delta) {
  grid.validate();
  require(utility.size() == grid.size(), ErrorCode::LengthMismatch,
          "one utility value per grid point required");
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorCode::InvalidEpsilon,
          "epsilon must be finite and non-negative");
  require(delta.delta_value > 0.0, ErrorCode::InvalidArgument, "sensitivity must be positive");
  for (double u : utility)
    require(std::isfinite(u), ErrorCode::InvalidArgument, "utility must be finite");
  if (epsilon == 0.0) return grid.prior_mass;

  const double rate = epsilon / (2.0 * delta.delta_value);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> logw(grid.size(), kNegInf);
  double top = kNegInf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.prior_mass[k] > 0.0) {
      logw[k] = rate * utility[k] + std::log(grid.prior_mass[k]);
      top = std::max(top, logw[k]);
    }
  }
  double total = 0.0;
  for (double lw : logw) total += lw == kNegInf ? 0.0 : std::exp(lw - top);
  std::vector<double> probs(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (logw[k] != kNegInf) probs[k] = std::exp(logw[k] - top) / total;
  return probs;
}

/// Inverse-CDF draw of an index from a probability vector.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> probs) : cumulative_(probs.size()) {
    double s = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) cumulative_[k] = (s += probs[k]);
  }

  std::size_t operator()(double u) const {
    const double target = u * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  std::size_t operator()(Rng& rng) const { return (*this)(uniform01(rng)); }

 private:
  std::vector<double> cumulative_;
};

/// Index of the grid point released by the exponential mechanism.
inline std::size_t exp_mechanism_sample(const GridSpec& grid, std::span<const double> utility,
                                        double epsilon, MapSensitivity delta, std::uint64_t seed) {
  const auto probs = sampling_probabilities(grid, utility, epsilon, delta);
  return DiscreteSampler(probs)(keyed_uniform(seed, {}));
}

/// Largest utility over the whole grid, supported or not.
inline double max_utility(std::span<const double> utility) {
  require(!utility.empty(), ErrorCode::InvalidArgument, "utility is empty");
  return *std::max_element(utility.begin(), utility.end());
}

/// Prior mass of the level set {u > u* - t}. Zero when the maximizer and
/// everything near it carry no prior mass.
inline double level_set_mass(const GridSpec& grid, std::span<const double> utility, double t) {
  const double best = max_utility(utility);
  double mass = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (utility[k] > best - t) mass += grid.prior_mass[k];
  return mass;
}

/// Bound exp(-rate t) / xi(S_t) on the probability that the released point
/// has utility at most u* - 2t, where rate = eps / (2 Delta) is the
/// exponent's coefficient on the utility. With Delta = 1/2 this is
/// exp(-eps t) / xi(S_t).
inline double lemma6_certificate(const GridSpec& grid, std::span<const double> utility,
                                 double epsilon, double t, MapSensitivity delta = {SensitivityKind::Lipschitz, 0.5}) {
  grid.validate();
  require(utility.size() == grid.size(), ErrorCode::LengthMismatch,
          "one utility value per grid point required");
  require(t > 0.0, ErrorCode::InvalidArgument, "t must be positive");
  require(epsilon >= 0.0, ErrorCode::InvalidEpsilon, "epsilon must be non-negative");
  for (double u : utility)
    require(std::isfinite(u), ErrorCode::InvalidArgument, "utility must be finite");
  const double mass = level_set_mass(grid, utility, t);
  require(mass > 0.0, ErrorCode::EmptyLevelSet, "level set has zero prior mass");
  const double rate = epsilon / (2.0 * delta.delta_value);
  return std::exp(-rate * t) / mass;
}

/// Indicator of the complement set S^c_{2t} = {u <= u* - 2t}.
inline std::vector<bool> far_from_map(const GridSpec& grid, std::span<const double> utility, double t) {
  const double best = max_utility(utility);
  std::vector<bool> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = utility[k] <= best - 2.0 * t;
  return out;
}

}  // namespace dpbayes
