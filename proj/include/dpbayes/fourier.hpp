#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/random.hpp"
#include "dpbayes/table.hpp"

namespace dpbayes {

/// Walsh character index: gamma selects the variables whose parity is taken.
using FourierIndex = std::uint64_t;

inline constexpr std::size_t kDenseTransformLimit = 12;

/// Union over nodes of every subset of the node's family (node + parents).
/// Always contains the empty index. Members are kept sorted.
class DownwardClosure {
 public:
  DownwardClosure(std::size_t dimension, std::vector<FourierIndex> members)
      : dimension_(dimension), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<FourierIndex>& members() const noexcept { return members_; }

  bool contains(FourierIndex gamma) const {
    return std::binary_search(members_.begin(), members_.end(), gamma);
  }

  /// True iff every subset of every member is a member.
  bool is_closed() const {
    for (FourierIndex g : members_) {
      for (FourierIndex s = g;; s = (s - 1) & g) {
        if (!contains(s)) return false;
        if (s == 0) break;
      }
    }
    return contains(0);
  }

 private:
  std::size_t dimension_;
  std::vector<FourierIndex> members_;
};

/// Calls f(s) for every subset s of mask, including 0 and mask itself.
template <class F>
void for_each_subset(VariableMask mask, F&& f) {
  for (VariableMask s = mask;; s = (s - 1) & mask) {
    f(s);
    if (s == 0) break;
  }
}

inline DownwardClosure downward_closure(const BayesNetGraph& graph) {
  std::set<FourierIndex> members;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    for_each_subset(graph.family_mask(i), [&](VariableMask s) { members.insert(s); });
  return DownwardClosure(graph.node_count(), {members.begin(), members.end()});
}

/// 2^{-k/2}.
inline double walsh_normalizer(std::size_t k) { return std::exp2(-0.5 * static_cast<double>(k)); }

constexpr double parity_sign(std::uint64_t x, FourierIndex gamma) noexcept {
  return (std::popcount(x & gamma) & 1) != 0 ? -1.0 : 1.0;
}

/// <f^gamma, h> streamed over records without materializing the table.
inline double fourier_coefficient(const Dataset& data, FourierIndex gamma) {
  require((gamma & ~low_mask(data.dimension())) == 0, ErrorCode::DimensionMismatch,
          "gamma longer than record dimension");
  long long signed_sum = 0;
  for (Record x : data.records()) signed_sum += (std::popcount(x & gamma) & 1) != 0 ? -1 : 1;
  return static_cast<double>(signed_sum) * walsh_normalizer(data.dimension());
}

inline double fourier_coefficient(const ContingencyTable& table, FourierIndex gamma) {
  require((gamma & ~low_mask(table.dimension())) == 0, ErrorCode::DimensionMismatch,
          "gamma longer than table dimension");
  double s = 0.0;
  for (const auto& [cell, count] : table.cells()) s += parity_sign(cell, gamma) * count;
  return s * walsh_normalizer(table.dimension());
}

/// All 2^k normalized Walsh coefficients by the in-place fast transform.
/// Kept for k <= 12 as a cross-check of the streaming path.
inline std::vector<double> dense_walsh_coefficients(const ContingencyTable& table) {
  require(table.dimension() <= kDenseTransformLimit, ErrorCode::BudgetExceeded,
          "dense transform limited to 12 dimensions");
  std::vector<double> a = table.dense(kDenseTransformLimit);
  for (std::size_t len = 1; len < a.size(); len <<= 1) {
    for (std::size_t i = 0; i < a.size(); i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double u = a[j];
        const double v = a[j + len];
        a[j] = u + v;
        a[j + len] = u - v;
      }
    }
  }
  const double norm = walsh_normalizer(table.dimension());
  for (double& v : a) v *= norm;
  return a;
}

/// Released coefficients z_gamma for gamma in the downward closure.
struct CoefficientSet {
  std::size_t dimension = 0;
  std::vector<FourierIndex> indices;  // sorted
  std::vector<double> values;
  double noise_scale = 0.0;
  double t = 0.0;
  double increment = 0.0;

  double value(FourierIndex gamma) const {
    const auto it = std::lower_bound(indices.begin(), indices.end(), gamma);
    if (it == indices.end() || *it != gamma)
      throw Error(ErrorCode::MissingCoefficient, "no coefficient for gamma " + std::to_string(gamma));
    return values[static_cast<std::size_t>(it - indices.begin())];
  }
};

/// 2|J| / (eps 2^{k/2}).
inline double fourier_noise_scale(std::size_t closure_size, std::size_t k, double epsilon) {
  require_epsilon(epsilon);
  return 2.0 * static_cast<double>(closure_size) / epsilon * walsh_normalizer(k);
}

/// 4 t |J|^2 / (eps 2^{k/2}), added to the empty-index coefficient.
inline double stealth_increment(std::size_t closure_size, std::size_t k, double epsilon, double t) {
  require_epsilon(epsilon);
  const double j = static_cast<double>(closure_size);
  return 4.0 * t * j * j / epsilon * walsh_normalizer(k);
}

inline CoefficientSet exact_coefficients(const Dataset& data, const DownwardClosure& closure) {
  require(data.dimension() == closure.dimension(), ErrorCode::DimensionMismatch,
          "closure dimension differs from dataset dimension");
  CoefficientSet out;
  out.dimension = data.dimension();
  out.indices = closure.members();
  out.values.reserve(out.indices.size());
  for (FourierIndex g : out.indices) out.values.push_back(fourier_coefficient(data, g));
  return out;
}

/// Laplace release in the Fourier domain followed by the non-negativity
/// increment on z_0. Noise for gamma is drawn from the keyed uniform
/// (seed, gamma).
inline CoefficientSet release_coefficients(const Dataset& data, const DownwardClosure& closure,
                                           double epsilon, double t, std::uint64_t seed) {
  require_epsilon(epsilon);
  require(t > 0.0, ErrorCode::InvalidT, "t must be positive");
  CoefficientSet out = exact_coefficients(data, closure);
  out.noise_scale = fourier_noise_scale(closure.size(), data.dimension(), epsilon);
  out.t = t;
  out.increment = stealth_increment(closure.size(), data.dimension(), epsilon, t);
  for (std::size_t k = 0; k < out.indices.size(); ++k)
    out.values[k] += laplace_from_uniform(out.noise_scale, keyed_uniform(seed, {out.indices[k]}));
  out.values[0] += out.increment;  // indices are sorted, so 0 comes first
  return out;
}

/// Real-valued table over a variable subset; cell c is the compressed
/// restriction (ascending variable order) of a full assignment.
struct MarginalTable {
  VariableMask variables = 0;
  std::vector<double> cells;

  double at_assignment(Record full) const { return cells[compress_bits(full, variables)]; }
  double total() const {
    double s = 0.0;
    for (double c : cells) s += c;
    return s;
  }
  double min_cell() const { return *std::min_element(cells.begin(), cells.end()); }
};

inline MarginalTable to_marginal(const ContingencyTable& projected, VariableMask variables) {
  require(projected.dimension() == static_cast<std::size_t>(std::popcount(variables)),
          ErrorCode::DimensionMismatch, "projected table does not match variable set");
  MarginalTable out{variables, projected.dense(kMaxParents + 1)};
  return out;
}

/// Sums a marginal down onto a subset of its variables.
inline MarginalTable marginalize(const MarginalTable& table, VariableMask subset) {
  require((subset & ~table.variables) == 0, ErrorCode::InvalidArgument,
          "subset must lie within the marginal's variables");
  MarginalTable out{subset, std::vector<double>(std::size_t{1} << std::popcount(subset), 0.0)};
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    const Record full = expand_bits(c, table.variables);
    out.cells[compress_bits(full, subset)] += table.cells[c];
  }
  return out;
}

/// h^i = sum over gamma within family(i) of z_gamma P_family(f^gamma). Each
/// projected character has constant magnitude 2^{k/2 - |family|} on its cells.
inline MarginalTable reconstruct_marginal(const CoefficientSet& coeffs, std::size_t node,
                                          const BayesNetGraph& graph) {
  require(coeffs.dimension == graph.node_count(), ErrorCode::DimensionMismatch,
          "coefficient dimension differs from graph");
  const VariableMask family = graph.family_mask(node);
  const int width = std::popcount(family);
  MarginalTable out{family, std::vector<double>(std::size_t{1} << width, 0.0)};
  const double magnitude =
      std::exp2(0.5 * static_cast<double>(coeffs.dimension) - static_cast<double>(width));
  for_each_subset(family, [&](VariableMask gamma) {
    const double z = coeffs.value(gamma) * magnitude;
    const FourierIndex local = compress_bits(gamma, family);
    for (std::size_t c = 0; c < out.cells.size(); ++c) out.cells[c] += parity_sign(c, local) * z;
  });
  return out;
}

inline std::vector<MarginalTable> reconstruct_all(const CoefficientSet& coeffs,
                                                  const BayesNetGraph& graph) {
  std::vector<MarginalTable> out;
  out.reserve(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    out.push_back(reconstruct_marginal(coeffs, i, graph));
  return out;
}

inline bool all_non_negative(const std::vector<MarginalTable>& marginals) {
  return std::all_of(marginals.begin(), marginals.end(),
                     [](const MarginalTable& m) { return m.min_cell() >= 0.0; });
}

enum class StealthPolicy {
  Report,  // throw NonPositivePosteriorParam on any invalid parameter
  Flag,    // return invalid parameters as-is and list them
  Clamp,   // truncate negative cells at zero before adding to the prior
};

struct FourierPosterior {
  BetaTable params;
  std::vector<EntryKey> flagged;  // invalid entries (Report, Flag) or clamped ones (Clamp)
};

/// Adds each node's marginal cells to its prior: alpha gets the x_i = 1 cell
/// for configuration j, beta the x_i = 0 cell.
inline FourierPosterior posterior_from_marginals(const BayesNetGraph& graph,
                                                 const std::vector<MarginalTable>& marginals,
                                                 const BetaTable& priors,
                                                 StealthPolicy policy = StealthPolicy::Report) {
  require(marginals.size() == graph.node_count(), ErrorCode::DimensionMismatch,
          "need one marginal per node");
  require(priors.layout() == EntryLayout(graph), ErrorCode::MissingPriorEntry,
          "priors must cover every graph entry");
  FourierPosterior out{priors, {}};
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const MarginalTable& h = marginals[i];
    require(h.variables == graph.family_mask(i), ErrorCode::DimensionMismatch,
            "marginal " + std::to_string(i) + " is not over the node's family");
    for (std::size_t j = 0; j < graph.config_count(i); ++j) {
      const Record parents = graph.config_assignment(i, j);
      double ones = h.at_assignment(parents | singleton(i));
      double zeros = h.at_assignment(parents);
      BetaParams& p = out.params(i, j);
      if (policy == StealthPolicy::Clamp) {
        if (ones < 0.0 || zeros < 0.0) out.flagged.push_back({i, j});
        ones = std::max(ones, 0.0);
        zeros = std::max(zeros, 0.0);
      }
      p.alpha += ones;
      p.beta += zeros;
      if (policy != StealthPolicy::Clamp && !p.valid()) out.flagged.push_back({i, j});
    }
  }
  if (policy == StealthPolicy::Report && !out.flagged.empty()) {
    const EntryKey e = out.flagged.front();
    throw Error(ErrorCode::NonPositivePosteriorParam,
                std::to_string(out.flagged.size()) + " entries invalid, first (" +
                    std::to_string(e.node) + ", " + std::to_string(e.config) + ")");
  }
  return out;
}

inline FourierPosterior fourier_posterior_params(const CoefficientSet& coeffs,
                                                 const BayesNetGraph& graph,
                                                 const BetaTable& priors,
                                                 StealthPolicy policy = StealthPolicy::Report) {
  return posterior_from_marginals(graph, reconstruct_all(coeffs, graph), priors, policy);
}

/// L1 deviation bound of one reconstructed marginal, natural log:
/// (4|J|/eps)(2^{|parents(i)|} ln(|J|/delta) + t|J|).
inline double thm4_bound(const BayesNetGraph& graph, std::size_t node, double epsilon,
                         double delta, double t) {
  require_epsilon(epsilon);
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument, "delta must be in (0, 1)");
  require(t > 0.0, ErrorCode::InvalidT, "t must be positive");
  const double j = static_cast<double>(downward_closure(graph).size());
  const double configs = static_cast<double>(graph.config_count(node));
  return 4.0 * j / epsilon * (configs * std::log(j / delta) + t * j);
}

struct FourierRelease {
  CoefficientSet coefficients;
  BetaTable params;
  std::size_t attempts = 0;  // releases made; each one spends epsilon
  bool clamped = false;
};

/// Runs the release until the posterior is valid, spending epsilon per
/// attempt, and clamps after `max_attempts` if `clamp_fallback` is set.
inline FourierRelease release_fourier_posterior(const Dataset& data, const BayesNetGraph& graph,
                                                const BetaTable& priors, double epsilon, double t,
                                                std::uint64_t seed, std::size_t max_attempts = 100,
                                                bool clamp_fallback = true) {
  const DownwardClosure closure = downward_closure(graph);
  FourierRelease out;
  const std::size_t budget = std::max<std::size_t>(max_attempts, 1);
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    out.coefficients = release_coefficients(data, closure, epsilon, t, derive_seed(seed, {attempt}));
    out.attempts = attempt + 1;
    const auto marginals = reconstruct_all(out.coefficients, graph);
    auto post = posterior_from_marginals(graph, marginals, priors, StealthPolicy::Flag);
    if (post.flagged.empty()) {
      out.params = std::move(post.params);
      return out;
    }
    if (attempt + 1 == budget && clamp_fallback) {
      out.params = posterior_from_marginals(graph, marginals, priors, StealthPolicy::Clamp).params;
      out.clamped = true;
      return out;
    }
  }
  throw Error(ErrorCode::NonPositivePosteriorParam, "stealth not achieved within attempt budget");
}

}  // namespace dpbayes
