#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpbayes/error.hpp"

namespace dpbayes {

/// A full assignment of up to 64 binary variables; bit c holds node c.
using Record = std::uint64_t;
/// A set of variables over the same indexing as Record.
using VariableMask = std::uint64_t;

inline constexpr std::size_t kMaxNodes = 64;
inline constexpr std::size_t kMaxParents = 24;

constexpr bool bit(Record x, std::size_t c) noexcept { return ((x >> c) & 1U) != 0; }
constexpr VariableMask singleton(std::size_t c) noexcept { return VariableMask{1} << c; }

/// Mask with the low `k` bits set.
constexpr VariableMask low_mask(std::size_t k) noexcept {
  return k >= 64 ? ~VariableMask{0} : (VariableMask{1} << k) - 1;
}

/// Gathers the bits of `x` selected by `mask` into the low bits, preserving
/// ascending coordinate order (the restriction of x to mask).
constexpr std::uint64_t compress_bits(std::uint64_t x, VariableMask mask) noexcept {
  std::uint64_t out = 0;
  std::size_t pos = 0;
  while (mask != 0) {
    const int c = std::countr_zero(mask);
    out |= ((x >> c) & 1U) << pos;
    ++pos;
    mask &= mask - 1;
  }
  return out;
}

/// Inverse of compress_bits: scatters the low bits of `x` onto `mask`.
constexpr std::uint64_t expand_bits(std::uint64_t x, VariableMask mask) noexcept {
  std::uint64_t out = 0;
  std::size_t pos = 0;
  while (mask != 0) {
    const int c = std::countr_zero(mask);
    out |= ((x >> pos) & 1U) << c;
    ++pos;
    mask &= mask - 1;
  }
  return out;
}

/// Returns a topological order of the DAG given by parent lists, or throws
/// CyclicGraph. Ties are broken by smallest node index.
inline std::vector<std::size_t> validate_graph(
    std::size_t node_count, const std::vector<std::vector<std::size_t>>& parents) {
  require(node_count >= 1 && node_count <= kMaxNodes, ErrorCode::InvalidGraph,
          "node count must be in [1, 64]");
  require(parents.size() == node_count, ErrorCode::InvalidGraph,
          "parent list count does not match node count");
  std::vector<std::size_t> indegree(node_count, 0);
  std::vector<std::vector<std::size_t>> children(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    require(parents[i].size() <= kMaxParents, ErrorCode::InvalidGraph,
            "node " + std::to_string(i) + " has too many parents");
    VariableMask seen = 0;
    for (std::size_t p : parents[i]) {
      require(p < node_count, ErrorCode::InvalidGraph,
              "parent index " + std::to_string(p) + " out of range");
      require(p != i, ErrorCode::InvalidGraph,
              "node " + std::to_string(i) + " is its own parent");
      require(!bit(seen, p), ErrorCode::InvalidGraph,
              "duplicate parent " + std::to_string(p) + " of node " + std::to_string(i));
      seen |= singleton(p);
      children[p].push_back(i);
      ++indegree[i];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < node_count; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  require(order.size() == node_count, ErrorCode::CyclicGraph,
          "no topological order exists");
  return order;
}

/// Directed acyclic graph over binary variables. Immutable after construction.
class BayesNetGraph {
 public:
  BayesNetGraph(std::size_t node_count, std::vector<std::vector<std::size_t>> parents)
      : parents_(std::move(parents)), order_(validate_graph(node_count, parents_)) {}

  static BayesNetGraph isolated(std::size_t node_count) {
    return BayesNetGraph(node_count, std::vector<std::vector<std::size_t>>(node_count));
  }

  /// Node 0 is the class Y; nodes 1..features each have Y as sole parent.
  static BayesNetGraph naive_bayes(std::size_t features) {
    std::vector<std::vector<std::size_t>> parents(features + 1);
    for (std::size_t i = 1; i <= features; ++i) parents[i] = {0};
    return BayesNetGraph(features + 1, std::move(parents));
  }

  /// X0 -> X1 -> ... -> X(n-1).
  static BayesNetGraph chain(std::size_t node_count) {
    std::vector<std::vector<std::size_t>> parents(node_count);
    for (std::size_t i = 1; i < node_count; ++i) parents[i] = {i - 1};
    return BayesNetGraph(node_count, std::move(parents));
  }

  std::size_t node_count() const noexcept { return parents_.size(); }
  std::span<const std::size_t> parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<std::vector<std::size_t>>& parent_lists() const noexcept { return parents_; }
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

  std::size_t config_count(std::size_t i) const { return std::size_t{1} << parents_.at(i).size(); }

  std::size_t max_indegree() const noexcept {
    std::size_t best = 0;
    for (const auto& p : parents_) best = std::max(best, p.size());
    return best;
  }

  VariableMask parent_mask(std::size_t i) const {
    VariableMask m = 0;
    for (std::size_t p : parents_.at(i)) m |= singleton(p);
    return m;
  }

  /// The node together with its parents.
  VariableMask family_mask(std::size_t i) const { return parent_mask(i) | singleton(i); }

  /// Little-endian over the declared parent order: bit b of the result is the
  /// value of parents(i)[b].
  std::size_t parent_config(std::size_t i, Record x) const {
    std::size_t j = 0;
    const auto& ps = parents_.at(i);
    for (std::size_t b = 0; b < ps.size(); ++b)
      if (bit(x, ps[b])) j |= std::size_t{1} << b;
    return j;
  }

  /// The assignment of the parents (as a Record over all nodes) encoded by j.
  Record config_assignment(std::size_t i, std::size_t j) const {
    Record x = 0;
    const auto& ps = parents_.at(i);
    for (std::size_t b = 0; b < ps.size(); ++b)
      if (((j >> b) & 1U) != 0) x |= singleton(ps[b]);
    return x;
  }

 private:
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::size_t> order_;
};

/// Complete binary dataset: every record has exactly `dimension` bits.
class Dataset {
 public:
  explicit Dataset(std::size_t dimension) : dimension_(dimension) {
    require(dimension >= 1 && dimension <= kMaxNodes, ErrorCode::DimensionMismatch,
            "dimension must be in [1, 64]");
  }

  Dataset(std::size_t dimension, std::vector<Record> records) : Dataset(dimension) {
    for (Record r : records) add(r);
  }

  void add(Record r) {
    if ((r & ~low_mask(dimension_)) != 0)
      throw Error(ErrorCode::DimensionMismatch,
                  "record has bits beyond dimension " + std::to_string(dimension_));
    records_.push_back(r);
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::span<const Record> records() const noexcept { return records_; }
  Record operator[](std::size_t i) const { return records_.at(i); }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out(dimension_);
    out.records_.reserve(indices.size());
    for (std::size_t i : indices) out.records_.push_back(records_.at(i));
    return out;
  }

 private:
  std::size_t dimension_;
  std::vector<Record> records_;
};

/// Identifies one (node, parent configuration) entry.
struct EntryKey {
  std::size_t node = 0;
  std::size_t config = 0;
  friend bool operator==(const EntryKey&, const EntryKey&) = default;
};

/// Flat indexing of all m = sum_i 2^{|parents(i)|} entries of a graph.
class EntryLayout {
 public:
  EntryLayout() = default;
  explicit EntryLayout(const BayesNetGraph& graph) : offsets_(graph.node_count() + 1, 0) {
    for (std::size_t i = 0; i < graph.node_count(); ++i)
      offsets_[i + 1] = offsets_[i] + graph.config_count(i);
  }

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t config_count(std::size_t node) const { return offsets_.at(node + 1) - offsets_.at(node); }

  std::size_t index(std::size_t node, std::size_t config) const {
    if (node >= node_count() || config >= config_count(node))
      throw Error(ErrorCode::InvalidArgument,
                  "entry (" + std::to_string(node) + ", " + std::to_string(config) + ") out of range");
    return offsets_[node] + config;
  }

  EntryKey key(std::size_t flat) const {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
    const auto node = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    return {node, flat - offsets_[node]};
  }

  friend bool operator==(const EntryLayout&, const EntryLayout&) = default;

 private:
  std::vector<std::size_t> offsets_;
};

/// Values of type T for every (node, configuration) entry of a graph.
template <class T>
class EntryTable {
 public:
  EntryTable() = default;
  explicit EntryTable(const BayesNetGraph& graph, T fill = T{})
      : layout_(graph), values_(layout_.size(), fill) {}
  EntryTable(EntryLayout layout, std::vector<T> values)
      : layout_(std::move(layout)), values_(std::move(values)) {
    require(values_.size() == layout_.size(), ErrorCode::DimensionMismatch,
            "value count does not match entry layout");
  }

  const EntryLayout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator()(std::size_t node, std::size_t config) { return values_[layout_.index(node, config)]; }
  const T& operator()(std::size_t node, std::size_t config) const {
    return values_[layout_.index(node, config)];
  }
  T& operator[](std::size_t flat) { return values_[flat]; }
  const T& operator[](std::size_t flat) const { return values_[flat]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

 private:
  EntryLayout layout_;
  std::vector<T> values_;
};

/// Success / failure counts for one entry. Exact updates are integers; noisy
/// mechanisms produce reals.
struct UpdateCount {
  double alpha = 0.0;
  double beta = 0.0;
  friend bool operator==(const UpdateCount&, const UpdateCount&) = default;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
  bool valid() const noexcept { return alpha > 0.0 && beta > 0.0; }
  double mean() const noexcept { return alpha / (alpha + beta); }
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

using UpdateVector = EntryTable<UpdateCount>;
using BetaTable = EntryTable<BetaParams>;
using ThetaTable = EntryTable<double>;

struct PriorOverride {
  EntryKey entry;
  BetaParams params;
};

inline BetaTable make_priors(const BayesNetGraph& graph, BetaParams fallback,
                             std::span<const PriorOverride> overrides = {}) {
  require(fallback.valid(), ErrorCode::InvalidArgument, "prior parameters must be positive");
  BetaTable priors(graph, fallback);
  for (const auto& o : overrides) {
    require(o.params.valid(), ErrorCode::InvalidArgument, "prior parameters must be positive");
    priors(o.entry.node, o.entry.config) = o.params;
  }
  return priors;
}

inline UpdateVector compute_updates(const BayesNetGraph& graph, const Dataset& data) {
  require(data.dimension() == graph.node_count(), ErrorCode::DimensionMismatch,
          "dataset dimension " + std::to_string(data.dimension()) + " != node count " +
              std::to_string(graph.node_count()));
  UpdateVector updates(graph);
  for (Record x : data.records()) {
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
      UpdateCount& u = updates(i, graph.parent_config(i, x));
      if (bit(x, i))
        u.alpha += 1.0;
      else
        u.beta += 1.0;
    }
  }
  return updates;
}

inline UpdateVector operator+(const UpdateVector& a, const UpdateVector& b) {
  require(a.layout() == b.layout(), ErrorCode::DimensionMismatch, "update layouts differ");
  UpdateVector out = a;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].alpha += b[k].alpha;
    out[k].beta += b[k].beta;
  }
  return out;
}

/// Elementwise conjugate update Beta(alpha + d_alpha, beta + d_beta).
inline BetaTable posterior_params(const BetaTable& prior, const UpdateVector& updates) {
  require(prior.layout() == updates.layout(), ErrorCode::MissingPriorEntry,
          "prior does not cover every (node, configuration) entry");
  BetaTable out = prior;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].alpha += updates[k].alpha;
    out[k].beta += updates[k].beta;
    if (!out[k].valid()) {
      const EntryKey e = out.layout().key(k);
      throw Error(ErrorCode::NonPositivePosteriorParam,
                  "entry (" + std::to_string(e.node) + ", " + std::to_string(e.config) +
                      ") has a non-positive posterior parameter");
    }
  }
  return out;
}

}  // namespace dpbayes
