#pragma once

#include <bit>
#include <cstddef>
#include <map>
#include <vector>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"

namespace dpbayes {

inline constexpr std::size_t kDenseThreshold = 20;

/// Counts over the Boolean hypercube {0,1}^k, stored sparsely (absent = 0).
class ContingencyTable {
 public:
  explicit ContingencyTable(std::size_t dimension) : dimension_(dimension) {
    require(dimension <= kMaxNodes, ErrorCode::DimensionMismatch, "dimension above 64");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  const std::map<Record, double>& cells() const noexcept { return cells_; }

  double at(Record cell) const {
    const auto it = cells_.find(cell);
    return it == cells_.end() ? 0.0 : it->second;
  }

  void add(Record cell, double count) {
    require((cell & ~low_mask(dimension_)) == 0, ErrorCode::DimensionMismatch,
            "cell index beyond table dimension");
    cells_[cell] += count;
  }

  double total() const noexcept {
    double s = 0.0;
    for (const auto& [cell, count] : cells_) s += count;
    return s;
  }

  /// Materializes all 2^k cells; refuses above `threshold` dimensions.
  std::vector<double> dense(std::size_t threshold = kDenseThreshold) const {
    require(dimension_ <= threshold, ErrorCode::BudgetExceeded,
            "dense materialization above threshold dimension");
    std::vector<double> out(std::size_t{1} << dimension_, 0.0);
    for (const auto& [cell, count] : cells_) out[cell] += count;
    return out;
  }

  friend ContingencyTable operator+(ContingencyTable a, const ContingencyTable& b) {
    require(a.dimension_ == b.dimension_, ErrorCode::DimensionMismatch, "table dimensions differ");
    for (const auto& [cell, count] : b.cells_) a.cells_[cell] += count;
    return a;
  }

 private:
  std::size_t dimension_;
  std::map<Record, double> cells_;
};

inline ContingencyTable build_table(const Dataset& data) {
  ContingencyTable table(data.dimension());
  for (Record x : data.records()) table.add(x, 1.0);
  return table;
}

/// Marginal onto the variables in `subset`: sums every cell whose restriction
/// to `subset` equals the marginal cell. Marginal cells are indexed by the
/// compressed restriction (ascending variable order).
inline ContingencyTable project_marginal(const ContingencyTable& table, VariableMask subset) {
  require((subset & ~low_mask(table.dimension())) == 0, ErrorCode::DimensionMismatch,
          "subset refers to variables beyond table dimension");
  ContingencyTable out(static_cast<std::size_t>(std::popcount(subset)));
  for (const auto& [cell, count] : table.cells()) out.add(compress_bits(cell, subset), count);
  return out;
}

}  // namespace dpbayes
