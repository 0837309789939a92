#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regmdp {

using ValueFn = std::vector<double>;

/// Dense row-major table. Rows index states, columns index actions.
struct Table {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Table() = default;
  Table(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {v.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {v.data() + r * cols, cols}; }

  bool operator==(const Table&) const = default;
};

using QFn = Table;

/// A stochastic policy: each row is a probability distribution over actions.
using Policy = Table;

}  // namespace regmdp
