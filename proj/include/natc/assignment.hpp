#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "natc/errors.hpp"
#include "natc/mat.hpp"

namespace natc {

struct Assignment {
  std::vector<std::int32_t> column_of_row;  // injective row -> column map
  double total_cost = 0;
};

// Minimum-cost injective assignment of n rows to m >= n columns, by the
// shortest-augmenting-path formulation with dual potentials. Rectangular
// matrices are handled directly, no square padding. O(n^2 m).
inline Assignment hungarian(const Mat<double>& cost) {
  const std::size_t n = cost.rows, m = cost.cols;
  if (n < 1) throw UsageError("cost matrix needs at least one row");
  if (n > m) throw UsageError("cost matrix must have rows <= columns");
  for (double c : cost.a)
    if (!std::isfinite(c)) throw NumericError("cost matrix entries must be finite");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_potential(n, 0.0), col_potential(m, 0.0);
  std::vector<std::int32_t> row_of_col(m, -1);

  for (std::size_t row = 0; row < n; ++row) {
    // Grow an alternating tree from `row` until a free column is reached.
    std::vector<double> min_reduced(m, kInf);
    std::vector<std::int32_t> parent_col(m, -1);
    std::vector<bool> visited(m, false);
    std::int32_t sink = -1;
    std::int32_t current_row = static_cast<std::int32_t>(row);
    std::int32_t current_col = -1;
    while (sink < 0) {
      double delta = kInf;
      std::int32_t next_col = -1;
      for (std::size_t j = 0; j < m; ++j) {
        if (visited[j]) continue;
        const double reduced = cost(static_cast<std::size_t>(current_row), j) -
                               row_potential[static_cast<std::size_t>(current_row)] -
                               col_potential[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          parent_col[j] = current_col;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          next_col = static_cast<std::int32_t>(j);
        }
      }
      // Update potentials so tree edges stay tight.
      row_potential[row] += delta;
      for (std::size_t j = 0; j < m; ++j) {
        if (visited[j]) {
          row_potential[static_cast<std::size_t>(row_of_col[j])] += delta;
          col_potential[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      visited[static_cast<std::size_t>(next_col)] = true;
      if (row_of_col[static_cast<std::size_t>(next_col)] < 0) {
        sink = next_col;
      } else {
        current_row = row_of_col[static_cast<std::size_t>(next_col)];
        current_col = next_col;
      }
    }
    // Augment along the path back to the root.
    while (sink >= 0) {
      const std::int32_t prev = parent_col[static_cast<std::size_t>(sink)];
      row_of_col[static_cast<std::size_t>(sink)] =
          prev < 0 ? static_cast<std::int32_t>(row) : row_of_col[static_cast<std::size_t>(prev)];
      sink = prev;
    }
  }

  Assignment result;
  result.column_of_row.assign(n, -1);
  for (std::size_t j = 0; j < m; ++j)
    if (row_of_col[j] >= 0) result.column_of_row[static_cast<std::size_t>(row_of_col[j])] =
        static_cast<std::int32_t>(j);
  for (std::size_t i = 0; i < n; ++i)
    result.total_cost += cost(i, static_cast<std::size_t>(result.column_of_row[i]));
  return result;
}

// Exhaustive minimum over all injective row -> column maps. Test oracle.
inline Assignment brute_force_assignment(const Mat<double>& cost) {
  const std::size_t n = cost.rows, m = cost.cols;
  if (n < 1) throw UsageError("cost matrix needs at least one row");
  if (n > m) throw UsageError("cost matrix must have rows <= columns");
  if (n > 7 || m > 7) throw UsageError("brute_force_assignment budget exceeded (7x7)");
  for (double c : cost.a)
    if (!std::isfinite(c)) throw NumericError("cost matrix entries must be finite");

  std::vector<std::int32_t> columns(m);
  std::iota(columns.begin(), columns.end(), 0);
  Assignment best;
  best.total_cost = std::numeric_limits<double>::infinity();
  // Permute all m columns; the first n entries define the injective map.
  std::sort(columns.begin(), columns.end());
  do {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += cost(i, static_cast<std::size_t>(columns[i]));
    if (total < best.total_cost) {
      best.total_cost = total;
      best.column_of_row.assign(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(n));
    }
  } while (std::next_permutation(columns.begin(), columns.end()));
  return best;
}

}  // namespace natc
