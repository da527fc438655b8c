#include "fruitbench/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fruitbench/error.hpp"

namespace fruitbench {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n_cols = rows.empty() ? 0 : rows.front().size();
  CostMatrix m(rows.size(), n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols) {
      throw ValidationError("cost matrix is not rectangular");
    }
    for (std::size_t c = 0; c < n_cols; ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

void CostMatrix::set(std::size_t r, std::size_t c, double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("cost matrix entry (" + std::to_string(r) + ", " +
                          std::to_string(c) + ") is not finite");
  }
  data_[r * cols_ + c] = value;
}

namespace {

// Solves the n <= m case: assigns every one of the n "workers" a distinct
// "job". cost(i, j) with 0-based indices. Returns job index per worker.
template <typename CostFn>
std::vector<std::size_t> solve_rows_le_cols(std::size_t n, std::size_t m,
                                            CostFn cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials and matching; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0);  // worker matched to job j
  std::vector<std::size_t> way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> job_of(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) job_of[owner[j] - 1] = j - 1;
  }
  return job_of;
}

}  // namespace

Assignment hungarian(const CostMatrix& costs) {
  Assignment out;
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  std::vector<char> row_used(rows, 0);
  std::vector<char> col_used(cols, 0);

  if (!costs.empty()) {
    if (rows <= cols) {
      const auto job = solve_rows_le_cols(
          rows, cols, [&](std::size_t r, std::size_t c) { return costs(r, c); });
      for (std::size_t r = 0; r < rows; ++r) out.pairs.emplace_back(r, job[r]);
    } else {
      const auto job = solve_rows_le_cols(
          cols, rows, [&](std::size_t c, std::size_t r) { return costs(r, c); });
      for (std::size_t c = 0; c < cols; ++c) out.pairs.emplace_back(job[c], c);
      std::sort(out.pairs.begin(), out.pairs.end());
    }
  }

  for (const auto& [r, c] : out.pairs) {
    row_used[r] = 1;
    col_used[c] = 1;
    out.total_cost += costs(r, c);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_used[r]) out.unmatched_predictions.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) out.unmatched_ground_truth.push_back(c);
  }
  return out;
}

}  // namespace fruitbench
