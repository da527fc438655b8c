#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace fruitbench {

// Dense row-major cost matrix: rows are predictions, columns ground truth.
class CostMatrix {
 public:
  CostMatrix() = default;
  // All entries zero.
  CostMatrix(std::size_t rows, std::size_t cols);
  // Throws ValidationError on ragged rows or non-finite entries.
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  // Throws ValidationError if value is not finite.
  void set(std::size_t r, std::size_t c, double value);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  // (prediction, ground truth) pairs, ascending by prediction index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truth;
  double total_cost = 0.0;
};

// Minimum-cost maximal matching (min(rows, cols) pairs) by the
// shortest-augmenting-path Hungarian method with row/column potentials,
// O(n^2 m). Ties resolve deterministically: rows are inserted in ascending
// order and, among equal reduced costs, the lowest column index wins.
// An empty matrix yields an empty assignment.
Assignment hungarian(const CostMatrix& costs);

}  // namespace fruitbench
