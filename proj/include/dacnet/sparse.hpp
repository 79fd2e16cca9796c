#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacnet/rng.hpp"

namespace dacnet {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Sparse matrix whose rows and columns are indexed by explicit label sets
// (vertex labels for the graph problems here, not necessarily 0..n-1).
// Entries are unique (row, col) pairs with nonzero values.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::vector<int> rows, std::vector<int> cols,
                                    std::vector<Triplet> entries) {
    SparseMatrix m;
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    if (std::adjacent_find(rows.begin(), rows.end()) != rows.end() ||
        std::adjacent_find(cols.begin(), cols.end()) != cols.end())
      throw std::invalid_argument("SparseMatrix: duplicate labels in index set");
    m.rows_ = std::move(rows);
    m.cols_ = std::move(cols);
    std::erase_if(entries, [](const Triplet& t) { return t.value == 0.0; });
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
        throw std::invalid_argument("SparseMatrix: duplicate (row, col) entry");
    for (const Triplet& t : entries)
      if (!m.has_row(t.row) || !m.has_col(t.col))
        throw std::invalid_argument("SparseMatrix: entry outside index sets");
    m.entries_ = std::move(entries);
    m.build_row_index();
    return m;
  }

  static SparseMatrix identity(std::vector<int> labels) {
    std::vector<Triplet> e;
    e.reserve(labels.size());
    for (int v : labels) e.push_back({v, v, 1.0});
    return from_triplets(labels, labels, std::move(e));
  }

  static SparseMatrix zero(std::vector<int> rows, std::vector<int> cols) {
    return from_triplets(std::move(rows), std::move(cols), {});
  }

  const std::vector<int>& row_set() const { return rows_; }
  const std::vector<int>& col_set() const { return cols_; }
  const std::vector<Triplet>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  int n_rows() const { return static_cast<int>(rows_.size()); }
  int n_cols() const { return static_cast<int>(cols_.size()); }

  bool has_row(int label) const { return std::binary_search(rows_.begin(), rows_.end(), label); }
  bool has_col(int label) const { return std::binary_search(cols_.begin(), cols_.end(), label); }

  int row_pos(int label) const { return pos_of(rows_, label, "row"); }
  int col_pos(int label) const { return pos_of(cols_, label, "col"); }

  // Visits (col_label, value) for every entry of the given row label.
  template <typename F>
  void for_each_in_row(int row_label, F&& f) const {
    const int p = row_pos(row_label);
    for (int i = row_ptr_[static_cast<std::size_t>(p)]; i < row_ptr_[static_cast<std::size_t>(p) + 1]; ++i)
      f(entries_[static_cast<std::size_t>(i)].col, entries_[static_cast<std::size_t>(i)].value);
  }

  // y[row position] = sum_j a(row, j) x[col position of j].
  VecX multiply(const VecX& x) const {
    if (x.size() != n_cols()) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
    VecX y = VecX::Zero(n_rows());
    for (const Triplet& t : pos_entries_) y[t.row] += t.value * x[t.col];
    return y;
  }

  // x[col position] = sum_k a(k, col) y[row position of k].
  VecX multiply_transpose(const VecX& y) const {
    if (y.size() != n_rows()) throw std::invalid_argument("SparseMatrix::multiply_transpose: size mismatch");
    VecX x = VecX::Zero(n_cols());
    for (const Triplet& t : pos_entries_) x[t.col] += t.value * y[t.row];
    return x;
  }

  MatX dense() const {
    MatX d = MatX::Zero(n_rows(), n_cols());
    for (const Triplet& t : entries_) d(row_pos(t.row), col_pos(t.col)) = t.value;
    return d;
  }

  // Dense block with the given row/col labels (each must be a subset of the sets).
  MatX dense_block(std::span<const int> row_labels, std::span<const int> col_labels) const {
    MatX d = MatX::Zero(static_cast<int>(row_labels.size()), static_cast<int>(col_labels.size()));
    std::vector<int> cpos(cols_.size(), -1);
    for (std::size_t j = 0; j < col_labels.size(); ++j) cpos[static_cast<std::size_t>(col_pos(col_labels[j]))] = static_cast<int>(j);
    for (std::size_t i = 0; i < row_labels.size(); ++i) {
      for_each_in_row(row_labels[i], [&](int col, double v) {
        const int j = cpos[static_cast<std::size_t>(col_pos(col))];
        if (j >= 0) d(static_cast<int>(i), j) = v;
      });
    }
    return d;
  }

  // Rows restricted to a label subset; column set unchanged.
  SparseMatrix select_rows(std::vector<int> row_labels) const {
    std::sort(row_labels.begin(), row_labels.end());
    std::vector<Triplet> e;
    for (int r : row_labels) {
      if (!has_row(r)) throw std::invalid_argument("SparseMatrix::select_rows: unknown label");
      for_each_in_row(r, [&](int col, double v) { e.push_back({r, col, v}); });
    }
    return from_triplets(std::move(row_labels), cols_, std::move(e));
  }

  // this * other, with this->cols == other->rows as label sets.
  SparseMatrix multiply_sparse(const SparseMatrix& other) const {
    if (cols_ != other.rows_) throw std::invalid_argument("SparseMatrix::multiply_sparse: label mismatch");
    std::vector<std::vector<std::pair<int, double>>> acc(rows_.size());
    int r = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      while (i >= static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1])) ++r;
      other.for_each_in_row(entries_[i].col, [&](int col, double v) {
        acc[static_cast<std::size_t>(r)].emplace_back(col, entries_[i].value * v);
      });
    }
    std::vector<Triplet> e;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      auto& row = acc[i];
      std::sort(row.begin(), row.end());
      for (std::size_t j = 0; j < row.size();) {
        double s = 0.0;
        std::size_t k = j;
        while (k < row.size() && row[k].first == row[j].first) s += row[k++].second;
        if (s != 0.0) e.push_back({rows_[i], row[j].first, s});
        j = k;
      }
    }
    return from_triplets(rows_, other.cols_, std::move(e));
  }

  // alpha * this + beta * other (identical label sets).
  SparseMatrix combine(double alpha, const SparseMatrix& other, double beta) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
      throw std::invalid_argument("SparseMatrix::combine: label mismatch");
    std::vector<Triplet> e;
    e.reserve(entries_.size() + other.entries_.size());
    for (const Triplet& t : entries_) e.push_back({t.row, t.col, alpha * t.value});
    for (const Triplet& t : other.entries_) e.push_back({t.row, t.col, beta * t.value});
    std::sort(e.begin(), e.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    for (std::size_t j = 0; j < e.size();) {
      double s = 0.0;
      std::size_t k = j;
      while (k < e.size() && e[k].row == e[j].row && e[k].col == e[j].col) s += e[k++].second;
      if (s != 0.0) merged.push_back({e[j].row, e[j].col, s});
      j = k;
    }
    return from_triplets(rows_, cols_, std::move(merged));
  }

  // Operator norm sigma_max(A) by power iteration on A^T A, relative
  // tolerance 1e-10, at most 10000 iterations. Deterministic start.
  double operator_norm() const {
    if (entries_.empty()) return 0.0;
    Rng rng(0x9E3779B97F4A7C15ULL);
    VecX v(n_cols());
    for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
      VecX w = multiply_transpose(multiply(v));
      const double nw = w.norm();
      if (nw == 0.0) return 0.0;
      w /= nw;
      const double next = w.dot(multiply_transpose(multiply(w)));
      const bool converged = std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next));
      lambda = next;
      v = w;
      if (converged) break;
    }
    return std::sqrt(std::max(0.0, lambda));
  }

 private:
  static int pos_of(const std::vector<int>& set, int label, const char* what) {
    const auto it = std::lower_bound(set.begin(), set.end(), label);
    if (it == set.end() || *it != label)
      throw std::invalid_argument(std::string("SparseMatrix: unknown ") + what + " label " + std::to_string(label));
    return static_cast<int>(it - set.begin());
  }

  void build_row_index() {
    row_ptr_.assign(rows_.size() + 1, 0);
    for (const Triplet& t : entries_) ++row_ptr_[static_cast<std::size_t>(row_pos(t.row)) + 1];
    for (std::size_t i = 1; i < row_ptr_.size(); ++i) row_ptr_[i] += row_ptr_[i - 1];
    pos_entries_.clear();
    pos_entries_.reserve(entries_.size());
    for (const Triplet& t : entries_) pos_entries_.push_back({row_pos(t.row), col_pos(t.col), t.value});
  }

  std::vector<int> rows_;
  std::vector<int> cols_;
  std::vector<Triplet> entries_;
  std::vector<Triplet> pos_entries_;  // positional copy for fast matvec
  std::vector<int> row_ptr_;
};

}  // namespace dacnet
