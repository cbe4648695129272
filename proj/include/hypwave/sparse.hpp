#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace hypwave {

/// Symmetric matrix stored as its lower triangle in compressed rows. Column
/// indices within a row are strictly increasing and end at the diagonal when
/// the diagonal is present.
class SparseSymMatrix {
public:
  SparseSymMatrix() = default;

  /// Zero matrix on the given lower-triangle pattern. Entries with col > row
  /// are mirrored; duplicates are merged.
  static SparseSymMatrix from_pattern(int n,
                                      std::vector<std::pair<int, int>> entries);
  /// Builds from raw CSR arrays, checking the storage invariants.
  static SparseSymMatrix from_csr(int n, std::vector<int> row_starts,
                                  std::vector<int> col_indices,
                                  std::vector<double> values);
  static SparseSymMatrix identity(int n);
  static SparseSymMatrix diagonal(std::span<const double> d);

  int size() const { return n_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int> &row_starts() const { return row_starts_; }
  const std::vector<int> &col_indices() const { return col_indices_; }
  const std::vector<double> &values() const { return values_; }
  std::vector<double> &values() { return values_; }

  /// Position of (row, col) in values(), or -1 when outside the pattern.
  /// Arguments may be given in either order.
  long find(int row, int col) const;
  /// Entry of the full symmetric matrix (0 outside the pattern).
  double operator()(int row, int col) const;
  /// Adds to a stored entry; throws std::out_of_range outside the pattern.
  void add(int row, int col, double value);

  bool same_pattern(const SparseSymMatrix &other) const;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// x^T A y.
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  std::vector<double> diagonal_values() const;
  double max_abs() const;

  /// alpha * A + beta * B on the shared pattern.
  static SparseSymMatrix combine(double alpha, const SparseSymMatrix &a,
                                 double beta, const SparseSymMatrix &b);

  /// `i j value` per stored lower-triangle entry, 17 significant digits.
  void write_coordinates(std::ostream &out) const;

private:
  int n_ = 0;
  std::vector<int> row_starts_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

} // namespace hypwave
