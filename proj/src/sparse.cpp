#include "hypwave/sparse.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypwave {

SparseSymMatrix
SparseSymMatrix::from_pattern(int n, std::vector<std::pair<int, int>> entries) {
  for (auto &[r, c] : entries) {
    if (r < 0 || c < 0 || r >= n || c >= n)
      throw std::out_of_range("sparse pattern entry out of range");
    if (c > r)
      std::swap(r, c);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  SparseSymMatrix m;
  m.n_ = n;
  m.row_starts_.assign(n + 1, 0);
  m.col_indices_.reserve(entries.size());
  for (const auto &[r, c] : entries) {
    ++m.row_starts_[r + 1];
    m.col_indices_.push_back(c);
  }
  for (int i = 0; i < n; ++i)
    m.row_starts_[i + 1] += m.row_starts_[i];
  m.values_.assign(entries.size(), 0.0);
  return m;
}

SparseSymMatrix SparseSymMatrix::from_csr(int n, std::vector<int> row_starts,
                                          std::vector<int> col_indices,
                                          std::vector<double> values) {
  if (n < 0 || row_starts.size() != static_cast<std::size_t>(n) + 1 ||
      row_starts.front() != 0 ||
      static_cast<std::size_t>(row_starts.back()) != col_indices.size() ||
      col_indices.size() != values.size())
    throw std::invalid_argument("inconsistent CSR arrays");
  for (int i = 0; i < n; ++i) {
    if (row_starts[i + 1] < row_starts[i])
      throw std::invalid_argument("row starts must be nondecreasing");
    for (int k = row_starts[i]; k < row_starts[i + 1]; ++k) {
      const int c = col_indices[k];
      if (c < 0 || c > i)
        throw std::invalid_argument(
            fmt::format("row {}: column {} is not in the lower triangle", i, c));
      if (k > row_starts[i] && c <= col_indices[k - 1])
        throw std::invalid_argument(
            fmt::format("row {}: columns not strictly increasing", i));
    }
  }
  SparseSymMatrix m;
  m.n_ = n;
  m.row_starts_ = std::move(row_starts);
  m.col_indices_ = std::move(col_indices);
  m.values_ = std::move(values);
  return m;
}

SparseSymMatrix SparseSymMatrix::identity(int n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseSymMatrix SparseSymMatrix::diagonal(std::span<const double> d) {
  const int n = static_cast<int>(d.size());
  std::vector<int> starts(n + 1), cols(n);
  for (int i = 0; i < n; ++i) {
    starts[i + 1] = i + 1;
    cols[i] = i;
  }
  return from_csr(n, std::move(starts), std::move(cols),
                  std::vector<double>(d.begin(), d.end()));
}

long SparseSymMatrix::find(int row, int col) const {
  if (col > row)
    std::swap(row, col);
  if (row < 0 || row >= n_ || col < 0)
    return -1;
  const auto first = col_indices_.begin() + row_starts_[row];
  const auto last = col_indices_.begin() + row_starts_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col)
    return -1;
  return it - col_indices_.begin();
}

double SparseSymMatrix::operator()(int row, int col) const {
  const long k = find(row, col);
  return k < 0 ? 0.0 : values_[k];
}

void SparseSymMatrix::add(int row, int col, double value) {
  const long k = find(row, col);
  if (k < 0)
    throw std::out_of_range(
        fmt::format("entry ({}, {}) is outside the sparsity pattern", row, col));
  values_[k] += value;
}

bool SparseSymMatrix::same_pattern(const SparseSymMatrix &other) const {
  return n_ == other.n_ && row_starts_ == other.row_starts_ &&
         col_indices_ == other.col_indices_;
}

void SparseSymMatrix::multiply(std::span<const double> x,
                               std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    const double xi = x[i];
    for (int k = row_starts_[i]; k < row_starts_[i + 1]; ++k) {
      const int j = col_indices_[k];
      const double v = values_[k];
      acc += v * x[j];
      if (j != i)
        y[j] += v * xi;
    }
    y[i] += acc;
  }
}

std::vector<double> SparseSymMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseSymMatrix::bilinear(std::span<const double> x,
                                 std::span<const double> y) const {
  return dot(x, multiply(y));
}

std::vector<double> SparseSymMatrix::diagonal_values() const {
  std::vector<double> d(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const int last = row_starts_[i + 1] - 1;
    if (last >= row_starts_[i] && col_indices_[last] == i)
      d[i] = values_[last];
  }
  return d;
}

double SparseSymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

SparseSymMatrix SparseSymMatrix::combine(double alpha, const SparseSymMatrix &a,
                                         double beta, const SparseSymMatrix &b) {
  if (!a.same_pattern(b))
    throw std::invalid_argument("combine needs matrices on the same pattern");
  SparseSymMatrix out = a;
  for (std::size_t k = 0; k < out.values_.size(); ++k)
    out.values_[k] = alpha * a.values_[k] + beta * b.values_[k];
  return out;
}

void SparseSymMatrix::write_coordinates(std::ostream &out) const {
  for (int i = 0; i < n_; ++i)
    for (int k = row_starts_[i]; k < row_starts_[i + 1]; ++k)
      fmt::print(out, "{} {} {:.17g}\n", i, col_indices_[k], values_[k]);
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

} // namespace hypwave
