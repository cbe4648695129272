#include "hypwave/solver.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

namespace hypwave {

namespace {

// IC(0) with a diagonal shift; nullopt on a nonpositive pivot.
std::optional<SparseSymMatrix> try_ic0(const SparseSymMatrix &a, double shift) {
  SparseSymMatrix l = a;
  const auto &starts = l.row_starts();
  const auto &cols = l.col_indices();
  auto &vals = l.values();
  const int n = l.size();
  for (int i = 0; i < n; ++i) {
    const int begin = starts[i];
    const int end = starts[i + 1];
    if (end == begin || cols[end - 1] != i)
      return std::nullopt; // no diagonal entry
    for (int p = begin; p < end - 1; ++p) {
      const int k = cols[p];
      // L_ik = (A_ik - sum_{j<k} L_ij L_kj) / L_kk over the shared pattern.
      double s = vals[p];
      int q = begin;
      int r = starts[k];
      const int r_end = starts[k + 1] - 1; // exclude L_kk
      while (q < p && r < r_end) {
        if (cols[q] == cols[r]) {
          s -= vals[q] * vals[r];
          ++q;
          ++r;
        } else if (cols[q] < cols[r]) {
          ++q;
        } else {
          ++r;
        }
      }
      vals[p] = s / vals[r_end];
    }
    double d = vals[end - 1] + shift;
    for (int p = begin; p < end - 1; ++p)
      d -= vals[p] * vals[p];
    if (!(d > 0.0))
      return std::nullopt;
    vals[end - 1] = std::sqrt(d);
  }
  return l;
}

} // namespace

void IcFactor::apply(std::span<const double> r, std::span<double> z) const {
  const auto &starts = lower.row_starts();
  const auto &cols = lower.col_indices();
  const auto &vals = lower.values();
  const int n = lower.size();
  // L y = r
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int p = starts[i]; p < starts[i + 1] - 1; ++p)
      s -= vals[p] * z[cols[p]];
    z[i] = s / vals[starts[i + 1] - 1];
  }
  // L^T z = y, column sweep over the rows of L.
  for (int i = n - 1; i >= 0; --i) {
    z[i] /= vals[starts[i + 1] - 1];
    const double zi = z[i];
    for (int p = starts[i]; p < starts[i + 1] - 1; ++p)
      z[cols[p]] -= vals[p] * zi;
  }
}

IcFactor ic0_factor(const SparseSymMatrix &a) {
  if (auto l = try_ic0(a, 0.0))
    return {std::move(*l), 0.0};
  double max_diag = 0.0;
  for (double d : a.diagonal_values())
    max_diag = std::max(max_diag, std::abs(d));
  double shift = 1e-3 * max_diag;
  for (int attempt = 0; attempt <= 20 && shift > 0.0; ++attempt, shift *= 2.0)
    if (auto l = try_ic0(a, shift))
      return {std::move(*l), shift};
  throw NumericalError(
      "incomplete Cholesky failed after 20 shift doublings; the matrix is not "
      "usable (check assembly)");
}

PrecondKind parse_precond(const std::string &name) {
  if (name == "ic0")
    return PrecondKind::ic0;
  if (name == "diagonal")
    return PrecondKind::diagonal;
  if (name == "none")
    return PrecondKind::none;
  throw UsageError("unknown preconditioner '" + name + "'");
}

Preconditioner::Preconditioner(const SparseSymMatrix &a, PrecondKind kind)
    : kind_(kind) {
  if (kind == PrecondKind::ic0) {
    ic_ = ic0_factor(a);
  } else if (kind == PrecondKind::diagonal) {
    inv_diag_ = a.diagonal_values();
    for (double &d : inv_diag_) {
      if (!(d > 0.0))
        throw NumericalError("diagonal preconditioner needs a positive diagonal");
      d = 1.0 / d;
    }
  }
}

void Preconditioner::apply(std::span<const double> r,
                           std::span<double> z) const {
  switch (kind_) {
  case PrecondKind::ic0:
    ic_.apply(r, z);
    return;
  case PrecondKind::diagonal:
    for (std::size_t i = 0; i < r.size(); ++i)
      z[i] = r[i] * inv_diag_[i];
    return;
  case PrecondKind::none:
    std::copy(r.begin(), r.end(), z.begin());
    return;
  }
}

int default_maxiter(int n) {
  return std::max(10, static_cast<int>(std::ceil(10.0 * std::sqrt(double(n)))));
}

PcgResult pcg_solve(const SparseSymMatrix &a, std::span<const double> b,
                    const Preconditioner &precond, std::span<const double> x0,
                    double tol, int maxiter) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("pcg_solve: dimension mismatch");
  if (!(tol > 0.0))
    throw std::invalid_argument("pcg_solve: tol must be positive");
  if (maxiter < 0)
    maxiter = default_maxiter(n);

  PcgResult res;
  res.x.assign(x0.begin(), x0.end());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(res.x, ap);
  for (int i = 0; i < n; ++i)
    r[i] = b[i] - ap[i];
  double rnorm = norm2(r);
  if (rnorm <= tol * bnorm) {
    res.relative_residual = rnorm / bnorm;
    return res;
  }
  precond.apply(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= maxiter; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw NumericalError(fmt::format(
          "PCG breakdown at iteration {}: matrix is not positive definite", it));
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rnorm = norm2(r);
    if (rnorm <= tol * bnorm) {
      res.iterations = it;
      res.relative_residual = rnorm / bnorm;
      return res;
    }
    precond.apply(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError(
      fmt::format("PCG did not converge in {} iterations (relative residual "
                  "{:.3e}, tol {:.1e})",
                  maxiter, rnorm / bnorm, tol),
      rnorm / bnorm);
}

PcgResult pcg_solve(const SparseSymMatrix &a, std::span<const double> b,
                    PrecondKind precond, std::span<const double> x0, double tol,
                    int maxiter) {
  return pcg_solve(a, b, Preconditioner(a, precond), x0, tol, maxiter);
}

namespace {

Eigen::MatrixXd densify(const SparseSymMatrix &a) {
  const int n = a.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const auto &starts = a.row_starts();
  const auto &cols = a.col_indices();
  const auto &vals = a.values();
  for (int i = 0; i < n; ++i)
    for (int p = starts[i]; p < starts[i + 1]; ++p) {
      d(i, cols[p]) = vals[p];
      d(cols[p], i) = vals[p];
    }
  return d;
}

} // namespace

std::vector<EigenPair> dense_generalized_eigs(const SparseSymMatrix &k,
                                              const SparseSymMatrix &m,
                                              int count) {
  const int n = k.size();
  if (m.size() != n)
    throw std::invalid_argument("K and M differ in dimension");
  if (n > kDenseEigenCap)
    throw UsageError(fmt::format(
        "{} dofs exceeds the dense eigensolver cap of {}", n, kDenseEigenCap));
  count = std::clamp(count, 0, n);

  const Eigen::MatrixXd kd = densify(k);
  const Eigen::MatrixXd md = densify(m);
  const Eigen::LLT<Eigen::MatrixXd> llt(md);
  if (llt.info() != Eigen::Success)
    throw NumericalError("mass matrix is not positive definite");

  // L^{-1} K L^{-T} y = lambda y, v = L^{-T} y.
  Eigen::MatrixXd c = llt.matrixL().solve(kd);
  c = llt.matrixL().solve(c.transpose()).eval();
  c = 0.5 * (c + c.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success)
    throw NumericalError("dense symmetric eigensolver failed");
  const Eigen::MatrixXd vecs =
      llt.matrixU().solve(es.eigenvectors().leftCols(count));

  std::vector<EigenPair> out(count);
  for (int j = 0; j < count; ++j) {
    const double lambda = es.eigenvalues()(j);
    out[j].eigenvalue = lambda;
    out[j].q = std::sqrt(std::max(lambda, 0.0));
    out[j].mode.assign(vecs.col(j).data(), vecs.col(j).data() + n);
  }
  return out;
}

} // namespace hypwave
