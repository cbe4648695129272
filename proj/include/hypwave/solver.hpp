#pragma once

#include "hypwave/error.hpp"
#include "hypwave/sparse.hpp"

#include <span>
#include <vector>

namespace hypwave {

/// Zero fill-in incomplete Cholesky factor L (A ~ L L^T) stored on the lower
/// pattern of A.
struct IcFactor {
  SparseSymMatrix lower; // values are L, not a symmetric matrix
  double shift = 0.0;    // diagonal shift that made the factorization succeed

  /// Solves L L^T z = r.
  void apply(std::span<const double> r, std::span<double> z) const;
};

/// IC(0). On a nonpositive pivot the factorization restarts on A + alpha I
/// with alpha = 1e-3 max|diag| doubling; NumericalError after 20 doublings.
IcFactor ic0_factor(const SparseSymMatrix &a);

enum class PrecondKind { ic0, diagonal, none };

PrecondKind parse_precond(const std::string &name);

class Preconditioner {
public:
  Preconditioner(const SparseSymMatrix &a, PrecondKind kind);
  void apply(std::span<const double> r, std::span<double> z) const;
  PrecondKind kind() const { return kind_; }
  /// Diagonal shift used by IC(0), 0 otherwise.
  double shift() const { return ic_.shift; }

private:
  PrecondKind kind_;
  IcFactor ic_;
  std::vector<double> inv_diag_;
};

struct PcgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Raised when PCG exhausts maxiter.
class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string &what, double residual)
      : NumericalError(what), residual(residual) {}
  double residual;
};

inline constexpr double kDefaultCgTol = 1e-10;

/// 10 sqrt(n), at least 10.
int default_maxiter(int n);

/// Stops when ||b - A x||_2 <= tol ||b||_2.
PcgResult pcg_solve(const SparseSymMatrix &a, std::span<const double> b,
                    const Preconditioner &precond, std::span<const double> x0,
                    double tol = kDefaultCgTol, int maxiter = -1);
PcgResult pcg_solve(const SparseSymMatrix &a, std::span<const double> b,
                    PrecondKind precond, std::span<const double> x0,
                    double tol = kDefaultCgTol, int maxiter = -1);

struct EigenPair {
  double q = 0.0;          // sqrt of the eigenvalue
  double eigenvalue = 0.0; // q^2
  std::vector<double> mode; // M-normalized
};

inline constexpr int kDenseEigenCap = 3000;

/// Smallest `count` pairs of K v = q^2 M v by dense reduction. UsageError
/// above kDenseEigenCap dofs, NumericalError if M is not positive definite.
std::vector<EigenPair> dense_generalized_eigs(const SparseSymMatrix &k,
                                              const SparseSymMatrix &m,
                                              int count);

} // namespace hypwave
