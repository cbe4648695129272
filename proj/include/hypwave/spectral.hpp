/**
 * @file spectral.hpp
 * @brief Power spectra of probe signals and eigenfunctions from Fourier fields.
 */
#pragma once

#include "hypwave/sparse.hpp"
#include "hypwave/timestepper.hpp"

#include <span>
#include <vector>

namespace hypwave {

struct Spectrum {
  long n = 0;
  double dt = 0.0;
  std::vector<double> power; // |Psi_j|^2, j = 0..n-1

  /// 2 pi j / (n dt)
  double q_of_bin(double j) const;
  double bin_width() const { return q_of_bin(1.0); }
};

/// Exact-length DFT Psi_j = sum_k s_k e^{-2 pi i jk/n}, no padding.
/// std::invalid_argument for fewer than two samples or dt <= 0.
Spectrum dft_power(std::span<const double> signal, double dt);

struct Peak {
  double q = 0.0;
  double power = 0.0;
  double uncertainty = 0.0; // half a bin
  long bin = 0;
};

/// Local maxima over j in [1, n/2] by descending power; a peak suppresses
/// weaker ones within min_separation in q. With `refine`, q comes from a
/// parabola through the three bins around the maximum.
std::vector<Peak> find_peaks(const Spectrum &spec, int count,
                             double min_separation, bool refine = false);

struct Eigenfunction {
  std::vector<double> field; // dofs, field^T M field = 1
  double norm = 0.0;         // Psi^* M Psi before normalization
};

/// Real part of Psi_omega after removing its dominant global phase.
/// std::invalid_argument if omega was not accumulated, NumericalError for a
/// zero field.
Eigenfunction extract_eigenfunction(const FourierAccumulator &acc,
                                    const SparseSymMatrix &mass, double omega);

} // namespace hypwave
