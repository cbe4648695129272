#include "hypwave/spectral.hpp"

#include "hypwave/error.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hypwave {

namespace {

std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void *p) const { fftw_free(p); }
};

} // namespace

double Spectrum::q_of_bin(double j) const {
  return 2.0 * std::numbers::pi * j / (static_cast<double>(n) * dt);
}

Spectrum dft_power(std::span<const double> signal, double dt) {
  const long n = static_cast<long>(signal.size());
  if (n < 2)
    throw std::invalid_argument("dft_power needs at least two samples");
  if (!(dt > 0.0))
    throw std::invalid_argument("dft_power needs dt > 0");

  const long half = n / 2 + 1;
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(
      reinterpret_cast<fftw_complex *>(fftw_alloc_complex(half)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(),
                                FFTW_ESTIMATE);
  }
  if (!plan)
    throw NumericalError("FFTW could not create a plan");
  std::copy(signal.begin(), signal.end(), in.get());
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.n = n;
  s.dt = dt;
  s.power.resize(n);
  for (long j = 0; j < half; ++j) {
    const double re = out.get()[j][0];
    const double im = out.get()[j][1];
    s.power[j] = re * re + im * im;
  }
  // Real input: Psi_{n-j} = conj(Psi_j).
  for (long j = half; j < n; ++j)
    s.power[j] = s.power[n - j];
  return s;
}

std::vector<Peak> find_peaks(const Spectrum &spec, int count,
                             double min_separation, bool refine) {
  if (count < 1)
    throw std::invalid_argument("find_peaks needs count >= 1");
  const long hi = spec.n / 2;
  const auto &p = spec.power;
  std::vector<long> maxima;
  for (long j = 1; j <= hi; ++j) {
    const double left = p[j - 1];
    const double right = j + 1 < spec.n ? p[j + 1] : 0.0;
    // j - 1 = 0 is the constant mode; compare only inside the search band.
    const bool ge_left = j == 1 || p[j] >= left;
    const bool gt_right = j == hi || p[j] > right;
    if (ge_left && gt_right && p[j] > 0.0)
      maxima.push_back(j);
  }
  std::stable_sort(maxima.begin(), maxima.end(),
                   [&](long a, long b) { return p[a] > p[b]; });

  std::vector<Peak> peaks;
  for (long j : maxima) {
    if (static_cast<int>(peaks.size()) == count)
      break;
    const double q = spec.q_of_bin(static_cast<double>(j));
    const bool suppressed =
        std::any_of(peaks.begin(), peaks.end(), [&](const Peak &pk) {
          return std::abs(spec.q_of_bin(static_cast<double>(pk.bin)) - q) <
                 min_separation;
        });
    if (suppressed)
      continue;
    Peak pk;
    pk.bin = j;
    pk.power = p[j];
    pk.q = q;
    pk.uncertainty = 0.5 * spec.bin_width();
    if (refine && j > 1 && j < hi) {
      const double a = p[j - 1], b = p[j], c = p[j + 1];
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0)
        pk.q = spec.q_of_bin(static_cast<double>(j) + 0.5 * (a - c) / denom);
    }
    peaks.push_back(pk);
  }
  return peaks;
}

Eigenfunction extract_eigenfunction(const FourierAccumulator &acc,
                                    const SparseSymMatrix &mass, double omega) {
  const int k = acc.find(omega);
  if (k < 0)
    throw std::invalid_argument(
        fmt::format("omega = {} was not accumulated", omega));
  const auto &psi = acc.fields[k];
  const int n = mass.size();
  if (static_cast<int>(psi.size()) != n)
    throw std::invalid_argument("Fourier field and mass matrix differ in size");

  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
  }
  const double mrr = mass.bilinear(re, re);
  const double mii = mass.bilinear(im, im);
  const double mri = mass.bilinear(re, im);

  Eigenfunction ef;
  ef.norm = mrr + mii;
  if (!(ef.norm > 0.0))
    throw NumericalError(
        fmt::format("Fourier field at omega = {} is zero", omega));

  // Rotate by e^{-i theta} so that the real part carries the largest M-norm:
  // maximize cos^2 mrr + 2 sin cos mri + sin^2 mii.
  const double theta = 0.5 * std::atan2(2.0 * mri, mrr - mii);
  const double c = std::cos(theta), s = std::sin(theta);
  ef.field.resize(n);
  for (int i = 0; i < n; ++i)
    ef.field[i] = c * re[i] + s * im[i];
  const double scale = 1.0 / std::sqrt(mass.bilinear(ef.field, ef.field));
  for (double &v : ef.field)
    v *= scale;
  return ef;
}

} // namespace hypwave
