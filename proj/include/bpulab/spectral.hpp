#pragma once

// Periodic trapezoidal quadrature and trigonometric (Fourier) interpolation
// on uniform grids phi_i = 2*pi*i/N.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace bpulab::spectral {

using cplx = std::complex<double>;

/// Uniform periodic nodes on [0, 2*pi) with equal weights 2*pi/N.
class QuadratureGrid {
 public:
  explicit QuadratureGrid(std::size_t n);

  std::size_t size() const { return n_; }
  double node(std::size_t i) const;
  double weight() const;

  double integrate(std::span<const double> samples) const;
  cplx integrate(std::span<const cplx> samples) const;

 private:
  std::size_t n_;
};

/// Signed wavenumber of DFT slot `index` on an n-point grid (Nyquist reported as +n/2).
int wavenumber(std::size_t index, std::size_t n);

/// Coefficients c_m with x_j = sum_m c_m exp(i m phi_j), stored in DFT slot order.
std::vector<cplx> fourier_coefficients(std::span<const cplx> samples);
std::vector<cplx> from_fourier_coefficients(std::span<const cplx> coeffs);

/// Spectral derivative of a periodic sample vector. The Nyquist mode is dropped for odd orders.
std::vector<cplx> derivative(std::span<const cplx> samples, int order = 1);
std::vector<double> derivative(std::span<const double> samples, int order = 1);

/// Decomposition of the running integral: int_0^phi x = mean * phi + periodic(phi),
/// with periodic(0) = 0.
struct Antiderivative {
  cplx mean;
  std::vector<cplx> periodic;
};
Antiderivative antiderivative(std::span<const cplx> samples);

/// Largest Fourier magnitude in the upper half of the resolved band, relative to the largest
/// magnitude overall. Small for smooth periodic data, O(1/N) for a curve with a jump.
double spectral_tail(std::span<const cplx> samples);

/// Band-limited interpolant through periodic samples, evaluable with derivatives anywhere.
class TrigInterpolant {
 public:
  TrigInterpolant() = default;
  explicit TrigInterpolant(std::span<const cplx> samples);
  explicit TrigInterpolant(std::span<const double> samples);

  /// Number of retained (non-negligible) Fourier modes.
  std::size_t modes() const { return wavenumbers_.size(); }
  cplx operator()(double phi, int order = 0) const;
  double real(double phi, int order = 0) const { return (*this)(phi, order).real(); }

  /// Value and first two derivatives in one pass.
  std::array<cplx, 3> jet(double phi) const;

 private:
  void build(std::vector<cplx> coeffs);

  // Modes below 1e-17 of the peak are dropped; the Nyquist mode (if any) is kept as a cosine.
  std::vector<int> wavenumbers_;
  std::vector<cplx> coeffs_;
  bool has_nyquist_ = false;
  int nyquist_m_ = 0;
  cplx nyquist_c_{0.0, 0.0};
};

std::vector<cplx> to_complex(std::span<const double> samples);

}  // namespace bpulab::spectral
