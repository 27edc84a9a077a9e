#include "bpulab/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bpulab/errors.hpp"

namespace bpulab::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx ipow(cplx base, int order) {
  cplx out{1.0, 0.0};
  for (int i = 0; i < order; ++i) out *= base;
  return out;
}

}  // namespace

QuadratureGrid::QuadratureGrid(std::size_t n) : n_(n) {
  if (n == 0) throw DomainError("QuadratureGrid: node count must be positive");
}

double QuadratureGrid::node(std::size_t i) const { return kTwoPi * static_cast<double>(i) / n_; }

double QuadratureGrid::weight() const { return kTwoPi / static_cast<double>(n_); }

double QuadratureGrid::integrate(std::span<const double> samples) const {
  if (samples.size() != n_) throw ContractViolation("QuadratureGrid: sample count mismatch");
  double s = 0.0;
  for (double v : samples) s += v;
  return s * weight();
}

cplx QuadratureGrid::integrate(std::span<const cplx> samples) const {
  if (samples.size() != n_) throw ContractViolation("QuadratureGrid: sample count mismatch");
  cplx s{0.0, 0.0};
  for (const cplx& v : samples) s += v;
  return s * weight();
}

int wavenumber(std::size_t index, std::size_t n) {
  const auto i = static_cast<long>(index);
  const auto nn = static_cast<long>(n);
  return static_cast<int>(2 * i <= nn ? i : i - nn);
}

std::vector<cplx> fourier_coefficients(std::span<const cplx> samples) {
  Eigen::FFT<double> fft;
  std::vector<cplx> in(samples.begin(), samples.end());
  std::vector<cplx> out;
  fft.fwd(out, in);
  const double scale = 1.0 / static_cast<double>(samples.size());
  for (cplx& c : out) c *= scale;
  return out;
}

std::vector<cplx> from_fourier_coefficients(std::span<const cplx> coeffs) {
  Eigen::FFT<double> fft;
  std::vector<cplx> in(coeffs.begin(), coeffs.end());
  std::vector<cplx> out;
  fft.inv(out, in);
  const double scale = static_cast<double>(coeffs.size());
  for (cplx& c : out) c *= scale;
  return out;
}

std::vector<cplx> derivative(std::span<const cplx> samples, int order) {
  const std::size_t n = samples.size();
  auto c = fourier_coefficients(samples);
  for (std::size_t j = 0; j < n; ++j) {
    const int m = wavenumber(j, n);
    const bool nyquist = (n % 2 == 0) && (2 * j == n);
    if (nyquist && order % 2 == 1) {
      c[j] = 0.0;
      continue;
    }
    c[j] *= ipow(cplx{0.0, static_cast<double>(m)}, order);
  }
  return from_fourier_coefficients(c);
}

std::vector<double> derivative(std::span<const double> samples, int order) {
  const auto z = to_complex(samples);
  const auto d = derivative(std::span<const cplx>(z), order);
  std::vector<double> out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [](const cplx& v) { return v.real(); });
  return out;
}

Antiderivative antiderivative(std::span<const cplx> samples) {
  const std::size_t n = samples.size();
  auto c = fourier_coefficients(samples);
  Antiderivative out;
  out.mean = c[0];
  c[0] = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const bool nyquist = (n % 2 == 0) && (2 * j == n);
    // The Nyquist mode integrates to a sine that vanishes on the grid.
    c[j] = nyquist ? cplx{0.0, 0.0} : c[j] / cplx{0.0, static_cast<double>(wavenumber(j, n))};
  }
  out.periodic = from_fourier_coefficients(c);
  const cplx offset = out.periodic[0];
  for (cplx& v : out.periodic) v -= offset;
  return out;
}

double spectral_tail(std::span<const cplx> samples) {
  const std::size_t n = samples.size();
  const auto c = fourier_coefficients(samples);
  double peak = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double mag = std::abs(c[j]);
    peak = std::max(peak, mag);
    if (4 * static_cast<std::size_t>(std::abs(wavenumber(j, n))) >= n) tail = std::max(tail, mag);
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

TrigInterpolant::TrigInterpolant(std::span<const cplx> samples) {
  build(fourier_coefficients(samples));
}

TrigInterpolant::TrigInterpolant(std::span<const double> samples) {
  const auto z = to_complex(samples);
  build(fourier_coefficients(std::span<const cplx>(z)));
}

void TrigInterpolant::build(std::vector<cplx> coeffs) {
  const std::size_t n = coeffs.size();
  double peak = 0.0;
  for (const cplx& c : coeffs) peak = std::max(peak, std::abs(c));
  const double cutoff = 1e-17 * peak;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(coeffs[j]) <= cutoff) continue;
    const int m = wavenumber(j, n);
    if (n % 2 == 0 && 2 * j == n) {
      has_nyquist_ = true;
      nyquist_m_ = m;
      nyquist_c_ = coeffs[j];
      continue;
    }
    wavenumbers_.push_back(m);
    coeffs_.push_back(coeffs[j]);
  }
}

cplx TrigInterpolant::operator()(double phi, int order) const {
  cplx sum{0.0, 0.0};
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    const double md = static_cast<double>(wavenumbers_[j]);
    sum += coeffs_[j] * ipow(cplx{0.0, md}, order) * std::polar(1.0, md * phi);
  }
  if (has_nyquist_) {
    // Symmetric split so that real data interpolates to a real function: c cos(m phi).
    const double md = static_cast<double>(nyquist_m_);
    sum += nyquist_c_ * std::pow(md, order) * std::cos(md * phi + 0.5 * std::numbers::pi * order);
  }
  return sum;
}

std::array<cplx, 3> TrigInterpolant::jet(double phi) const {
  std::array<cplx, 3> out{};
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    const double md = static_cast<double>(wavenumbers_[j]);
    const cplx term = coeffs_[j] * std::polar(1.0, md * phi);
    out[0] += term;
    out[1] += cplx{0.0, md} * term;
    out[2] -= md * md * term;
  }
  if (has_nyquist_) {
    const double md = static_cast<double>(nyquist_m_);
    out[0] += nyquist_c_ * std::cos(md * phi);
    out[1] -= nyquist_c_ * md * std::sin(md * phi);
    out[2] -= nyquist_c_ * md * md * std::cos(md * phi);
  }
  return out;
}

std::vector<cplx> to_complex(std::span<const double> samples) {
  return std::vector<cplx>(samples.begin(), samples.end());
}

}  // namespace bpulab::spectral
