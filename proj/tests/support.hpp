#pragma once

// Deterministic generators shared by the property tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bpulab/geometry.hpp"

namespace testsupport {

using cplx = std::complex<double>;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() { return std::sqrt(-2.0 * std::log1p(-uniform())) * std::cos(2.0 * std::numbers::pi * uniform()); }
  cplx complex_normal() { return {normal(), normal()}; }

  bpulab::geometry::C2 unit_c2() {
    bpulab::geometry::C2 v(complex_normal(), complex_normal());
    return v / v.norm();
  }

 private:
  std::mt19937_64 eng_;
};

/// Random smooth polar-angle profile around theta0 with a few low Fourier modes.
inline std::vector<double> random_polar_profile(Rng& rng, std::size_t n, double theta0, double amp) {
  std::vector<double> out(n, theta0);
  const int modes = rng.integer(1, 4);
  for (int m = 1; m <= modes; ++m) {
    const double a = rng.uniform(-amp, amp) / m;
    const double b = rng.uniform(-amp, amp) / m;
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
      out[i] += a * std::cos(m * phi) + b * std::sin(m * phi);
    }
  }
  return out;
}

/// Gauss-Legendre nodes and weights on [a, b].
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = 0.5 * (b - a) * t + 0.5 * (b + a);
    w[i] = (b - a) / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace testsupport
