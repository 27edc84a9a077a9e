#pragma once

// Level-k Hardy spaces H(X)_k, realized as homogeneous degree-k polynomials
// restricted to S^3. Such a function transforms as F(e^{i theta} x) = e^{i k theta} F(x).
//
// Vectors are stored against the orthonormal monomials e_a = s_a / |s_a|, where
// s_a = z0^a z1^(k-a) and |s_a|^2 = pi a! (k-a)! / (k+1)! under dens_X.

#include <complex>
#include <span>
#include <vector>

#include "bpulab/geometry.hpp"

namespace bpulab::hardy {

using cplx = std::complex<double>;
using geometry::C2;

class SectionBasis {
 public:
  explicit SectionBasis(int k);

  int level() const { return k_; }
  int dimension() const { return k_ + 1; }
  /// log |s_a|^2 for a = 0..k.
  std::span<const double> log_norms() const { return log_norms_; }
  double log_norm(int a) const { return log_norms_[a]; }

  /// Values e_a(x) of all orthonormal monomials at a point of C^2.
  std::vector<cplx> evaluate_all(const C2& x) const;

  /// x0^i x1^j / |s_a| with 0^0 = 1, evaluated in the log domain.
  cplx scaled_monomial(int i, int j, int a, const C2& x) const;

 private:
  int k_;
  std::vector<double> log_norms_;
};

/// Element of H(X)_k; coefficients against the orthonormal monomials.
struct SectionVector {
  int k = 0;
  std::vector<cplx> coefficients;

  static SectionVector zero(int k);

  double norm2() const;
  double max_abs() const;
  SectionVector& operator+=(const SectionVector& o);
  SectionVector& operator*=(cplx s);
};

SectionVector operator+(SectionVector a, const SectionVector& b);
SectionVector operator-(SectionVector a, const SectionVector& b);
SectionVector operator*(cplx s, SectionVector a);

/// <u, v> = sum u_a conj(v_a): linear in the first slot.
cplx inner(const SectionVector& u, const SectionVector& v);

/// Value of the equivariant function of v at x.
cplx eval_section(const SectionBasis& basis, const SectionVector& v, const geometry::BundlePoint& x);
cplx eval_section(const SectionBasis& basis, const SectionVector& v, const C2& x);

/// Derivative of the equivariant function along a vector w tangent to S^3 at x.
cplx directional_derivative(const SectionBasis& basis, const SectionVector& v, const C2& x, const C2& w);

/// Holomorphic derivatives d e_a(x)[w] for all a (w need not be tangent).
std::vector<cplx> derivative_all(const SectionBasis& basis, const C2& x, const C2& w);

}  // namespace bpulab::hardy
