#include "bpulab/hardy.hpp"

#include <cmath>
#include <numbers>

#include "bpulab/errors.hpp"

namespace bpulab::hardy {

namespace {

// x^e in polar form: returns false when the result is exactly zero.
bool log_power(cplx x, int e, double& log_mod, double& arg) {
  if (e == 0) return true;
  const double m = std::abs(x);
  if (m == 0.0) return false;
  log_mod += e * std::log(m);
  arg += e * std::arg(x);
  return true;
}

void check_level(const SectionBasis& basis, const SectionVector& v) {
  if (basis.level() != v.k || static_cast<int>(v.coefficients.size()) != v.k + 1)
    throw ContractViolation("hardy: section level does not match basis");
}

}  // namespace

SectionBasis::SectionBasis(int k) : k_(k) {
  if (k <= 0) throw DomainError("SectionBasis: level must be positive");
  log_norms_.resize(k + 1);
  // |s_0|^2 = pi / (k+1); |s_{a+1}|^2 / |s_a|^2 = (a+1) / (k-a).
  log_norms_[0] = std::log(std::numbers::pi) - std::log(k + 1.0);
  for (int a = 0; a < k; ++a) log_norms_[a + 1] = log_norms_[a] + std::log((a + 1.0) / (k - a));
}

cplx SectionBasis::scaled_monomial(int i, int j, int a, const C2& x) const {
  double lm = -0.5 * log_norms_[a];
  double arg = 0.0;
  if (!log_power(x(0), i, lm, arg) || !log_power(x(1), j, lm, arg)) return 0.0;
  return std::polar(std::exp(lm), arg);
}

std::vector<cplx> SectionBasis::evaluate_all(const C2& x) const {
  std::vector<cplx> out(k_ + 1);
  const double m0 = std::abs(x(0));
  const double m1 = std::abs(x(1));
  if (m0 == 0.0 || m1 == 0.0) {
    for (int a = 0; a <= k_; ++a) out[a] = scaled_monomial(a, k_ - a, a, x);
    return out;
  }
  const double l0 = std::log(m0), l1 = std::log(m1);
  const double t0 = std::arg(x(0)), t1 = std::arg(x(1));
  for (int a = 0; a <= k_; ++a) {
    const double lm = a * l0 + (k_ - a) * l1 - 0.5 * log_norms_[a];
    out[a] = std::polar(std::exp(lm), a * t0 + (k_ - a) * t1);
  }
  return out;
}

SectionVector SectionVector::zero(int k) {
  if (k <= 0) throw DomainError("SectionVector: level must be positive");
  return SectionVector{k, std::vector<cplx>(k + 1, 0.0)};
}

double SectionVector::norm2() const {
  double s = 0.0;
  for (const cplx& c : coefficients) s += std::norm(c);
  return s;
}

double SectionVector::max_abs() const {
  double m = 0.0;
  for (const cplx& c : coefficients) m = std::max(m, std::abs(c));
  return m;
}

SectionVector& SectionVector::operator+=(const SectionVector& o) {
  if (o.k != k || o.coefficients.size() != coefficients.size())
    throw ContractViolation("SectionVector: level mismatch");
  for (std::size_t i = 0; i < coefficients.size(); ++i) coefficients[i] += o.coefficients[i];
  return *this;
}

SectionVector& SectionVector::operator*=(cplx s) {
  for (cplx& c : coefficients) c *= s;
  return *this;
}

SectionVector operator+(SectionVector a, const SectionVector& b) { return a += b; }
SectionVector operator-(SectionVector a, const SectionVector& b) { return a += cplx{-1.0, 0.0} * b; }
SectionVector operator*(cplx s, SectionVector a) { return a *= s; }

cplx inner(const SectionVector& u, const SectionVector& v) {
  if (u.k != v.k || u.coefficients.size() != v.coefficients.size())
    throw ContractViolation("inner: level mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < u.coefficients.size(); ++i) s += u.coefficients[i] * std::conj(v.coefficients[i]);
  return s;
}

cplx eval_section(const SectionBasis& basis, const SectionVector& v, const C2& x) {
  check_level(basis, v);
  const auto e = basis.evaluate_all(x);
  cplx s{0.0, 0.0};
  for (std::size_t a = 0; a < e.size(); ++a) s += v.coefficients[a] * e[a];
  return s;
}

cplx eval_section(const SectionBasis& basis, const SectionVector& v, const geometry::BundlePoint& x) {
  return eval_section(basis, v, x.x);
}

std::vector<cplx> derivative_all(const SectionBasis& basis, const C2& x, const C2& w) {
  const int k = basis.level();
  std::vector<cplx> out(k + 1);
  for (int a = 0; a <= k; ++a) {
    cplx d{0.0, 0.0};
    if (a > 0) d += static_cast<double>(a) * w(0) * basis.scaled_monomial(a - 1, k - a, a, x);
    if (a < k) d += static_cast<double>(k - a) * w(1) * basis.scaled_monomial(a, k - a - 1, a, x);
    out[a] = d;
  }
  return out;
}

cplx directional_derivative(const SectionBasis& basis, const SectionVector& v, const C2& x, const C2& w) {
  check_level(basis, v);
  if (std::abs(geometry::hermitian(x, w).real()) > 1e-10 * (1.0 + w.norm()))
    throw ContractViolation("directional_derivative: vector is not tangent to the sphere");
  const auto d = derivative_all(basis, x, w);
  cplx s{0.0, 0.0};
  for (std::size_t a = 0; a < d.size(); ++a) s += v.coefficients[a] * d[a];
  return s;
}

}  // namespace bpulab::hardy
