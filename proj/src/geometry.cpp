#include "bpulab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bpulab/errors.hpp"

namespace bpulab::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kStallSpeed = 1e-12;

std::vector<cplx> component(std::span<const C2> reps, int j) {
  std::vector<cplx> out(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) out[i] = reps[i](j);
  return out;
}

}  // namespace

Vec3 bloch(const C2& x) {
  const cplx m = std::conj(x(0)) * x(1);
  return Vec3(2.0 * m.real(), 2.0 * m.imag(), std::norm(x(0)) - std::norm(x(1)));
}

Vec3 bloch_differential(const C2& x, const C2& w) {
  const cplx m = std::conj(w(0)) * x(1) + std::conj(x(0)) * w(1);
  const double d3 = 2.0 * (std::conj(x(0)) * w(0)).real() - 2.0 * (std::conj(x(1)) * w(1)).real();
  return Vec3(2.0 * m.real(), 2.0 * m.imag(), d3);
}

C2 horizontal_part(const C2& x, const C2& v) { return v - hermitian(x, v) * x; }

double fs_distance(const C2& a, const C2& b) {
  const double s = std::abs(hermitian(a, b)) / (a.norm() * b.norm());
  return std::acos(std::clamp(s, 0.0, 1.0));
}

C2 great_circle(const C2& x, const C2& w, double tau) {
  const double len = w.norm();
  if (len == 0.0) return x;
  return x * std::cos(tau * len) + (w / len) * std::sin(tau * len);
}

SpherePoint SpherePoint::canonical(cplx z0, cplx z1) {
  const double n = std::sqrt(std::norm(z0) + std::norm(z1));
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("SpherePoint: homogeneous coordinates vanish");
  const cplx lead = std::abs(z0) >= std::abs(z1) ? z0 : z1;
  const cplx phase = std::conj(lead) / std::abs(lead);
  SpherePoint p;
  p.z = C2(z0 * phase / n, z1 * phase / n);
  return p;
}

BundlePoint BundlePoint::from(cplx x0, cplx x1) {
  const double n2 = std::norm(x0) + std::norm(x1);
  if (std::abs(n2 - 1.0) > 1e-12) throw DomainError("BundlePoint: not on the unit sphere");
  return BundlePoint{C2(x0, x1)};
}

BundlePoint BundlePoint::rotated(double theta) const { return BundlePoint{std::polar(1.0, theta) * x}; }

LagrangianLoop::LagrangianLoop(std::vector<C2> representatives, std::optional<double> area_coordinate)
    : reps_(std::move(representatives)), grid_(std::max<std::size_t>(reps_.size(), 1)),
      area_coordinate_(area_coordinate) {
  const std::size_t n = reps_.size();
  if (n < 8 || n % 2 != 0) throw DomainError("LagrangianLoop: need an even number (>= 8) of samples");
  for (const C2& z : reps_) {
    if (!z.allFinite() || std::abs(z.squaredNorm() - 1.0) > 1e-10)
      throw DomainError("LagrangianLoop: representatives must be unit vectors");
  }
  const auto z0 = component(reps_, 0);
  const auto z1 = component(reps_, 1);
  closure_residual_ = std::max(spectral::spectral_tail(z0), spectral::spectral_tail(z1));
  const auto d0 = spectral::derivative(std::span<const cplx>(z0));
  const auto d1 = spectral::derivative(std::span<const cplx>(z1));

  bloch_.resize(n);
  tangents_.resize(n);
  speed_.resize(n);
  connection_.resize(n);
  std::array<std::vector<double>, 3> axes;
  for (auto& a : axes) a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const C2& z = reps_[i];
    const C2 dz(d0[i], d1[i]);
    connection_[i] = hermitian(z, dz).imag();
    const C2 h = horizontal_part(z, dz);
    speed_[i] = h.norm();
    tangents_[i] = speed_[i] > kStallSpeed ? C2(h / speed_[i]) : C2::Zero();
    bloch_[i] = geometry::bloch(z);
    for (int a = 0; a < 3; ++a) axes[a][i] = bloch_[i](a);
  }
  for (int a = 0; a < 3; ++a) bloch_interp_[a] = spectral::TrigInterpolant(std::span<const double>(axes[a]));
}

double LagrangianLoop::length() const { return grid_.integrate(speed_); }

void LagrangianLoop::bloch_jet(double phi, Vec3& p, Vec3& dp, Vec3& ddp) const {
  for (int a = 0; a < 3; ++a) {
    const auto j = bloch_interp_[a].jet(phi);
    p(a) = j[0].real();
    dp(a) = j[1].real();
    ddp(a) = j[2].real();
  }
}

double LagrangianLoop::normal_projection(const Vec3& n, double guess) const {
  double phi = guess;
  Vec3 p, dp, ddp;
  for (int it = 0; it < 50; ++it) {
    bloch_jet(phi, p, dp, ddp);
    const double g = n.dot(dp);
    const double dg = n.dot(ddp);
    if (dg >= 0.0) throw ContractViolation("LagrangianLoop: point is not in the normal tube of the loop");
    const double step = g / dg;
    phi -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return phi;
}

double LagrangianLoop::distance_to(const C2& x) const {
  const Vec3 n = geometry::bloch(x / x.norm());
  std::size_t best = 0;
  for (std::size_t i = 1; i < size(); ++i)
    if (n.dot(bloch_[i]) > n.dot(bloch_[best])) best = i;
  double chord = (n - bloch_[best]).norm();
  try {
    const double phi = normal_projection(n, grid_.node(best));
    Vec3 p, dp, ddp;
    bloch_jet(phi, p, dp, ddp);
    chord = std::min(chord, (n - p.normalized()).norm());
  } catch (const ContractViolation&) {
    // Far from the loop: the nearest node is good enough.
  }
  // The Bloch angle is 2 asin(chord / 2); FS distances are half of it.
  return std::asin(std::clamp(0.5 * chord, 0.0, 1.0));
}

LoopHandle latitude_loop(double c, std::size_t n) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("latitude_loop: c must lie in (0, 1)");
  std::vector<C2> reps(n);
  const spectral::QuadratureGrid grid(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < n; ++i)
    reps[i] = C2(std::sqrt(c), std::sqrt(1.0 - c) * std::polar(1.0, grid.node(i)));
  return std::make_shared<const LagrangianLoop>(std::move(reps), c);
}

LoopHandle polar_graph_loop(std::span<const double> polar_angle) {
  const std::size_t n = polar_angle.size();
  const spectral::QuadratureGrid grid(std::max<std::size_t>(n, 1));
  std::vector<C2> reps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = polar_angle[i];
    if (!(t > 0.0 && t < std::numbers::pi)) throw DomainError("polar_graph_loop: polar angle outside (0, pi)");
    reps[i] = C2(std::cos(0.5 * t), std::sin(0.5 * t) * std::polar(1.0, grid.node(i)));
  }
  return std::make_shared<const LagrangianLoop>(std::move(reps));
}

Holonomy holonomy(const LagrangianLoop& loop, int r_max, double tol) {
  if (loop.closure_residual() > kClosureTolerance)
    throw ContractViolation("holonomy: loop samples do not close up smoothly");
  // Horizontal lift x = exp(i psi) z with psi' = -Im(z^H z'); holonomy is exp(i psi(2 pi)).
  const double mean = loop.grid().integrate(loop.connection()) / kTwoPi;
  Holonomy h;
  h.phase = std::polar(1.0, -kTwoPi * mean);
  for (int r = 1; r <= r_max; ++r) {
    if (std::abs(std::pow(h.phase, r) - 1.0) < tol) {
      h.order = r;
      break;
    }
  }
  return h;
}

double PlanckianLift::max_legendrian_defect() const {
  const auto x0 = component(points, 0);
  const auto x1 = component(points, 1);
  const auto d0 = spectral::derivative(std::span<const cplx>(x0));
  const auto d1 = spectral::derivative(std::span<const cplx>(x1));
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const C2 v(d0[i], d1[i]);
    const double len = v.norm();
    if (len > 0.0) worst = std::max(worst, std::abs(hermitian(points[i], v).imag()) / len);
  }
  return worst;
}

namespace {

// psi at the nodes of r circuits for psi' = -A, psi(0) = 0, by classical RK4 with step h.
std::vector<double> rk4_phase(const spectral::TrigInterpolant& a, std::size_t n, int r, int refine,
                              double& end_value) {
  const double h = kTwoPi / static_cast<double>(n * refine);
  std::vector<double> out(n * r);
  double psi = 0.0;
  const std::size_t steps = n * r * refine;
  for (std::size_t s = 0; s < steps; ++s) {
    if (s % refine == 0) out[s / refine] = psi;
    const double phi = h * static_cast<double>(s);
    const double k1 = -a.real(phi);
    const double k2 = -a.real(phi + 0.5 * h);
    const double k4 = -a.real(phi + h);
    psi += h * (k1 + 4.0 * k2 + k4) / 6.0;
  }
  end_value = psi;
  return out;
}

}  // namespace

PlanckianLift horizontal_lift(LoopHandle loop, const BundlePoint& start, LiftIntegrator integrator) {
  if (!loop) throw ContractViolation("horizontal_lift: null loop");
  const Holonomy hol = holonomy(*loop);
  if (!hol.order)
    throw BohrSommerfeldError("horizontal_lift: holonomy has no finite order up to " +
                              std::to_string(kMaxHolonomyOrder));
  const int r = *hol.order;
  const std::size_t n = loop->size();
  const cplx overlap = hermitian(loop->rep(0), start.x);
  if (std::abs(std::abs(overlap) - 1.0) > 1e-9)
    throw ContractViolation("horizontal_lift: start point does not lie over the loop");
  const cplx phase0 = overlap / std::abs(overlap);

  PlanckianLift lift;
  lift.base = loop;
  lift.winding = r;
  lift.holonomy = hol.phase;
  lift.points.resize(n * r);
  lift.tangents.resize(n * r);

  std::vector<double> psi(n * r);
  double psi_end = 0.0;
  if (integrator == LiftIntegrator::Spectral) {
    const auto conn = spectral::to_complex(loop->connection());
    const auto anti = spectral::antiderivative(std::span<const cplx>(conn));
    const double mean = anti.mean.real();
    for (int j = 0; j < r; ++j)
      for (std::size_t i = 0; i < n; ++i)
        psi[j * n + i] = -(mean * (loop->grid().node(i) + kTwoPi * j) + anti.periodic[i].real());
    psi_end = -mean * kTwoPi * r;
  } else {
    const spectral::TrigInterpolant a(loop->connection());
    double end_coarse = 0.0;
    const auto coarse = rk4_phase(a, n, r, 1, end_coarse);
    psi = rk4_phase(a, n, r, 2, psi_end);
    double err = std::abs(end_coarse - psi_end);
    for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(coarse[i] - psi[i]));
    if (err / 15.0 > kLiftClosureTolerance)
      throw IntegrationError("horizontal_lift: RK4 step-halving error above tolerance");
  }
  for (std::size_t i = 0; i < n * r; ++i) {
    const cplx u = phase0 * std::polar(1.0, psi[i]);
    lift.points[i] = u * loop->rep(i % n);
    lift.tangents[i] = u * loop->tangent(i % n);
  }
  lift.closure_residual = std::abs(std::polar(1.0, psi_end) - 1.0);
  if (lift.closure_residual > kLiftClosureTolerance)
    throw IntegrationError("horizontal_lift: lifted curve fails to close");
  return lift;
}

PlanckianLift horizontal_lift(LoopHandle loop) {
  if (!loop) throw ContractViolation("horizontal_lift: null loop");
  return horizontal_lift(loop, BundlePoint{loop->rep(0)});
}

std::vector<C2> normal_frame(const LagrangianLoop& loop) {
  std::vector<C2> out(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if (loop.length_density(i) <= kStallSpeed)
      throw ContractViolation("normal_frame: degenerate tangent at node " + std::to_string(i));
    out[i] = cplx{0.0, 1.0} * loop.tangent(i);
  }
  return out;
}

}  // namespace bpulab::geometry
