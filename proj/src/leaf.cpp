#include "bpulab/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bpulab/errors.hpp"

namespace bpulab::leaf {

namespace {

const std::complex<double> kI{0.0, 1.0};

void require_loop(const LoopHandle& a, const LoopHandle& b, const char* what) {
  if (!a || a != b) throw ContractViolation(std::string(what) + ": objects live on different loops");
}

void require_size(std::size_t got, const geometry::LagrangianLoop& loop, const char* what) {
  if (got != loop.size()) throw ContractViolation(std::string(what) + ": sample count does not match the loop");
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

HalfWeight::HalfWeight(LoopHandle loop, std::vector<double> samples) : loop_(std::move(loop)), s_(std::move(samples)) {
  if (!loop_) throw ContractViolation("HalfWeight: null loop");
  require_size(s_.size(), *loop_, "HalfWeight");
}

HalfWeight HalfWeight::normalized(LoopHandle loop, std::vector<double> raw) {
  HalfWeight h(std::move(loop), std::move(raw));
  const double m = h.mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("HalfWeight: samples have zero mass");
  const double s = 1.0 / std::sqrt(m);
  for (double& v : h.s_) v *= s;
  return h;
}

HalfWeight HalfWeight::constant(LoopHandle loop) {
  if (!loop) throw ContractViolation("HalfWeight: null loop");
  const std::size_t n = loop->size();
  return normalized(std::move(loop), std::vector<double>(n, 1.0));
}

double HalfWeight::mass() const {
  std::vector<double> sq(s_.size());
  for (std::size_t i = 0; i < s_.size(); ++i) sq[i] = s_[i] * s_[i];
  return integrate_on_loop(*loop_, sq);
}

double HalfWeight::min_abs() const {
  double m = std::abs(s_.front());
  for (double v : s_) m = std::min(m, std::abs(v));
  return m;
}

LeafTangent LeafTangent::zero(const LoopHandle& loop) {
  if (!loop) throw ContractViolation("LeafTangent: null loop");
  return LeafTangent{loop, std::vector<double>(loop->size(), 0.0), std::vector<double>(loop->size(), 0.0), true};
}

LeafTangent operator+(const LeafTangent& a, const LeafTangent& b) {
  require_loop(a.loop, b.loop, "LeafTangent +");
  LeafTangent out = a;
  for (std::size_t i = 0; i < out.f.size(); ++i) {
    out.f[i] += b.f[i];
    out.s_l[i] += b.s_l[i];
  }
  out.constrained = a.constrained && b.constrained;
  return out;
}

LeafTangent operator*(double s, const LeafTangent& a) {
  LeafTangent out = a;
  for (double& v : out.f) v *= s;
  for (double& v : out.s_l) v *= s;
  return out;
}

double integrate_on_loop(const geometry::LagrangianLoop& loop, std::span<const double> h) {
  require_size(h.size(), loop, "integrate_on_loop");
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * loop.length_density(i);
  return s * loop.weight();
}

std::pair<double, double> constraint_defects(const LeafTangent& w, const HalfWeight& lambda) {
  require_loop(w.loop, lambda.loop(), "constraint_defects");
  const std::size_t n = w.f.size();
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = w.f[i] * lambda[i] * lambda[i];
    b[i] = w.s_l[i] * lambda[i];
  }
  return {integrate_on_loop(*w.loop, a), integrate_on_loop(*w.loop, b)};
}

LeafTangent project_constraints(std::vector<double> f, std::vector<double> s_l, const HalfWeight& lambda) {
  const auto& loop = lambda.loop();
  require_size(f.size(), *loop, "project_constraints");
  require_size(s_l.size(), *loop, "project_constraints");
  if (std::abs(lambda.mass() - 1.0) > 1e-10) throw ContractViolation("project_constraints: half-weight not normalized");
  LeafTangent w{loop, std::move(f), std::move(s_l), false};
  const auto [df, dl] = constraint_defects(w, lambda);
  for (std::size_t i = 0; i < w.f.size(); ++i) {
    w.f[i] -= df;
    w.s_l[i] -= dl * lambda[i];
  }
  w.constrained = true;
  return w;
}

double omega(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda) {
  require_loop(w.loop, wp.loop, "omega");
  require_loop(w.loop, lambda.loop(), "omega");
  std::vector<double> h(w.f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = (w.f[i] * wp.s_l[i] - wp.f[i] * w.s_l[i]) * lambda[i];
  return 2.0 * integrate_on_loop(*w.loop, h);
}

double metric_g(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda) {
  require_loop(w.loop, wp.loop, "metric_g");
  require_loop(w.loop, lambda.loop(), "metric_g");
  std::vector<double> h(w.f.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = w.f[i] * wp.f[i] * lambda[i] * lambda[i] + w.s_l[i] * wp.s_l[i];
  return 2.0 * integrate_on_loop(*w.loop, h);
}

LeafTangent j_map(const LeafTangent& w, const HalfWeight& lambda) {
  require_loop(w.loop, lambda.loop(), "j_map");
  if (!lambda.nowhere_vanishing()) throw VanishingHalfWeightError("j_map: half-weight vanishes on the loop");
  LeafTangent out{w.loop, std::vector<double>(w.f.size()), std::vector<double>(w.f.size()), w.constrained};
  for (std::size_t i = 0; i < w.f.size(); ++i) {
    out.f[i] = -w.s_l[i] / lambda[i];
    out.s_l[i] = w.f[i] * lambda[i];
  }
  return out;
}

WeightedTangent psi_pushforward(const LeafTangent& w, const HalfWeight& lambda) {
  require_loop(w.loop, lambda.loop(), "psi_pushforward");
  WeightedTangent v{w.loop, w.f, std::vector<double>(w.f.size())};
  for (std::size_t i = 0; i < w.f.size(); ++i)
    v.phi_density[i] = 2.0 * w.s_l[i] * lambda[i] * w.loop->length_density(i);
  return v;
}

double omega_weinstein(const WeightedTangent& v, const WeightedTangent& vp) {
  require_loop(v.loop, vp.loop, "omega_weinstein");
  std::vector<double> h(v.f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = v.f[i] * vp.phi_density[i] - vp.f[i] * v.phi_density[i];
  return v.loop->grid().integrate(h);
}

std::vector<double> hamiltonian_normal_components(const geometry::LagrangianLoop& loop, std::span<const double> f) {
  require_size(f.size(), loop, "hamiltonian_normal_components");
  const auto df = spectral::derivative(f);
  std::vector<double> a(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = loop.length_density(i);
    if (d <= 1e-12) throw ContractViolation("hamiltonian_normal_components: degenerate tangent");
    a[i] = -0.5 * df[i] / d;
  }
  return a;
}

NormalFlow::NormalFlow(LoopHandle loop, std::span<const double> f) : loop_(std::move(loop)) {
  if (!loop_) throw ContractViolation("NormalFlow: null loop");
  require_size(f.size(), *loop_, "NormalFlow");
  f_ = spectral::TrigInterpolant(f);
}

C2 NormalFlow::velocity(const C2& x, double& phi_guess) const {
  const geometry::Vec3 n = geometry::bloch(x);
  double phi = 0.0;
  try {
    phi = loop_->normal_projection(n, phi_guess);
  } catch (const ContractViolation&) {
    throw StepTooLargeError("NormalFlow: trajectory left the normal tube of the loop");
  }
  phi_guess = phi;
  geometry::Vec3 p, v, pp;
  loop_->bloch_jet(phi, p, v, pp);
  const std::complex<double> w(v(0), -v(1));
  // Euclidean gradient of x -> n(x).v, then grad beta by the implicit function theorem.
  const C2 grad_g(2.0 * x(1) * w + 2.0 * v(2) * x(0), 2.0 * x(0) * std::conj(w) - 2.0 * v(2) * x(1));
  const double denom = n.dot(pp);
  const auto fj = f_.jet(phi);
  const double F = fj[0].real();
  const C2 grad_f = (-fj[1].real() / denom) * grad_g;
  const C2 h = geometry::horizontal_part(x, grad_f);
  return -0.5 * kI * h - F * kI * x;
}

std::vector<C2> NormalFlow::flow(std::span<const C2> start, std::span<const double> phi_start, double t,
                                 double max_step) const {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / max_step)));
  const double h = t / steps;
  std::vector<C2> out(start.begin(), start.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double guess = phi_start[i];
    C2 x = out[i];
    for (int s = 0; s < steps; ++s) {
      double g = guess;
      const C2 k1 = velocity(x, g);
      guess = g;
      const C2 k2 = velocity(C2(x + 0.5 * h * k1), g);
      const C2 k3 = velocity(C2(x + 0.5 * h * k2), g);
      const C2 k4 = velocity(C2(x + h * k3), g);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      x /= x.norm();
    }
    out[i] = x;
  }
  return out;
}

std::vector<C2> NormalFlow::flow_loop(double t, double max_step) const {
  std::vector<double> phi(loop_->size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = loop_->grid().node(i);
  return flow(loop_->reps(), phi, t, max_step);
}

namespace {

std::vector<double> half_density_ratio(const geometry::LagrangianLoop& base, const NormalFlow& flow, double t) {
  const geometry::LagrangianLoop moved(flow.flow_loop(t));
  std::vector<double> g(base.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sqrt(moved.length_density(i) / base.length_density(i));
  return g;
}

}  // namespace

std::vector<double> gamma_flow(const LoopHandle& loop, std::span<const double> f, double t, double tol) {
  if (!loop) throw ContractViolation("gamma_flow: null loop");
  geometry::normal_frame(*loop);  // rejects stalled parametrizations
  const NormalFlow flow(loop, f);
  const std::size_t n = loop->size();
  auto central = [&](double h) {
    const auto gp = half_density_ratio(*loop, flow, h);
    const auto gm = half_density_ratio(*loop, flow, -h);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (gp[i] - gm[i]) / (2.0 * h);
    return d;
  };
  // Richardson values from the pairs (t, t/2) and (t/2, t/4) must agree.
  const auto d1 = central(t);
  const auto d2 = central(0.5 * t);
  const auto d4 = central(0.25 * t);
  std::vector<double> out(n);
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double coarse = (4.0 * d2[i] - d1[i]) / 3.0;
    out[i] = (4.0 * d4[i] - d2[i]) / 3.0;
    diff = std::max(diff, std::abs(coarse - out[i]));
  }
  // Below ~1e-3 |f| the differences are at the roundoff floor of the flowed length densities.
  if (diff > tol * std::max(max_abs(out), 1e-3 * std::max(1.0, max_abs(f))))
    throw IntegrationError("gamma_flow: step-halving estimates disagree");
  return out;
}

double tube_half_width(const geometry::LagrangianLoop& loop) {
  double kmax = 0.0;
  geometry::Vec3 p, dp, ddp;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    loop.bloch_jet(loop.grid().node(i), p, dp, ddp);
    const double speed2 = dp.squaredNorm();
    if (speed2 <= 0.0) throw ContractViolation("tube_half_width: degenerate tangent");
    const geometry::Vec3 nu = p.cross(dp).normalized();
    kmax = std::max(kmax, std::abs(ddp.dot(nu)) / speed2);
  }
  // Focal distance on the unit Bloch sphere is atan(1/kappa); FS distances are half of it.
  const double focal = 0.5 * std::atan2(1.0, kmax);
  return 0.25 * focal;
}

FlowPathPoint flow_path(const geometry::PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                        double t) {
  const LoopHandle& loop = lambda.loop();
  require_loop(lift.base, loop, "flow_path");
  require_loop(w.loop, loop, "flow_path");
  const std::size_t n = loop->size();

  const NormalFlow flow(loop, w.f);
  auto moved = flow.flow_loop(t);
  double disp = 0.0;
  for (const C2& y : moved) disp = std::max(disp, loop->distance_to(y));
  if (disp > tube_half_width(*loop)) throw StepTooLargeError("flow_path: deformation leaves the tubular neighbourhood");

  auto loop_t = std::make_shared<const geometry::LagrangianLoop>(std::move(moved));

  // beta_t: L_t -> L by normal projection; B(phi) - phi is periodic.
  std::vector<double> offset(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = loop->grid().node(i);
    b[i] = loop->normal_projection(geometry::bloch(loop_t->rep(i)), phi);
    offset[i] = b[i] - phi;
  }
  const auto doffset = spectral::derivative(std::span<const double>(offset));
  std::vector<double> eta(n);
  for (std::size_t i = 0; i < n; ++i) eta[i] = lambda[i] + t * w.s_l[i];
  const spectral::TrigInterpolant eta_i{std::span<const double>(eta)};
  const spectral::TrigInterpolant dens_i(loop->length_densities());
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double jac = 1.0 + doffset[i];
    s[i] = eta_i.real(b[i]) * std::sqrt(dens_i.real(b[i]) * jac / loop_t->length_density(i));
  }

  geometry::PlanckianLift lift_t;
  lift_t.base = loop_t;
  lift_t.winding = lift.winding;
  lift_t.holonomy = geometry::holonomy(*loop_t).phase;
  lift_t.points.resize(lift.points.size());
  lift_t.tangents.resize(lift.points.size());
  for (std::size_t i = 0; i < lift.points.size(); ++i) {
    // The flow commutes with the circle action, so the flowed lift is u_i * (flowed rep).
    const std::complex<double> u = geometry::hermitian(loop->rep(i % n), lift.points[i]);
    lift_t.points[i] = u * loop_t->rep(i % n);
    lift_t.tangents[i] = u * loop_t->tangent(i % n);
  }
  lift_t.closure_residual = std::abs(std::pow(lift_t.holonomy, lift.winding) - 1.0);

  return FlowPathPoint{loop_t, HalfWeight(loop_t, std::move(s)), std::move(lift_t), disp};
}

}  // namespace bpulab::leaf
