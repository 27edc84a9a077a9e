#include "bpulab/bpu.hpp"

#include <cmath>
#include <iostream>

#include "bpulab/asymptotics.hpp"
#include "bpulab/errors.hpp"

namespace bpulab::bpu {

namespace {

const cplx kI{0.0, 1.0};

// Below this <u, u> the BPU vector is treated as zero (outside U_k).
constexpr double kZeroNorm2 = 1e-24;

void require_same_loop(const PlanckianLift& lift, const HalfWeight& lambda) {
  if (!lift.base || lift.base != lambda.loop())
    throw ContractViolation("bpu: lift and half-weight live on different loops");
}

SectionVector to_section(int k, const Eigen::VectorXcd& c) {
  SectionVector v = SectionVector::zero(k);
  for (int a = 0; a <= k; ++a) v.coefficients[a] = c(a);
  return v;
}

}  // namespace

TestFunction conjugate_monomial(const hardy::SectionBasis& basis, int a) {
  if (a < 0 || a > basis.level()) throw ContractViolation("conjugate_monomial: index out of range");
  return TestFunction{
      [basis, a](const C2& x) { return std::conj(basis.evaluate_all(x)[a]); },
      [basis, a](const C2& x, const C2& v) { return std::conj(hardy::derivative_all(basis, x, v)[a]); }};
}

cplx delta_pair(const PlanckianLift& lift, const HalfWeight& lambda, const std::function<cplx(const C2&)>& gamma) {
  require_same_loop(lift, lambda);
  const auto& loop = *lift.base;
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < lift.points.size(); ++i) {
    const std::size_t j = lift.base_index(i);
    s += lambda[j] * loop.length_density(j) * gamma(lift.points[i]);
  }
  return s * loop.weight();
}

LevelTable::LevelTable(const PlanckianLift& lift, int k) : basis_(k), base_nodes_(lift.nodes_per_circuit()) {
  const std::size_t n = lift.points.size();
  dens_.resize(n);
  values_.resize(n, k + 1);
  normal_.resize(n, k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const C2& x = lift.points[i];
    const C2 nu = lift.normal(i);
    dens_(i) = lift.base->length_density(lift.base_index(i)) * lift.base->weight();
    const auto e = basis_.evaluate_all(x);
    const bool generic = std::abs(x(0)) > 1e-100 && std::abs(x(1)) > 1e-100;
    const auto d = generic ? std::vector<cplx>() : hardy::derivative_all(basis_, x, nu);
    const cplx r0 = generic ? nu(0) / x(0) : 0.0;
    const cplx r1 = generic ? nu(1) / x(1) : 0.0;
    for (int a = 0; a <= k; ++a) {
      values_(i, a) = e[a];
      // d e_a[v] = e_a * (a v0 / x0 + (k - a) v1 / x1) away from the coordinate axes.
      normal_(i, a) = generic ? e[a] * (static_cast<double>(a) * r0 + static_cast<double>(k - a) * r1) : d[a];
    }
  }
}

SectionVector LevelTable::pair_values(std::span<const double> h) const {
  if (h.size() != base_nodes_) throw ContractViolation("LevelTable: weight size mismatch");
  Eigen::VectorXcd v(values_.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = h[i % base_nodes_] * dens_(i);
  return to_section(level(), values_.adjoint() * v);
}

SectionVector LevelTable::pair_normal(std::span<const double> h) const {
  if (h.size() != base_nodes_) throw ContractViolation("LevelTable: weight size mismatch");
  Eigen::VectorXcd v(normal_.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = h[i % base_nodes_] * dens_(i);
  return to_section(level(), normal_.adjoint() * v);
}

BpuState bpu_map(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda) {
  require_same_loop(lift, lambda);
  return BpuState{table.level(), lift.winding, table.pair_values(lambda.samples())};
}

BpuState bpu_map(const PlanckianLift& lift, const HalfWeight& lambda, int k) {
  require_same_loop(lift, lambda);
  const hardy::SectionBasis basis(k);
  const auto& loop = *lift.base;
  SectionVector u = SectionVector::zero(k);
  for (std::size_t i = 0; i < lift.points.size(); ++i) {
    const std::size_t j = lift.base_index(i);
    const double h = lambda[j] * loop.length_density(j) * loop.weight();
    const auto e = basis.evaluate_all(lift.points[i]);
    for (int a = 0; a <= k; ++a) u.coefficients[a] += h * std::conj(e[a]);
  }
  return BpuState{k, lift.winding, std::move(u)};
}

cplx evaluate(const BpuState& state, const C2& x) {
  return hardy::eval_section(hardy::SectionBasis(state.k), state.u, x);
}

std::vector<ProfileRow> pointwise_profile(const BpuState& state, const geometry::LagrangianLoop& loop, const C2& x,
                                          const C2& dir, std::span<const double> w) {
  if (loop.distance_to(x) > 1e-8) throw ContractViolation("pointwise_profile: base point is not on the loop");
  if (std::abs(geometry::hermitian(x, dir)) > 1e-10 || std::abs(dir.norm() - 1.0) > 1e-10)
    throw ContractViolation("pointwise_profile: direction must be a unit horizontal vector");
  const cplx u0 = evaluate(state, x);
  if (std::abs(u0) == 0.0) throw OutsideDomainError("pointwise_profile: u_k vanishes at the base point");

  // Normal fraction of dir from the Bloch picture: the loop tangent at the foot of x.
  const geometry::Vec3 n = geometry::bloch(x);
  std::size_t best = 0;
  for (std::size_t i = 1; i < loop.size(); ++i)
    if (n.dot(loop.bloch(i)) > n.dot(loop.bloch(best))) best = i;
  geometry::Vec3 p, dp, ddp;
  loop.bloch_jet(loop.normal_projection(n, loop.grid().node(best)), p, dp, ddp);
  const geometry::Vec3 b = geometry::bloch_differential(x, dir);
  const double along = b.dot(dp) / (b.norm() * dp.norm());
  const double perp = std::sqrt(std::max(0.0, 1.0 - along * along));

  const double sk = std::sqrt(static_cast<double>(state.k));
  std::vector<ProfileRow> rows;
  for (double s : w) {
    const C2 y = geometry::great_circle(x, dir, s / sk);
    rows.push_back({s, std::abs(evaluate(state, y)) / std::abs(u0), std::exp(-(s * perp) * (s * perp))});
  }
  return rows;
}

DecayReport decay_check(const PlanckianLift& lift, const HalfWeight& lambda, const C2& x, std::span<const int> ks,
                        double min_distance) {
  require_same_loop(lift, lambda);
  DecayReport rep;
  rep.distance = lift.base->distance_to(x);
  if (rep.distance < min_distance) {
    rep.inconclusive = true;
    return rep;
  }
  std::vector<asymptotics::Sample> samples;
  for (int k : ks) {
    if (k % lift.winding != 0) throw ContractViolation("decay_check: levels must be multiples of r");
    const double v = std::abs(evaluate(bpu_map(lift, lambda, k), x));
    rep.k.push_back(k);
    rep.values.push_back(v);
    samples.push_back({static_cast<double>(k), v});
  }
  const auto verdict = asymptotics::superpoly_decay(samples);
  rep.slopes = verdict.slopes;
  rep.pass = verdict.pass;
  return rep;
}

FlowData flow_data(const geometry::LoopHandle& loop, std::span<const double> f) {
  return FlowData{leaf::gamma_flow(loop, f), leaf::hamiltonian_normal_components(*loop, f)};
}

cplx d_delta_pair(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, const FlowData& data,
                  const TestFunction& gamma, ConventionSigns signs) {
  require_same_loop(lift, lambda);
  if (w.loop != lambda.loop()) throw ContractViolation("d_delta_pair: tangent lives on a different loop");
  const auto& loop = *lift.base;
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < lift.points.size(); ++i) {
    const std::size_t j = lift.base_index(i);
    const C2& x = lift.points[i];
    const double sl = lambda[j];
    cplx term = (w.s_l[j] + sl * data.gamma[j]) * gamma.value(x);
    term += static_cast<double>(signs.theta) * w.f[j] * sl * gamma.derivative(x, C2(kI * x));
    term += static_cast<double>(signs.normal) * sl * data.normal[j] * gamma.derivative(x, lift.normal(i));
    s += loop.length_density(j) * term;
  }
  return s * loop.weight();
}

SectionVector d_bpu(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                    const FlowData& data, bool rescale, ConventionSigns signs) {
  require_same_loop(lift, lambda);
  if (w.loop != lambda.loop()) throw ContractViolation("d_bpu: tangent lives on a different loop");
  const int k = table.level();
  if (k % lift.winding != 0) {
    std::clog << "warning: d_bpu at level " << k << " not divisible by r = " << lift.winding << "; returning zero\n";
    return SectionVector::zero(k);
  }
  const std::size_t n = lambda.samples().size();
  const double scale = rescale ? static_cast<double>(k) : 1.0;
  std::vector<double> h1(n), h2(n), h3(n);
  for (std::size_t j = 0; j < n; ++j) {
    h1[j] = scale * w.s_l[j] + lambda[j] * data.gamma[j];
    h2[j] = w.f[j] * lambda[j];
    h3[j] = lambda[j] * data.normal[j];
  }
  // The fibre derivative of conj(e_a) is -i k conj(e_a).
  SectionVector out = table.pair_values(h1);
  out += (static_cast<double>(signs.theta) * cplx(0.0, -k)) * table.pair_values(h2);
  out += cplx(static_cast<double>(signs.normal), 0.0) * table.pair_normal(h3);
  return out;
}

SectionVector d_bpu(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, int k, bool rescale,
                    ConventionSigns signs) {
  const LevelTable table(lift, k);
  return d_bpu(table, lift, lambda, w, flow_data(w.loop, w.f), rescale, signs);
}

SectionVector fd_bpu_derivative(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, int k,
                                bool rescale, std::optional<double> step) {
  LeafTangent wt = w;
  if (rescale)
    for (double& v : wt.s_l) v *= k;
  const double h = step.value_or(std::min(1e-3, 0.03 / k));
  auto at = [&](double t) {
    const auto p = leaf::flow_path(lift, lambda, wt, t);
    return bpu_map(p.lift, p.weight, k).u;
  };
  auto central = [&](double s) { return cplx(0.5 / s, 0.0) * (at(s) - at(-s)); };
  const auto coarse = central(h);
  const auto fine = central(0.5 * h);
  return cplx(1.0 / 3.0, 0.0) * (cplx(4.0, 0.0) * fine - coarse);
}

double relative_error(const SectionVector& a, const SectionVector& b) {
  return std::sqrt((a - b).norm2() / b.norm2());
}

CalibrationResult calibrate_signs(std::size_t nodes) {
  const auto loop = geometry::latitude_loop(0.5, nodes);
  const auto lift = geometry::horizontal_lift(loop);
  const auto lambda = HalfWeight::constant(loop);
  std::vector<double> f(nodes);
  for (std::size_t i = 0; i < nodes; ++i) f[i] = std::cos(2.0 * loop->grid().node(i));
  const auto w = leaf::project_constraints(f, std::vector<double>(nodes, 0.0), lambda);
  const int k = 8;
  const LevelTable table(lift, k);
  const auto data = flow_data(loop, w.f);
  const auto oracle = fd_bpu_derivative(lift, lambda, w, k, false);

  CalibrationResult res;
  double best = std::numeric_limits<double>::infinity();
  for (int st : {-1, 1})
    for (int sp : {-1, 1}) {
      const ConventionSigns s{st, sp};
      const double e = relative_error(d_bpu(table, lift, lambda, w, data, false, s), oracle);
      res.errors[st > 0][sp > 0] = e;
      if (e < best) {
        best = e;
        res.signs = s;
      }
    }
  return res;
}

SectionVector zk_orthogonalize(const BpuState& state, const SectionVector& du) {
  const double uu = state.u.norm2();
  if (!(uu > kZeroNorm2)) throw OutsideDomainError("zk_orthogonalize: BPU vector vanishes");
  return du - (hardy::inner(du, state.u) / uu) * state.u;
}

PullbackResult fs_pullback(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda,
                           const LeafTangent& w, const FlowData& dw, const LeafTangent& wp, const FlowData& dwp,
                           ConventionSigns signs) {
  const BpuState state = bpu_map(table, lift, lambda);
  const double uu = state.u.norm2();
  if (!(uu > kZeroNorm2)) throw OutsideDomainError("fs_pullback: BPU vector vanishes at this level");
  const auto z = zk_orthogonalize(state, d_bpu(table, lift, lambda, w, dw, true, signs));
  const auto zp = zk_orthogonalize(state, d_bpu(table, lift, lambda, wp, dwp, true, signs));
  PullbackResult res;
  res.k = table.level();
  res.norm_u = uu;
  res.raw = hardy::inner(z, zp) / uu;
  res.g_value = res.raw.real();
  res.omega_value = res.raw.imag();
  return res;
}

PullbackResult fs_pullback(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                           const LeafTangent& wp, int k, ConventionSigns signs) {
  const LevelTable table(lift, k);
  return fs_pullback(table, lift, lambda, w, flow_data(w.loop, w.f), wp, flow_data(wp.loop, wp.f), signs);
}

cplx f_integrand(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda) {
  if (w.loop != wp.loop || w.loop != lambda.loop()) throw ContractViolation("f_integrand: mismatched loops");
  std::vector<double> re(w.f.size()), im(w.f.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double s = lambda[i];
    re[i] = w.s_l[i] * wp.s_l[i] + w.f[i] * wp.f[i] * s * s;
    im[i] = (w.s_l[i] * wp.f[i] - w.f[i] * wp.s_l[i]) * s;
  }
  return {leaf::integrate_on_loop(*w.loop, re), leaf::integrate_on_loop(*w.loop, im)};
}

std::vector<NormRow> norm_sweep(const PlanckianLift& lift, const HalfWeight& lambda, std::span<const int> ks) {
  std::vector<NormRow> rows;
  for (int k : ks) rows.push_back({k, bpu_map(lift, lambda, k).norm2()});
  return rows;
}

}  // namespace bpulab::bpu
