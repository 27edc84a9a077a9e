#include <cmath>
#include <numbers>

#include "bpulab/errors.hpp"
#include "bpulab/leaf.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bpulab;
using namespace bpulab::leaf;
using geometry::C2;
using testsupport::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> samples(const geometry::LagrangianLoop& loop, auto&& fn) {
  std::vector<double> out(loop.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(loop.grid().node(i));
  return out;
}

std::vector<double> random_modes(Rng& rng, const geometry::LagrangianLoop& loop, int max_mode) {
  std::vector<double> out(loop.size(), rng.uniform(-1, 1));
  for (int m = 1; m <= max_mode; ++m) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double phi = loop.grid().node(i);
      out[i] += a * std::cos(m * phi) + b * std::sin(m * phi);
    }
  }
  return out;
}

HalfWeight positive_weight(Rng& rng, const geometry::LoopHandle& loop) {
  auto s = random_modes(rng, *loop, 3);
  double lo = 0.0;
  for (double v : s) lo = std::min(lo, v);
  for (double& v : s) v += 0.5 - lo;
  return HalfWeight::normalized(loop, s);
}

LeafTangent random_tangent(Rng& rng, const HalfWeight& lambda) {
  return project_constraints(random_modes(rng, *lambda.loop(), 4), random_modes(rng, *lambda.loop(), 4), lambda);
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("half-weights") {
  const auto loop = geometry::latitude_loop(0.5, 64);
  const auto lam = HalfWeight::constant(loop);
  CHECK(lam.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lam[3] == doctest::Approx(1.0 / std::sqrt(kPi)));
  CHECK(lam.nowhere_vanishing());
  CHECK_THROWS_AS(HalfWeight::normalized(loop, std::vector<double>(64, 0.0)), DomainError);
  CHECK_THROWS_AS(HalfWeight(loop, std::vector<double>(10, 1.0)), ContractViolation);
}

TEST_CASE("project_constraints examples") {
  const auto loop = geometry::latitude_loop(1.0 / 3.0, 64);
  const auto lam = HalfWeight::constant(loop);
  const auto cosv = samples(*loop, [](double p) { return std::cos(p); });
  const auto sinv = samples(*loop, [](double p) { return std::sin(p); });
  auto w = project_constraints(cosv, sinv, lam);
  CHECK(sup_diff(w.f, cosv) < 1e-14);
  CHECK(sup_diff(w.s_l, sinv) < 1e-14);
  w = project_constraints(samples(*loop, [](double p) { return 1 + std::cos(p); }), sinv, lam);
  CHECK(sup_diff(w.f, cosv) < 1e-14);
  w = project_constraints(cosv, std::vector<double>(lam.samples().begin(), lam.samples().end()), lam);
  CHECK(sup_diff(w.s_l, std::vector<double>(64, 0.0)) < 1e-14);
  CHECK(w.constrained);
}

TEST_CASE("Omega, G and Omega_Wein on the reference pair") {
  const auto loop = geometry::latitude_loop(0.5, 64);
  const auto lam = HalfWeight::constant(loop);
  const auto cosv = samples(*loop, [](double p) { return std::cos(p); });
  std::vector<double> cos_l(64);
  for (int i = 0; i < 64; ++i) cos_l[i] = cosv[i] * lam[i];
  const auto w = project_constraints(cosv, std::vector<double>(64, 0.0), lam);
  const auto wp = project_constraints(std::vector<double>(64, 0.0), cos_l, lam);
  CHECK(omega(w, wp, lam) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(omega(w, w, lam) == 0.0);
  CHECK(metric_g(w, w, lam) == doctest::Approx(1.0).epsilon(1e-13));

  WeightedTangent v{loop, cosv, std::vector<double>(64, 0.0)};
  WeightedTangent vp{loop, std::vector<double>(64, 0.0), std::vector<double>(64)};
  for (int i = 0; i < 64; ++i) vp.phi_density[i] = 2 * cosv[i] / (2 * kPi);
  CHECK(omega_weinstein(v, vp) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(omega_weinstein(v, v) == 0.0);

  const auto other = geometry::latitude_loop(0.5, 64);
  CHECK_THROWS_AS(omega(w, LeafTangent::zero(other), lam), ContractViolation);
}

TEST_CASE("property: algebraic identities on random constrained pairs") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto loop = t % 2 ? geometry::latitude_loop(1.0 / 3.0, 128)
                            : geometry::polar_graph_loop(testsupport::random_polar_profile(rng, 128, 1.2, 0.2));
    const auto lam = positive_weight(rng, loop);
    const auto w = random_tangent(rng, lam);
    const auto wp = random_tangent(rng, lam);
    const auto [a, b] = constraint_defects(w, lam);
    CHECK(std::abs(a) < 1e-10);
    CHECK(std::abs(b) < 1e-10);

    CHECK(std::abs(omega(w, wp, lam) + omega(wp, w, lam)) < 1e-12);
    CHECK(std::abs(metric_g(w, wp, lam) - metric_g(wp, w, lam)) < 1e-12);
    CHECK(metric_g(w, w, lam) > 0.0);

    const auto jw = j_map(w, lam);
    const auto jjw = j_map(jw, lam);
    CHECK(sup_diff(jjw.f, (-1.0 * w).f) < 1e-12);
    CHECK(sup_diff(jjw.s_l, (-1.0 * w).s_l) < 1e-12);
    CHECK(std::abs(omega(w, j_map(wp, lam), lam) - metric_g(w, wp, lam)) < 1e-9);
    const auto [ja, jb] = constraint_defects(jw, lam);
    CHECK(std::abs(ja) < 1e-10);
    CHECK(std::abs(jb) < 1e-10);

    const auto v = psi_pushforward(w, lam);
    const auto vp = psi_pushforward(wp, lam);
    CHECK(std::abs(omega(w, wp, lam) - omega_weinstein(v, vp)) < 1e-12);
    CHECK(std::abs(loop->grid().integrate(v.phi_density)) < 1e-10);
    const double s = rng.uniform(-3, 3);
    WeightedTangent sv{v.loop, v.f, v.phi_density};
    for (double& x : sv.f) x *= s;
    for (double& x : sv.phi_density) x *= s;
    CHECK(std::abs(omega_weinstein(sv, vp) - s * omega_weinstein(v, vp)) < 1e-12 * (1 + std::abs(s)));
  }
}

TEST_CASE("J needs a nowhere vanishing half-weight") {
  const auto loop = geometry::latitude_loop(0.5, 64);
  const auto lam = HalfWeight::normalized(loop, std::vector<double>(64, 1.0));
  auto s = samples(*loop, [](double p) { return std::cos(p); });
  const auto vanishing = HalfWeight::normalized(loop, s);
  CHECK_THROWS_AS(j_map(LeafTangent::zero(loop), vanishing), VanishingHalfWeightError);
  CHECK_NOTHROW(j_map(LeafTangent::zero(loop), lam));
}

TEST_CASE("Hamiltonian normal components against the flow") {
  const auto eq = geometry::latitude_loop(0.5, 128);
  CHECK(sup_diff(hamiltonian_normal_components(*eq, std::vector<double>(128, 2.0)), std::vector<double>(128, 0.0)) == 0.0);
  // On the equator (length density 1/2), f = cos(m phi) gives a = m sin(m phi).
  const auto f3 = samples(*eq, [](double p) { return std::cos(3 * p); });
  const auto a3 = hamiltonian_normal_components(*eq, f3);
  CHECK(sup_diff(a3, samples(*eq, [](double p) { return 3 * std::sin(3 * p); })) < 1e-11);

  Rng rng(71);
  for (const double c : {0.5, 1.0 / 3.0, 0.2}) {
    const auto loop = geometry::latitude_loop(c, 128);
    const auto f = random_modes(rng, *loop, 3);
    const auto a = hamiltonian_normal_components(*loop, f);
    const NormalFlow flow(loop, f);
    const double h = 1e-4;
    const auto plus = flow.flow_loop(h);
    const auto minus = flow.flow_loop(-h);
    const auto nf = geometry::normal_frame(*loop);
    for (std::size_t i = 0; i < loop->size(); i += 5) {
      const C2 vel = (plus[i] - minus[i]) / (2 * h);
      CHECK(geometry::fs_inner(vel, nf[i]) == doctest::Approx(a[i]).epsilon(1e-6).scale(1.0));
      CHECK(std::abs(geometry::fs_inner(vel, loop->tangent(i))) < 1e-6);
      CHECK(geometry::hermitian(loop->rep(i), vel).imag() == doctest::Approx(-f[i]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("Gamma: zero flow, linearity, closed-form curvature oracle") {
  const auto loop = geometry::latitude_loop(1.0 / 3.0, 128);
  CHECK(sup_diff(gamma_flow(loop, std::vector<double>(128, 0.0)), std::vector<double>(128, 0.0)) == 0.0);

  Rng rng(5);
  const auto f = random_modes(rng, *loop, 3);
  const auto g = random_modes(rng, *loop, 2);
  std::vector<double> comb(128);
  for (int i = 0; i < 128; ++i) comb[i] = 2.0 * f[i] - 0.5 * g[i];
  const auto gf = gamma_flow(loop, f);
  const auto gg = gamma_flow(loop, g);
  const auto gc = gamma_flow(loop, comb);
  double lin = 0.0;
  for (int i = 0; i < 128; ++i) lin = std::max(lin, std::abs(gc[i] - 2.0 * gf[i] + 0.5 * gg[i]));
  CHECK(lin < 1e-6);

  // First variation of arc length under the normal speed a: Gamma = -a <p'', nu> / |p'|^2 on the Bloch sphere.
  for (const auto& lp : {loop, geometry::polar_graph_loop(testsupport::random_polar_profile(rng, 128, 1.3, 0.2))}) {
    const auto ff = random_modes(rng, *lp, 2);
    const auto a = hamiltonian_normal_components(*lp, ff);
    const auto gam = gamma_flow(lp, ff);
    const auto nf = geometry::normal_frame(*lp);
    for (std::size_t i = 0; i < lp->size(); i += 3) {
      geometry::Vec3 p, dp, ddp;
      lp->bloch_jet(lp->grid().node(i), p, dp, ddp);
      const geometry::Vec3 nu = geometry::bloch_differential(lp->rep(i), nf[i]).normalized();
      CHECK(gam[i] == doctest::Approx(-a[i] * ddp.dot(nu) / dp.squaredNorm()).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("Gamma on the equator vanishes, on other latitudes it does not") {
  const auto eq = geometry::latitude_loop(0.5, 128);
  const auto f = samples(*eq, [](double p) { return std::cos(p); });
  double m = 0.0;
  for (double v : gamma_flow(eq, f)) m = std::max(m, std::abs(v));
  CHECK(m < 1e-7);
  const auto lat = geometry::latitude_loop(1.0 / 3.0, 128);
  const auto gl = gamma_flow(lat, samples(*lat, [](double p) { return std::cos(p); }));
  double mx = 0.0, mean = 0.0;
  for (double v : gl) {
    mx = std::max(mx, std::abs(v));
    mean += v / 128;
  }
  CHECK(mx > 0.1);
  CHECK(std::abs(mean) < 1e-8);
}

TEST_CASE("tube half-width") {
  CHECK(tube_half_width(*geometry::latitude_loop(0.5, 64)) == doctest::Approx(0.25 * kPi / 4));
  CHECK(tube_half_width(*geometry::latitude_loop(0.1, 64)) < 0.25 * kPi / 4);
}

TEST_CASE("flow paths: identity, isodrastic invariance, weight transport") {
  const auto loop = geometry::latitude_loop(1.0 / 3.0, 128);
  const auto lift = geometry::horizontal_lift(loop);
  const auto lam = HalfWeight::constant(loop);
  const auto w = project_constraints(samples(*loop, [](double p) { return std::cos(2 * p); }),
                                     samples(*loop, [&](double p) { return 0.3 * std::cos(p) / std::sqrt(loop->length()); }),
                                     lam);
  const auto id = flow_path(lift, lam, w, 0.0);
  CHECK(id.max_displacement < 1e-12);
  CHECK(sup_diff(id.weight.samples(), lam.samples()) < 1e-12);

  for (double t : {-0.03, 0.01, 0.05}) {
    const auto pt = flow_path(lift, lam, w, t);
    const auto h = geometry::holonomy(*pt.loop);
    REQUIRE(h.order);
    CHECK(*h.order == 3);
    CHECK(pt.lift.max_legendrian_defect() < 1e-8);
    CHECK(pt.lift.closure_residual < 1e-9);
    for (std::size_t i = 0; i < pt.lift.points.size(); i += 31)
      CHECK(geometry::fs_distance(pt.lift.points[i], pt.loop->rep(i % 128)) < 1e-7);
  }
  // Mass defect is quadratic in t.
  const double h = 0.02;
  const double dp = flow_path(lift, lam, w, h).weight.mass() - 1.0;
  const double dm = flow_path(lift, lam, w, -h).weight.mass() - 1.0;
  const double dh = flow_path(lift, lam, w, h / 2).weight.mass() - 1.0;
  CHECK(std::abs(dp - dm) < 1e-3 * h);
  CHECK(std::abs(dp / dh - 4.0) < 0.2);

  CHECK_THROWS_AS(flow_path(lift, lam, w, 0.5), StepTooLargeError);
}
