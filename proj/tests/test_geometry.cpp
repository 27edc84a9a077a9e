#include <cmath>
#include <numbers>

#include "bpulab/errors.hpp"
#include "bpulab/geometry.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bpulab;
using namespace bpulab::geometry;
using testsupport::Rng;

namespace {
constexpr double kPi = std::numbers::pi;
const cplx I{0.0, 1.0};
}  // namespace

TEST_CASE("property: FS distance is half the Bloch angle") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const C2 a = rng.unit_c2();
    const C2 b = rng.unit_c2();
    CHECK(bloch(a).norm() == doctest::Approx(1.0).epsilon(1e-14));
    const double ang = std::acos(std::clamp(bloch(a).dot(bloch(b)), -1.0, 1.0));
    CHECK(fs_distance(a, b) == doctest::Approx(0.5 * ang).epsilon(1e-9));
    CHECK(fs_distance(a, std::polar(1.0, rng.uniform(0, 6)) * a) < 1e-7);
  }
}

TEST_CASE("property: Bloch differential matches finite differences") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const C2 x = rng.unit_c2();
    const C2 w = horizontal_part(x, C2(rng.complex_normal(), rng.complex_normal()));
    const double h = 1e-6;
    const Vec3 fd = (bloch(great_circle(x, w, h)) - bloch(great_circle(x, w, -h))) / (2 * h);
    CHECK((fd - bloch_differential(x, w)).norm() < 1e-8 * (1 + w.norm()));
    // Horizontal vectors have FS length |w|, i.e. half their Bloch length.
    CHECK(bloch_differential(x, w).norm() == doctest::Approx(2 * w.norm()).epsilon(1e-10));
  }
}

TEST_CASE("canonical sphere points and bundle points") {
  const auto p = SpherePoint::canonical(cplx{0, 2}, cplx{1, 0});
  CHECK(p.z.norm() == doctest::Approx(1.0));
  CHECK(std::abs(p.z(0).imag()) < 1e-15);
  CHECK(p.z(0).real() > 0);
  CHECK_THROWS_AS(SpherePoint::canonical(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(BundlePoint::from(1.0, 1.0), DomainError);
  const auto b = BundlePoint::from(1.0, 0.0).rotated(kPi / 2);
  CHECK(std::abs(b.x(0) - I) < 1e-15);
}

TEST_CASE("latitude circles: length, holonomy and order") {
  for (auto [p, r] : {std::pair{1, 2}, {1, 3}, {2, 5}, {3, 7}}) {
    const double c = double(p) / r;
    const auto loop = latitude_loop(c, 256);
    CHECK(loop->length() == doctest::Approx(2 * kPi * std::sqrt(c * (1 - c))).epsilon(1e-12));
    const auto h = holonomy(*loop);
    CHECK(std::abs(h.phase - std::polar(1.0, 2 * kPi * c)) < 1e-12);
    REQUIRE(h.order);
    CHECK(*h.order == r);
  }
  CHECK(latitude_loop(0.5, 128)->length() == doctest::Approx(kPi));
  CHECK_FALSE(holonomy(*latitude_loop(1 / std::sqrt(2.0), 128)).order);
  CHECK_FALSE(holonomy(*latitude_loop(1.0 / 67, 128)).order);
  CHECK_THROWS_AS(latitude_loop(0.0, 64), DomainError);
  CHECK_THROWS_AS(latitude_loop(1.0, 64), DomainError);
}

TEST_CASE("property: holonomy phase equals exp(2 pi i area) for random smooth loops") {
  Rng rng(99);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 256;
    const auto theta = testsupport::random_polar_profile(rng, n, rng.uniform(0.8, 2.3), 0.3);
    const auto loop = polar_graph_loop(theta);
    // Area of the side containing z0 = 0: (1/4pi) int (1 + cos theta) dphi.
    double area = 0.0;
    for (double th : theta) area += (1 + std::cos(th)) * (2 * kPi / n);
    area /= 4 * kPi;
    CHECK(std::abs(holonomy(*loop).phase - std::polar(1.0, 2 * kPi * area)) < 1e-10);
  }
}

TEST_CASE("holonomy rejects loops that do not close") {
  std::vector<double> theta(128);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 1.0 + 0.5 * double(i) / theta.size();
  CHECK_THROWS_AS(holonomy(*polar_graph_loop(theta)), ContractViolation);
}

TEST_CASE("horizontal lift of a Bohr-Sommerfeld circle") {
  const auto loop = latitude_loop(1.0 / 3.0, 128);
  const auto lift = horizontal_lift(loop);
  CHECK(lift.winding == 3);
  CHECK(lift.points.size() == 3 * 128);
  CHECK(lift.closure_residual < 1e-12);
  CHECK(lift.max_legendrian_defect() < 1e-12);
  for (std::size_t i = 0; i < lift.points.size(); i += 17) {
    CHECK(fs_distance(lift.points[i], loop->rep(lift.base_index(i))) < 1e-7);
    CHECK(std::abs(hermitian(lift.points[i], lift.tangents[i])) < 1e-14);
    CHECK(std::abs(hermitian(lift.points[i], lift.normal(i))) < 1e-14);
  }
  // Successive circuits differ by the holonomy.
  CHECK((lift.points[128] - lift.holonomy * lift.points[0]).norm() < 1e-12);

  const auto rk = horizontal_lift(loop, BundlePoint{loop->rep(0)}, LiftIntegrator::RungeKutta4);
  double diff = 0.0;
  for (std::size_t i = 0; i < rk.points.size(); ++i) diff = std::max(diff, (rk.points[i] - lift.points[i]).norm());
  CHECK(diff < 1e-9);
}

TEST_CASE("property: lifts of random loops agree between integrators and are equivariant") {
  Rng rng(1234);
  int ran = 0;
  for (int t = 0; t < 10; ++t) {
    auto theta = testsupport::random_polar_profile(rng, 256, 1.5, 0.25);
    auto loop = polar_graph_loop(theta);
    // Shift the mean polar angle until the area is a rational with small denominator.
    const double area = std::arg(holonomy(*loop).phase) / (2 * kPi);
    const double target = 0.5;
    double cosshift = (target - (area < 0 ? area + 1 : area)) * 2;  // d area / d cos(theta) = 1/2
    for (double& th : theta) th = std::acos(std::clamp(std::cos(th) + cosshift, -0.999, 0.999));
    loop = polar_graph_loop(theta);
    const auto h = holonomy(*loop);
    if (!h.order) continue;  // profile distortion broke exactness; skip
    ++ran;
    const auto a = horizontal_lift(loop);
    const auto b = horizontal_lift(loop, BundlePoint{loop->rep(0)}, LiftIntegrator::RungeKutta4);
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK((a.points[i] - b.points[i]).norm() < 1e-8);
    const double th = rng.uniform(0, 2 * kPi);
    const auto c = horizontal_lift(loop, BundlePoint{loop->rep(0)}.rotated(th));
    CHECK((c.points[40] - std::polar(1.0, th) * a.points[40]).norm() < 1e-12);
  }
  CHECK(ran >= 5);
}

TEST_CASE("lift failures") {
  CHECK_THROWS_AS(horizontal_lift(latitude_loop(1 / std::sqrt(3.0), 128)), BohrSommerfeldError);
  const auto loop = latitude_loop(0.5, 64);
  CHECK_THROWS_AS(horizontal_lift(loop, BundlePoint::from(0.0, 1.0)), ContractViolation);
}

TEST_CASE("normal frame is unit, horizontal and orthogonal to the tangent") {
  const auto loop = latitude_loop(0.25, 64);
  const auto nf = normal_frame(*loop);
  for (std::size_t i = 0; i < nf.size(); ++i) {
    CHECK(nf[i].norm() == doctest::Approx(1.0));
    CHECK(std::abs(hermitian(loop->rep(i), nf[i])) < 1e-14);
    CHECK(std::abs(fs_inner(nf[i], loop->tangent(i))) < 1e-14);
  }
  std::vector<C2> still(16, C2(std::sqrt(0.5), std::sqrt(0.5)));
  CHECK_THROWS_AS(normal_frame(LagrangianLoop(still)), ContractViolation);
}

TEST_CASE("property: distance to the loop along a normal geodesic") {
  Rng rng(8);
  const auto loop = latitude_loop(0.4, 128);
  const auto nf = normal_frame(*loop);
  for (int t = 0; t < 30; ++t) {
    const std::size_t i = rng.integer(0, 127);
    const double d = rng.uniform(0.0, 0.6);
    const C2 y = great_circle(loop->rep(i), nf[i], d);
    CHECK(loop->distance_to(y) == doctest::Approx(d).epsilon(1e-9));
  }
}
