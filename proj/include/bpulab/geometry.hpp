#pragma once

// Model polarized Hodge manifold: M = CP^1, A = O(1), X = S^3 in C^2.
//
// Conventions used throughout the library:
//  * The symplectic form omega has total area 1, so a loop bounding area c has
//    prequantum holonomy exp(2 pi i c).
//  * The Riemannian metric on M is the round Fubini-Study metric of radius 1/2
//    (total area pi). It is the horizontal part of the round metric of S^3, so
//    horizontal vectors are measured with Re<u, v> in C^2 directly.
//  * dens_X is the S^3 volume with the fibre rescaled to unit length; its total
//    mass is pi, which makes H(X)_k ~ H^0(M, A^k) unitary.
//  * The circle acts by x -> exp(i theta) x; connection form Im(x^H dx).

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bpulab/spectral.hpp"

namespace bpulab::geometry {

using cplx = std::complex<double>;
using C2 = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;

/// Hermitian product <u, v> = u^H v (antilinear in the first slot).
inline cplx hermitian(const C2& u, const C2& v) { return u.dot(v); }

/// Real inner product of horizontal vectors; equals the FS metric after projection.
inline double fs_inner(const C2& u, const C2& v) { return hermitian(u, v).real(); }

/// Bloch vector (unit sphere in R^3) of a unit representative; (1,0) maps to the north pole.
Vec3 bloch(const C2& x);

/// Differential of the Bloch map at x applied to w.
Vec3 bloch_differential(const C2& x, const C2& w);

/// Removes the radial and vertical components of v at the unit vector x.
C2 horizontal_part(const C2& x, const C2& v);

/// Fubini-Study distance arccos|<a,b>| between the classes of two unit vectors.
double fs_distance(const C2& a, const C2& b);

/// Great circle of S^3 through x with initial velocity w (w orthogonal to x), at length tau*|w|.
C2 great_circle(const C2& x, const C2& w, double tau);

struct SpherePoint {
  C2 z;

  /// Normalizes to unit length and fixes the phase so the larger component is real positive.
  static SpherePoint canonical(cplx z0, cplx z1);

  Vec3 bloch() const { return geometry::bloch(z); }
  /// |z0|^2, the omega-area of the cap {|w0|^2 < |z0|^2}.
  double area_coordinate() const { return std::norm(z(0)); }
};

struct BundlePoint {
  C2 x;

  /// Accepts a unit vector (within 1e-12); throws DomainError otherwise.
  static BundlePoint from(cplx x0, cplx x1);

  BundlePoint rotated(double theta) const;
  SpherePoint project() const { return SpherePoint::canonical(x(0), x(1)); }
};

/// Closed curve in M sampled at phi_i = 2 pi i / N, stored through smooth unit
/// representatives in C^2 (the phase of the representatives is arbitrary but must
/// itself be periodic).
class LagrangianLoop {
 public:
  explicit LagrangianLoop(std::vector<C2> representatives,
                          std::optional<double> area_coordinate = std::nullopt);

  std::size_t size() const { return reps_.size(); }
  const spectral::QuadratureGrid& grid() const { return grid_; }
  double weight() const { return grid_.weight(); }

  const C2& rep(std::size_t i) const { return reps_[i]; }
  std::span<const C2> reps() const { return reps_; }
  SpherePoint point(std::size_t i) const { return SpherePoint::canonical(reps_[i](0), reps_[i](1)); }
  const Vec3& bloch(std::size_t i) const { return bloch_[i]; }

  /// Horizontal unit tangent at rep(i) (zero where the curve stalls).
  const C2& tangent(std::size_t i) const { return tangents_[i]; }
  /// FS length density D_L against |dphi|.
  double length_density(std::size_t i) const { return speed_[i]; }
  std::span<const double> length_densities() const { return speed_; }
  double length() const;

  /// Connection one-form along the representatives, Im(z^H z'), per node.
  std::span<const double> connection() const { return connection_; }

  /// Spectral tail of the representative samples; small iff the samples close up smoothly.
  double closure_residual() const { return closure_residual_; }
  std::optional<double> area_coordinate() const { return area_coordinate_; }

  /// Bloch curve and its phi-derivatives at an arbitrary parameter.
  void bloch_jet(double phi, Vec3& p, Vec3& dp, Vec3& ddp) const;

  /// Parameter of the normal geodesic through L that contains the Bloch point n,
  /// found by Newton iteration from `guess`.
  double normal_projection(const Vec3& n, double guess) const;

  /// FS distance from the class of x to the loop.
  double distance_to(const C2& x) const;

 private:
  std::vector<C2> reps_;
  spectral::QuadratureGrid grid_;
  std::vector<Vec3> bloch_;
  std::vector<C2> tangents_;
  std::vector<double> speed_;
  std::vector<double> connection_;
  std::array<spectral::TrigInterpolant, 3> bloch_interp_;
  double closure_residual_ = 0.0;
  std::optional<double> area_coordinate_;
};

using LoopHandle = std::shared_ptr<const LagrangianLoop>;

/// Maximum spectral tail accepted as a closed loop.
inline constexpr double kClosureTolerance = 1e-6;

/// The circle {|z0|^2 = c}, parametrized as (sqrt(c), sqrt(1-c) e^{i phi}).
LoopHandle latitude_loop(double c, std::size_t n);

/// Graph over the equator: Bloch polar angle theta(phi_i) at azimuth phi_i.
/// Samples must stay strictly inside (0, pi).
LoopHandle polar_graph_loop(std::span<const double> polar_angle);

struct Holonomy {
  cplx phase;
  std::optional<int> order;  // nullopt: no order up to r_max
};

inline constexpr int kMaxHolonomyOrder = 64;

Holonomy holonomy(const LagrangianLoop& loop, int r_max = kMaxHolonomyOrder, double tol = 1e-9);

enum class LiftIntegrator { Spectral, RungeKutta4 };

/// Horizontal lift of a Bohr-Sommerfeld loop, traversed r = |Hol| times.
struct PlanckianLift {
  LoopHandle base;
  int winding = 0;
  cplx holonomy{1.0, 0.0};
  std::vector<C2> points;    // r * N nodes on [0, 2 pi r)
  std::vector<C2> tangents;  // horizontal unit tangents
  double closure_residual = 0.0;

  std::size_t nodes_per_circuit() const { return base->size(); }
  std::size_t base_index(std::size_t i) const { return i % base->size(); }
  /// Horizontal unit normal J T at node i.
  C2 normal(std::size_t i) const { return cplx{0.0, 1.0} * tangents[i]; }
  /// Alpha(tangent) per node; zero for a Legendrian curve.
  double max_legendrian_defect() const;
};

inline constexpr double kLiftClosureTolerance = 1e-8;

PlanckianLift horizontal_lift(LoopHandle loop, const BundlePoint& start,
                              LiftIntegrator integrator = LiftIntegrator::Spectral);

/// Lift starting at the stored representative of node 0.
PlanckianLift horizontal_lift(LoopHandle loop);

/// Per-node horizontal unit normals J * (unit tangent).
std::vector<C2> normal_frame(const LagrangianLoop& loop);

}  // namespace bpulab::geometry
