#pragma once

// The half-weighted isodrastic leaf through (L, lambda): half-weights, tangent pairs (f, l),
// the pairings Omega and G, the complex structure J, Hamiltonian deformations of L.

#include <complex>
#include <span>
#include <vector>

#include "bpulab/geometry.hpp"

namespace bpulab::leaf {

using geometry::C2;
using geometry::LoopHandle;

/// Real half-weight lambda = S * dens_L^{1/2} on a loop.
class HalfWeight {
 public:
  /// Stores the samples as given; use `normalized` for a unit half-weight.
  HalfWeight(LoopHandle loop, std::vector<double> samples);

  /// Rescales raw samples so that int S^2 dens_L = 1.
  static HalfWeight normalized(LoopHandle loop, std::vector<double> raw);
  static HalfWeight constant(LoopHandle loop);

  const LoopHandle& loop() const { return loop_; }
  std::span<const double> samples() const { return s_; }
  double operator[](std::size_t i) const { return s_[i]; }

  /// int lambda . lambda = int S^2 dens_L.
  double mass() const;
  double min_abs() const;
  bool nowhere_vanishing() const { return min_abs() > 1e-12; }

 private:
  LoopHandle loop_;
  std::vector<double> s_;
};

/// Tangent pair (f, l) with l = s_l * dens_L^{1/2}.
struct LeafTangent {
  LoopHandle loop;
  std::vector<double> f;
  std::vector<double> s_l;
  bool constrained = false;

  static LeafTangent zero(const LoopHandle& loop);
};

LeafTangent operator+(const LeafTangent& a, const LeafTangent& b);
LeafTangent operator*(double s, const LeafTangent& a);

/// Weighted tangent (f, phi) with phi = phi_density * |dphi|.
struct WeightedTangent {
  LoopHandle loop;
  std::vector<double> f;
  std::vector<double> phi_density;
};

/// int_L h dens_L for per-node coefficients h.
double integrate_on_loop(const geometry::LagrangianLoop& loop, std::span<const double> h);

/// Constraint integrals (int f lambda.lambda, int l.lambda).
std::pair<double, double> constraint_defects(const LeafTangent& w, const HalfWeight& lambda);

LeafTangent project_constraints(std::vector<double> f, std::vector<double> s_l, const HalfWeight& lambda);

/// Omega(W, W') = 2 int (f l' - f' l) . lambda.
double omega(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda);
/// G(W, W') = 2 int (f f' lambda.lambda + l . l').
double metric_g(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda);
/// J(W(f, g lambda)) = W(-g, f lambda).
LeafTangent j_map(const LeafTangent& w, const HalfWeight& lambda);

WeightedTangent psi_pushforward(const LeafTangent& w, const HalfWeight& lambda);
double omega_weinstein(const WeightedTangent& v, const WeightedTangent& vp);

/// Coefficient a with (Hamiltonian field of the normal-cotangent extension of f) = a * (J T) along L.
std::vector<double> hamiltonian_normal_components(const geometry::LagrangianLoop& loop, std::span<const double> f);

/// Contact Hamiltonian flow on S^3 generated by the extension F = f o beta of f, where beta
/// sends a point to the foot of its FS-normal geodesic on L. The flow commutes with the circle
/// action; its horizontal part projects to the Hamiltonian field of F on M and its vertical
/// rate is -F.
class NormalFlow {
 public:
  NormalFlow(LoopHandle loop, std::span<const double> f);

  /// Velocity at x, with `phi_guess` the Newton start for beta(x) (updated in place).
  C2 velocity(const C2& x, double& phi_guess) const;

  /// Flows each point by time t with classical RK4 (step at most `max_step`).
  std::vector<C2> flow(std::span<const C2> start, std::span<const double> phi_start, double t,
                       double max_step = 2e-3) const;

  /// Flows the loop representatives (node i starts with beta = phi_i).
  std::vector<C2> flow_loop(double t, double max_step = 2e-3) const;

  const LoopHandle& loop() const { return loop_; }

 private:
  LoopHandle loop_;
  spectral::TrigInterpolant f_;
};

inline constexpr double kDefaultFlowStep = 1e-3;

/// Gamma(L, f): t-derivative at 0 of the pulled-back half-density coefficient under the flow,
/// by central differences with Richardson extrapolation; the (t, t/2) and (t/2, t/4) values must agree.
std::vector<double> gamma_flow(const LoopHandle& loop, std::span<const double> f, double t = kDefaultFlowStep,
                               double tol = 1e-5);

/// Largest admissible normal displacement: a quarter of the smallest focal distance of L.
double tube_half_width(const geometry::LagrangianLoop& loop);

struct FlowPathPoint {
  LoopHandle loop;                       // L_t
  HalfWeight weight;                     // lambda_t = beta_t^*(lambda + t l)
  geometry::PlanckianLift lift;          // flowed Planckian lift P_t
  double max_displacement = 0.0;
};

/// Deformation along W(f, l) for time t; P must be a lift of lambda's loop.
FlowPathPoint flow_path(const geometry::PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                        double t);

}  // namespace bpulab::leaf
