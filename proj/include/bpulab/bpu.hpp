#pragma once

// BPU maps u_k = Pi_k(delta_(P, lambda)), their derivatives along the leaf, and
// Fubini-Study pullbacks of the projectivized maps.

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bpulab/geometry.hpp"
#include "bpulab/hardy.hpp"
#include "bpulab/leaf.hpp"

namespace bpulab::bpu {

using cplx = std::complex<double>;
using geometry::C2;
using geometry::PlanckianLift;
using hardy::SectionVector;
using leaf::HalfWeight;
using leaf::LeafTangent;

/// A test function on X together with its real directional derivative.
struct TestFunction {
  std::function<cplx(const C2&)> value;
  std::function<cplx(const C2&, const C2&)> derivative;  // (x, v) -> d gamma_x(v)
};

/// conj(e_a) for the orthonormal monomial e_a of the given basis.
TestFunction conjugate_monomial(const hardy::SectionBasis& basis, int a);

/// <delta_(P, lambda), gamma> = int_P S_lambda gamma dens_P.
cplx delta_pair(const PlanckianLift& lift, const HalfWeight& lambda, const std::function<cplx(const C2&)>& gamma);

/// Orthonormal monomials and their normal derivatives at every node of a lift.
class LevelTable {
 public:
  LevelTable(const PlanckianLift& lift, int k);

  int level() const { return basis_.level(); }
  const hardy::SectionBasis& basis() const { return basis_; }
  /// values(i, a) = e_a(x_i); normal(i, a) = d e_a(x_i)[J T_i].
  const Eigen::MatrixXcd& values() const { return values_; }
  const Eigen::MatrixXcd& normal() const { return normal_; }

  /// Coefficients int_P (h * conj(e_a)) dens_P for per-node weights h given per base node.
  SectionVector pair_values(std::span<const double> h) const;
  SectionVector pair_normal(std::span<const double> h) const;

 private:
  hardy::SectionBasis basis_;
  std::size_t base_nodes_;
  Eigen::VectorXd dens_;  // D_L times the quadrature weight, per lift node
  Eigen::MatrixXcd values_;
  Eigen::MatrixXcd normal_;
};

struct BpuState {
  int k = 0;
  int r = 0;
  SectionVector u;

  double norm2() const { return u.norm2(); }
};

BpuState bpu_map(const PlanckianLift& lift, const HalfWeight& lambda, int k);
BpuState bpu_map(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda);

/// Value of u_k at an arbitrary point of S^3.
cplx evaluate(const BpuState& state, const C2& x);

struct ProfileRow {
  double w = 0.0;         // FS length of the displacement before rescaling
  double ratio = 0.0;     // |u_k(x + w/sqrt k)| / |u_k(x)|
  double gaussian = 0.0;  // exp(-|w_perp|^2)
};

/// |u_k| along the horizontal great circle from x in the unit horizontal direction `dir`,
/// at displacements w/sqrt(k). x must lie over L.
std::vector<ProfileRow> pointwise_profile(const BpuState& state, const geometry::LagrangianLoop& loop, const C2& x,
                                          const C2& dir, std::span<const double> w);

/// Default exclusion radius for decay checks: 0.2 of the FS diameter pi/2.
inline constexpr double kDecayExclusion = 0.2 * 1.5707963267948966;

struct DecayReport {
  double distance = 0.0;  // FS distance from pi(x) to L
  bool inconclusive = false;
  std::vector<int> k;
  std::vector<double> values;  // |u_k(x)|
  std::vector<double> slopes;  // per-dyad log-log slopes
  bool pass = false;
};

/// |u_k(x)| over the given levels for x off the locus, with per-dyad slopes.
DecayReport decay_check(const PlanckianLift& lift, const HalfWeight& lambda, const C2& x, std::span<const int> ks,
                        double min_distance = kDecayExclusion);

/// Signs of the fibre-derivative and normal-derivative terms of the analytic derivative.
struct ConventionSigns {
  int theta = -1;
  int normal = +1;
};

/// Values fixed once by `calibrate_signs` and used everywhere else.
inline constexpr ConventionSigns kFrozenSigns{-1, +1};

/// Gamma(L, f) and the Hamiltonian normal components of f.
struct FlowData {
  std::vector<double> gamma;
  std::vector<double> normal;
};
FlowData flow_data(const geometry::LoopHandle& loop, std::span<const double> f);

/// Analytic pairing <d Delta(W), gamma> along the lift.
cplx d_delta_pair(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, const FlowData& data,
                  const TestFunction& gamma, ConventionSigns signs = kFrozenSigns);

/// Pi_k(d Delta(W)); with `rescale` the tangent is W_k = W(f, k l).
SectionVector d_bpu(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                    const FlowData& data, bool rescale, ConventionSigns signs = kFrozenSigns);
SectionVector d_bpu(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, int k, bool rescale,
                    ConventionSigns signs = kFrozenSigns);

/// Richardson-refined central difference of bpu_map along the flow path of W (or W_k).
SectionVector fd_bpu_derivative(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w, int k,
                                bool rescale, std::optional<double> step = std::nullopt);

/// Relative vector error |a - b| / |b|.
double relative_error(const SectionVector& a, const SectionVector& b);

struct CalibrationResult {
  ConventionSigns signs;
  double errors[2][2] = {};  // [theta == +1][normal == +1]
};

/// Chooses the signs minimizing the disagreement with the finite-difference oracle on
/// c = 1/2, f = cos 2phi, l = 0, k = 8.
CalibrationResult calibrate_signs(std::size_t nodes = 512);

/// Z = du - (<du, u> / <u, u>) u.
SectionVector zk_orthogonalize(const BpuState& state, const SectionVector& du);

struct PullbackResult {
  int k = 0;
  double omega_value = 0.0;
  double g_value = 0.0;
  cplx raw{0.0, 0.0};
  double norm_u = 0.0;  // <u, u>
};

/// <Z_k, Z'_k> / <u, u> for the rescaled tangents W_k, W'_k.
PullbackResult fs_pullback(const LevelTable& table, const PlanckianLift& lift, const HalfWeight& lambda,
                           const LeafTangent& w, const FlowData& dw, const LeafTangent& wp, const FlowData& dwp,
                           ConventionSigns signs = kFrozenSigns);
PullbackResult fs_pullback(const PlanckianLift& lift, const HalfWeight& lambda, const LeafTangent& w,
                           const LeafTangent& wp, int k, ConventionSigns signs = kFrozenSigns);

/// int_L F(W, W') dens_L with F = (S_l S_l' + f f' S^2) + i (S_l f' - f S_l') S.
cplx f_integrand(const LeafTangent& w, const LeafTangent& wp, const HalfWeight& lambda);

struct NormRow {
  int k = 0;
  double norm2 = 0.0;
};
std::vector<NormRow> norm_sweep(const PlanckianLift& lift, const HalfWeight& lambda, std::span<const int> ks);

}  // namespace bpulab::bpu
