#include "bpulab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "bpulab/asymptotics.hpp"
#include "bpulab/errors.hpp"
#include "bpulab/io.hpp"

namespace bpulab::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::vector<ExperimentInfo> kCatalog = {
    {ExperimentKind::NormSweep, "norm-sweep",
     "<u_k, u_k> over k = l r against (2/pi)^(1/2) r^2 k^(1/2); exact vanishing when r does not divide k"},
    {ExperimentKind::TheoremCheck, "theorem-check",
     "leading k^2 coefficients of the FS pullback against c_Omega Omega and c_G G for tangent pairs"},
    {ExperimentKind::DerivativeCrosscheck, "derivative-crosscheck",
     "analytic d_bpu against the Richardson finite-difference flow oracle"},
    {ExperimentKind::Profile, "profile", "transverse profile |u_k(x + w/sqrt k)| / |u_k(x)| against exp(-|w_perp|^2)"},
    {ExperimentKind::Decay, "decay", "super-polynomial decay of |u_k| away from the locus"},
    {ExperimentKind::IdentitySuite, "identity-suite",
     "exact leaf identities (J, Omega, G, Psi, F) and holonomy order along Hamiltonian flow"},
};

// ---------------------------------------------------------------------------------------------
// Config parsing

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

int get_int(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

double get_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(std::string("'") + key + "' must be finite");
  return x;
}

std::vector<FourierMode> parse_modes(const json& j, const char* what, std::size_t nodes) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of {m, cos, sin}");
  std::vector<FourierMode> out;
  for (const auto& e : j) {
    if (!e.is_object()) bad(std::string(what) + " entries must be objects");
    for (const auto& [k, v] : e.items())
      if (k != "m" && k != "cos" && k != "sin") bad(std::string(what) + ": unknown key '" + k + "'");
    FourierMode m;
    if (!e.contains("m")) bad(std::string(what) + ": mode entry needs 'm'");
    m.m = get_int(e, "m");
    if (m.m < 0 || 4 * static_cast<std::size_t>(m.m) >= nodes) bad(std::string(what) + ": mode out of the resolved band");
    if (e.contains("cos")) m.cos = get_number(e, "cos");
    if (e.contains("sin")) m.sin = get_number(e, "sin");
    out.push_back(m);
  }
  return out;
}

std::vector<int> parse_levels(const json& j, int r) {
  if (!j.is_array() || j.empty()) bad("'levels' must be a non-empty array of positive integers");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<int>() <= 0) bad("'levels' must contain positive integers");
    const int k = e.get<int>();
    if (k % r != 0) bad("'levels' must be multiples of r = " + std::to_string(r));
    if (k > 4096) bad("'levels' entries must not exceed 4096");
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) bad("'levels' must be distinct");
  return out;
}

// ---------------------------------------------------------------------------------------------
// Shared experiment plumbing

struct LeafSetup {
  geometry::LoopHandle loop;
  geometry::PlanckianLift lift;
  leaf::HalfWeight lambda;
};

std::vector<double> fourier_samples(const geometry::LagrangianLoop& loop, const std::vector<FourierMode>& modes) {
  std::vector<double> out(loop.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double phi = loop.grid().node(i);
    for (const auto& m : modes) out[i] += m.cos * std::cos(m.m * phi) + m.sin * std::sin(m.m * phi);
  }
  return out;
}

LeafSetup make_leaf(const ExperimentConfig& cfg, std::vector<FourierMode> weight) {
  auto loop = geometry::latitude_loop(static_cast<double>(cfg.p) / cfg.r, cfg.nodes);
  auto lift = geometry::horizontal_lift(loop);
  auto lambda = leaf::HalfWeight::normalized(loop, fourier_samples(*loop, weight));
  return LeafSetup{loop, std::move(lift), std::move(lambda)};
}

LeafSetup make_leaf(const ExperimentConfig& cfg) { return make_leaf(cfg, cfg.half_weight); }

leaf::LeafTangent make_tangent(const LeafSetup& lf, const TangentSpec& spec) {
  auto f = fourier_samples(*lf.loop, spec.f);
  auto g = fourier_samples(*lf.loop, spec.g);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= lf.lambda[i];
  return leaf::project_constraints(std::move(f), std::move(g), lf.lambda);
}

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : eng_(seed) {}
  double operator()(double a, double b) { return a + (b - a) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53); }

 private:
  std::mt19937_64 eng_;
};

TangentSpec random_spec(Uniform& u) {
  TangentSpec s;
  for (int m = 1; m <= 3; ++m) {
    s.f.push_back({m, u(-1, 1) / m, u(-1, 1) / m});
    s.g.push_back({m, u(-1, 1) / m, u(-1, 1) / m});
  }
  return s;
}

std::vector<TangentSpec> tangents_or_random(const ExperimentConfig& cfg, int default_count) {
  if (!cfg.tangents.empty()) return cfg.tangents;
  Uniform u(cfg.seed);
  std::vector<TangentSpec> out;
  const int n = cfg.random_tangents > 0 ? cfg.random_tangents : default_count;
  for (int i = 0; i < n; ++i) out.push_back(random_spec(u));
  return out;
}

std::vector<TangentSpec> default_theorem_tangents() {
  return {
      {{{2, 1.0, 0.0}}, {}},                            // 0: f = cos 2phi
      {{{2, 0.0, 1.0}}, {}},                            // 1: f = sin 2phi
      {{{1, 1.0, 0.0}}, {}},                            // 2: f = cos phi
      {{}, {{1, 1.0, 0.0}}},                            // 3: g = cos phi
      {{}, {{1, 1.0, 0.0}, {2, 0.0, 1.0}}},             // 4: g = cos phi + sin 2phi
      {{{1, 1.0, 0.0}, {3, 0.0, 0.5}}, {{1, 0.0, 0.3}}},  // 5
      {{{2, 0.0, 0.7}}, {{1, 1.0, 0.0}, {2, -0.4, 0.0}}},  // 6
      {{{3, 1.0, 0.0}}, {{1, 0.0, 0.5}}},               // 7
  };
}

std::vector<std::pair<int, int>> default_theorem_pairs() { return {{0, 1}, {2, 3}, {3, 4}, {5, 6}, {7, 7}, {5, 2}}; }

std::string pair_name(int i, int j) { return "pair-" + std::to_string(i) + "-" + std::to_string(j); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::optional<int> smallest_admissible(const LeafSetup& lf, int l_max) {
  for (int l = 1; l <= l_max; ++l) {
    const int k = l * lf.lift.winding;
    if (bpu::bpu_map(lf.lift, lf.lambda, k).norm2() > 1e-24) return k;
  }
  return std::nullopt;
}

// Deviation of a fitted leading coefficient from c * target; targets that vanish are measured
// against the natural scale sqrt(G(W,W) G(W',W')) instead.
double deviation(double lead, double c, double target, double ref) {
  const double denom = std::abs(c) * (std::abs(target) >= 0.1 * ref ? std::abs(target) : ref);
  return std::abs(lead - c * target) / denom;
}

// Leading k^2 coefficients of the pullback for one pair on one leaf.
struct PairFit {
  asymptotics::ExpansionFit omega_fit, g_fit;
  asymptotics::ExpansionFit omega_half, g_half;  // half-step basis, informational
  asymptotics::LadderReport omega_ladder, g_ladder;
  Series series;
};

std::vector<PairFit> pullback_fits(const LeafSetup& lf, const std::vector<leaf::LeafTangent>& w,
                                   const std::vector<std::pair<int, int>>& pairs, int l_max, int terms, double step) {
  std::set<int> used;
  for (auto [i, j] : pairs) {
    used.insert(i);
    used.insert(j);
  }
  std::vector<bpu::FlowData> data(w.size());
  for (int i : used) data[i] = bpu::flow_data(lf.loop, w[i].f);

  const int r = lf.lift.winding;
  std::vector<std::vector<asymptotics::Sample>> im(pairs.size()), re(pairs.size());
  std::vector<PairFit> out(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) out[p].series.name = pair_name(pairs[p].first, pairs[p].second);
  for (int l = 1; l <= l_max; ++l) {
    const int k = l * r;
    const bpu::LevelTable table(lf.lift, k);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const auto res = bpu::fs_pullback(table, lf.lift, lf.lambda, w[i], data[i], w[j], data[j]);
      out[p].series.rows.push_back({k, l, r, res.g_value, res.omega_value});
      im[p].push_back({double(k), res.omega_value});
      re[p].push_back({double(k), res.g_value});
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const double ref = std::sqrt(leaf::metric_g(w[i], w[i], lf.lambda) * leaf::metric_g(w[j], w[j], lf.lambda));
    const double kmax = double(l_max * r);
    out[p].omega_fit = asymptotics::fit_leading(asymptotics::top_half(im[p]), 2.0, terms, step);
    out[p].g_fit = asymptotics::fit_leading(asymptotics::top_half(re[p]), 2.0, terms, step);
    out[p].omega_half = asymptotics::fit_leading(asymptotics::top_half(im[p]), 2.0, terms, 0.5);
    out[p].g_half = asymptotics::fit_leading(asymptotics::top_half(re[p]), 2.0, terms, 0.5);
    out[p].omega_ladder = asymptotics::ladder_residual_check(asymptotics::top_half(im[p]), 2.0, 1, 1e-9, kmax * kmax * ref, step);
    out[p].g_ladder = asymptotics::ladder_residual_check(asymptotics::top_half(re[p]), 2.0, 1, 1e-9, kmax * kmax * ref, step);
  }
  return out;
}

double snap_constant(double measured) {
  const double allowed[] = {1.0, -1.0, 0.5, -0.5, 2.0, -2.0};
  double best = allowed[0];
  for (double a : allowed)
    if (std::abs(measured / a - 1.0) < std::abs(measured / best - 1.0)) best = a;
  return best;
}

// ---------------------------------------------------------------------------------------------
// Experiments

ExperimentResult run_norm_sweep(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto lf = make_leaf(cfg);
  const int r = cfg.r;
  Series norms{"norm", {}};
  std::vector<asymptotics::Sample> samples;
  for (int l = 1; l <= cfg.l_max; ++l) {
    const int k = l * r;
    const double v = bpu::bpu_map(lf.lift, lf.lambda, k).norm2();
    norms.rows.push_back({k, l, r, v, 0.0});
    samples.push_back({double(k), v});
  }
  const auto fit = asymptotics::fit_leading(asymptotics::top_half(samples), 0.5, cfg.terms, cfg.fit_step.value_or(0.5));
  const auto ladder = asymptotics::ladder_residual_check(asymptotics::top_half(samples), 0.5, 1, 1e-12, 0.0, cfg.fit_step.value_or(0.5));
  const double target = std::sqrt(2.0 / kPi) * r * r;
  const double rel = std::abs(fit.coefficients[0] / target - 1.0);
  res.fits.push_back({{"series", "norm"}, {"fit", io::fit_to_json(fit)}, {"ladder", io::ladder_to_json(ladder)},
                      {"target", target}, {"relative_deviation", rel}});
  bool positive = true;
  for (const auto& s : samples) positive = positive && s.value > 0.0;
  res.verdicts.push_back({"norm-leading", rel < cfg.tol.norm_rel && positive,
                          {{"leading", fit.coefficients[0]}, {"target", target}, {"relative_deviation", rel},
                           {"tolerance", cfg.tol.norm_rel}, {"all_positive", positive}}});

  Series vanish{"vanishing", {}};
  double worst = 0.0;
  for (int k = 1; k <= 60; ++k) {
    if (k % r == 0) continue;
    const double m = bpu::bpu_map(lf.lift, lf.lambda, k).u.max_abs();
    worst = std::max(worst, m);
    vanish.rows.push_back({k, 0, r, m, 0.0});
  }
  res.verdicts.push_back({"divisibility-vanishing", worst < cfg.tol.vanishing,
                          {{"max_coefficient", worst}, {"k_max", 60}, {"tolerance", cfg.tol.vanishing}}});
  res.series = {norms, vanish};
  res.smallest_admissible_k = smallest_admissible(lf, cfg.l_max);
  return res;
}

ExperimentResult run_theorem_check(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto& cal = calibrate_constants();
  res.c_omega = cal.c_omega;
  res.c_g = cal.c_g;
  res.verdicts.push_back({"global-constants", cal.admissible,
                          {{"omega_measured", cal.omega_measured}, {"g_measured", cal.g_measured},
                           {"c_omega", cal.c_omega}, {"c_g", cal.c_g}}});

  const auto lf = make_leaf(cfg);
  const auto specs = cfg.tangents.empty() ? default_theorem_tangents() : cfg.tangents;
  const auto pairs = cfg.pairs.empty() ? (cfg.tangents.empty() ? default_theorem_pairs()
                                                               : std::vector<std::pair<int, int>>{{0, 1}})
                                       : cfg.pairs;
  for (auto [i, j] : pairs)
    if (i < 0 || j < 0 || i >= int(specs.size()) || j >= int(specs.size())) bad("'pairs' index out of range");
  std::vector<leaf::LeafTangent> w;
  for (const auto& s : specs) w.push_back(make_tangent(lf, s));

  const auto fits = pullback_fits(lf, w, pairs, cfg.l_max, cfg.terms, cfg.fit_step.value_or(1.0));
  bool omega_ok = cal.admissible, g_ok = cal.admissible;
  json omega_detail = json::array(), g_detail = json::array();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const double om = leaf::omega(w[i], w[j], lf.lambda);
    const double gg = leaf::metric_g(w[i], w[j], lf.lambda);
    const double ref = std::sqrt(leaf::metric_g(w[i], w[i], lf.lambda) * leaf::metric_g(w[j], w[j], lf.lambda));
    const auto& pf = fits[p];
    const double dev_o = deviation(pf.omega_fit.coefficients[0], cal.c_omega, om, ref);
    const double dev_g = deviation(pf.g_fit.coefficients[0], cal.c_g, gg, ref);
    auto ladder_ok = [&](const asymptotics::LadderReport& l) {
      return l.inconclusive || l.slope <= l.predicted_slope + cfg.tol.ladder_band;
    };
    const bool lad_o = ladder_ok(pf.omega_ladder);
    const bool lad_g = ladder_ok(pf.g_ladder);
    omega_ok = omega_ok && dev_o < cfg.tol.theorem_rel && lad_o;
    g_ok = g_ok && dev_g < cfg.tol.theorem_rel && lad_g;
    const auto fi = bpu::f_integrand(w[i], w[j], lf.lambda);
    omega_detail.push_back({{"pair", {i, j}}, {"leading", pf.omega_fit.coefficients[0]}, {"Omega", om},
                            {"deviation", dev_o}, {"ladder_slope", pf.omega_ladder.slope},
                            {"ladder_inconclusive", pf.omega_ladder.inconclusive}});
    g_detail.push_back({{"pair", {i, j}}, {"leading", pf.g_fit.coefficients[0]}, {"G", gg}, {"deviation", dev_g},
                        {"ladder_slope", pf.g_ladder.slope}, {"ladder_inconclusive", pf.g_ladder.inconclusive}});
    res.fits.push_back({{"series", pf.series.name},
                        {"omega", {{"fit", io::fit_to_json(pf.omega_fit)}, {"half_step_fit", io::fit_to_json(pf.omega_half)},
                                   {"ladder", io::ladder_to_json(pf.omega_ladder)},
                                   {"target", om}, {"deviation", dev_o}}},
                        {"g", {{"fit", io::fit_to_json(pf.g_fit)}, {"half_step_fit", io::fit_to_json(pf.g_half)},
                               {"ladder", io::ladder_to_json(pf.g_ladder)},
                               {"target", gg}, {"deviation", dev_g}}},
                        {"integral_F", {fi.real(), fi.imag()}},
                        {"reference_scale", ref}});
    res.series.push_back(pf.series);
  }
  res.verdicts.push_back({"theorem-symplectic", omega_ok, {{"tolerance", cfg.tol.theorem_rel}, {"pairs", omega_detail}}});
  res.verdicts.push_back({"theorem-metric", g_ok, {{"tolerance", cfg.tol.theorem_rel}, {"pairs", g_detail}}});
  res.smallest_admissible_k = smallest_admissible(lf, cfg.l_max);
  return res;
}

ExperimentResult run_derivative_crosscheck(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto cal = bpu::calibrate_signs(cfg.nodes);
  res.signs = cal.signs;
  const bool frozen = cal.signs.theta == bpu::kFrozenSigns.theta && cal.signs.normal == bpu::kFrozenSigns.normal;
  res.verdicts.push_back({"sign-calibration", frozen,
                          {{"theta", cal.signs.theta},
                           {"normal", cal.signs.normal},
                           {"errors", {{cal.errors[0][0], cal.errors[0][1]}, {cal.errors[1][0], cal.errors[1][1]}}}}});

  const auto lf = make_leaf(cfg);
  const auto levels = cfg.levels.empty() ? std::vector<int>{8, 16, 32} : cfg.levels;
  for (int k : levels)
    if (k % cfg.r != 0) bad("'levels' must be multiples of r");
  const auto specs = tangents_or_random(cfg, 5);
  double worst = 0.0;
  json detail = json::array();
  for (std::size_t t = 0; t < specs.size(); ++t) {
    const auto w = make_tangent(lf, specs[t]);
    const auto data = bpu::flow_data(lf.loop, w.f);
    Series s{"tangent-" + std::to_string(t), {}};
    for (int k : levels) {
      const bpu::LevelTable table(lf.lift, k);
      const auto an = bpu::d_bpu(table, lf.lift, lf.lambda, w, data, false, cal.signs);
      const auto fd = bpu::fd_bpu_derivative(lf.lift, lf.lambda, w, k, false);
      const double e = bpu::relative_error(an, fd);
      worst = std::max(worst, e);
      s.rows.push_back({k, k / cfg.r, cfg.r, e, 0.0});
      detail.push_back({{"tangent", t}, {"k", k}, {"relative_error", e}});
    }
    res.series.push_back(std::move(s));
  }
  res.verdicts.push_back({"derivative-agreement", worst < cfg.tol.derivative_rel,
                          {{"max_relative_error", worst}, {"tolerance", cfg.tol.derivative_rel}, {"cases", detail}}});
  return res;
}

ExperimentResult run_profile(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto lf = make_leaf(cfg);
  const int k = cfg.profile_level;
  const auto state = bpu::bpu_map(lf.lift, lf.lambda, k);
  std::vector<double> ws;
  for (int i = 0; i <= 12; ++i) ws.push_back(cfg.profile_w_max * i / 12.0);
  Series normal{"normal", {}}, tangent{"tangent", {}};
  double worst_abs = 0.0, worst_rel = 0.0, worst_tan = 0.0;
  const std::size_t n = lf.loop->size();
  for (int b = 0; b < 4; ++b) {
    const std::size_t i = b * n / 4;
    const geometry::C2& x = lf.lift.points[i];
    for (const auto& row : bpu::pointwise_profile(state, *lf.loop, x, lf.lift.normal(i), ws)) {
      normal.rows.push_back({k, k / cfg.r, cfg.r, row.ratio, row.w});
      worst_abs = std::max(worst_abs, std::abs(row.ratio - row.gaussian));
      worst_rel = std::max(worst_rel, std::abs(row.ratio / row.gaussian - 1.0));
    }
    for (const auto& row : bpu::pointwise_profile(state, *lf.loop, x, lf.lift.tangents[i], ws)) {
      tangent.rows.push_back({k, k / cfg.r, cfg.r, row.ratio, row.w});
      worst_tan = std::max(worst_tan, std::abs(row.ratio - 1.0));
    }
  }
  res.series = {normal, tangent};
  res.verdicts.push_back({"profile-gaussian", worst_abs <= cfg.tol.profile_abs,
                          {{"k", k},
                           {"w_max", cfg.profile_w_max},
                           {"max_abs_deviation", worst_abs},
                           {"max_rel_deviation", worst_rel},
                           {"tangent_max_deviation", worst_tan},
                           {"tolerance", cfg.tol.profile_abs}}});
  return res;
}

ExperimentResult run_decay(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto lf = make_leaf(cfg);
  std::vector<int> levels = cfg.levels;
  if (levels.empty())
    for (int k = cfg.r; k <= 80; k += cfg.r) levels.push_back(k);
  const std::size_t n = lf.loop->size();
  bool ok = true;
  json detail = json::array();
  for (std::size_t p = 0; p < cfg.decay_distances.size(); ++p) {
    const std::size_t i = p * n / cfg.decay_distances.size();
    const geometry::C2 x = geometry::great_circle(lf.lift.points[i], lf.lift.normal(i), cfg.decay_distances[p]);
    const auto rep = bpu::decay_check(lf.lift, lf.lambda, x, levels);
    Series s{"point-" + std::to_string(p), {}};
    for (std::size_t q = 0; q < rep.k.size(); ++q) s.rows.push_back({rep.k[q], rep.k[q] / cfg.r, cfg.r, rep.values[q], 0.0});
    const bool pass = !rep.inconclusive && !rep.slopes.empty() && rep.slopes.back() < -cfg.tol.decay_slope;
    ok = ok && pass;
    detail.push_back({{"distance", rep.distance}, {"inconclusive", rep.inconclusive}, {"slopes", rep.slopes}, {"pass", pass}});
    res.series.push_back(std::move(s));
  }
  res.verdicts.push_back({"superpolynomial-decay", ok, {{"threshold", -cfg.tol.decay_slope}, {"points", detail}}});
  return res;
}

ExperimentResult run_identity_suite(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const auto lf = make_leaf(cfg);
  const auto specs = tangents_or_random(cfg, 20);
  std::vector<leaf::LeafTangent> w;
  for (const auto& s : specs) w.push_back(make_tangent(lf, s));

  double j2 = 0, compat = 0, psi = 0, anti = 0, sym = 0, cons = 0, herm = 0;
  bool vanishing = false;
  for (std::size_t a = 0; a < w.size(); ++a) {
    const auto [d1, d2] = leaf::constraint_defects(w[a], lf.lambda);
    cons = std::max({cons, std::abs(d1), std::abs(d2)});
    const auto& b = w[(a + 1) % w.size()];
    anti = std::max({anti, std::abs(leaf::omega(w[a], b, lf.lambda) + leaf::omega(b, w[a], lf.lambda)),
                     std::abs(leaf::omega(w[a], w[a], lf.lambda))});
    sym = std::max(sym, std::abs(leaf::metric_g(w[a], b, lf.lambda) - leaf::metric_g(b, w[a], lf.lambda)));
    psi = std::max(psi, std::abs(leaf::omega(w[a], b, lf.lambda) -
                                 leaf::omega_weinstein(leaf::psi_pushforward(w[a], lf.lambda),
                                                       leaf::psi_pushforward(b, lf.lambda))));
    herm = std::max(herm, std::abs(bpu::f_integrand(w[a], b, lf.lambda) - std::conj(bpu::f_integrand(b, w[a], lf.lambda))));
    try {
      const auto jw = leaf::j_map(w[a], lf.lambda);
      const auto jjw = leaf::j_map(jw, lf.lambda);
      j2 = std::max({j2, max_abs_diff(jjw.f, (-1.0 * w[a]).f), max_abs_diff(jjw.s_l, (-1.0 * w[a]).s_l)});
      compat = std::max(compat, std::abs(leaf::omega(w[a], leaf::j_map(b, lf.lambda), lf.lambda) -
                                         leaf::metric_g(w[a], b, lf.lambda)));
      const auto [e1, e2] = leaf::constraint_defects(jw, lf.lambda);
      cons = std::max({cons, std::abs(e1), std::abs(e2)});
    } catch (const VanishingHalfWeightError&) {
      vanishing = true;
    }
  }
  const double tol = cfg.tol.identity;
  json errors = {{"J_squared", j2},        {"Omega_J_equals_G", compat}, {"Psi_naturality", psi},
                 {"Omega_antisymmetry", anti}, {"G_symmetry", sym},      {"constraints", cons},
                 {"F_hermitian", herm}};
  bool ok = !vanishing;
  for (const auto& [k, v] : errors.items()) ok = ok && v.get<double>() < tol;
  res.verdicts.push_back({"algebraic-identities", ok,
                          {{"pairs", w.size()}, {"tolerance", tol}, {"errors", errors}, {"half_weight_vanishes", vanishing}}});

  // Holonomy order along one Hamiltonian isotopy, sampled every 0.01 in time. The field stays the
  // one built on the initial circle: re-deriving it from each flowed loop amplifies quadrature noise
  // by roughly 25x per step.
  Series iso{"isodrastic", {}};
  const auto f_spec = cfg.tangents.empty() ? std::vector<FourierMode>{{2, 0.5, 0.0}, {1, 0.0, 0.25}} : cfg.tangents[0].f;
  const auto wt = leaf::project_constraints(fourier_samples(*lf.loop, f_spec), std::vector<double>(lf.loop->size(), 0.0),
                                            lf.lambda);
  const leaf::NormalFlow flow(lf.loop, wt.f);
  const double tube = leaf::tube_half_width(*lf.loop);
  std::vector<double> phi(lf.loop->size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = lf.loop->grid().node(i);
  std::vector<geometry::C2> pts(lf.loop->reps().begin(), lf.loop->reps().end());
  bool constant_order = true;
  json orders = json::array();
  for (int step = 1; step <= 10; ++step) {
    pts = flow.flow(pts, phi, 0.01);
    double disp = 0.0;
    for (const auto& y : pts) disp = std::max(disp, lf.loop->distance_to(y));
    if (disp > tube) throw StepTooLargeError("isodrastic: deformation leaves the tubular neighbourhood");
    const geometry::LagrangianLoop moved(pts);
    const auto h = geometry::holonomy(moved);
    const int order = h.order ? *h.order : 0;
    constant_order = constant_order && order == cfg.r;
    orders.push_back(order);
    iso.rows.push_back({0, step, order, h.phase.real(), h.phase.imag()});
  }
  res.verdicts.push_back({"isodrastic-invariance", constant_order, {{"r", cfg.r}, {"orders", orders}, {"time_step", 0.01}}});
  res.series = {Series{"identities", {}}, iso};
  return res;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// -----------------------------------------------------------------------------------------------

const std::vector<ExperimentInfo>& experiment_catalog() { return kCatalog; }

std::pair<int, int> parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) bad("c must be a fraction \"p/r\", got \"" + text + "\"");
  auto parse_int = [&](const std::string& s) {
    if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      bad("c must be a fraction of non-negative integers, got \"" + text + "\"");
    return std::stoi(s);
  };
  int p = parse_int(text.substr(0, slash));
  int r = parse_int(text.substr(slash + 1));
  if (r == 0) bad("c has a zero denominator: \"" + text + "\"");
  const int g = std::gcd(p, r);
  if (g > 0) {
    p /= g;
    r /= g;
  }
  if (!(p > 0 && p < r)) bad("c must lie strictly between 0 and 1, got \"" + text + "\"");
  if (r > geometry::kMaxHolonomyOrder) bad("c must have denominator at most 64, got \"" + text + "\"");
  return {p, r};
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) bad("config must be a JSON object");
  static const std::set<std::string> known = {"experiment", "c",      "N",          "l_max",           "m",
                                              "half_weight", "tangents", "pairs",  "levels",          "profile",
                                              "decay",      "random_tangents", "seed", "tolerances", "output", "fit_step",
                                              "description"};
  for (const auto& [k, v] : doc.items())
    if (!known.count(k)) bad("unknown config key '" + k + "'");

  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) bad("config needs a string 'experiment'");
  const auto name = doc.at("experiment").get<std::string>();
  const auto it = std::find_if(kCatalog.begin(), kCatalog.end(), [&](const auto& e) { return name == e.name; });
  if (it == kCatalog.end()) bad("unknown experiment '" + name + "' (see list-experiments)");
  cfg.kind = it->kind;

  if (doc.contains("c")) {
    if (!doc.at("c").is_string()) bad("'c' must be a string \"p/r\"");
    std::tie(cfg.p, cfg.r) = parse_fraction(doc.at("c").get<std::string>());
  }
  if (doc.contains("N")) {
    const int n = get_int(doc, "N");
    if (n < 64 || (n & (n - 1)) != 0) bad("'N' must be a power of two >= 64");
    cfg.nodes = static_cast<std::size_t>(n);
  }
  if (doc.contains("m")) {
    cfg.terms = get_int(doc, "m");
    if (cfg.terms < 1 || cfg.terms > 6) bad("'m' must lie in 1..6");
  }
  if (doc.contains("fit_step")) {
    const double st = get_number(doc, "fit_step");
    if (st != 0.5 && st != 1.0) bad("'fit_step' must be 0.5 or 1");
    cfg.fit_step = st;
  }
  if (doc.contains("l_max")) {
    cfg.l_max = get_int(doc, "l_max");
    if (cfg.l_max < 2 * (cfg.terms + 2) || cfg.l_max > 1000) bad("'l_max' must lie in [2(m + 2), 1000]");
  }
  if (doc.contains("half_weight")) cfg.half_weight = parse_modes(doc.at("half_weight"), "half_weight", cfg.nodes);
  if (doc.contains("tangents")) {
    const auto& t = doc.at("tangents");
    if (!t.is_array()) bad("'tangents' must be an array");
    for (const auto& e : t) {
      if (!e.is_object()) bad("'tangents' entries must be objects with 'f' and/or 'g'");
      for (const auto& [k, v] : e.items())
        if (k != "f" && k != "g") bad("tangent: unknown key '" + k + "'");
      TangentSpec s;
      if (e.contains("f")) s.f = parse_modes(e.at("f"), "tangent f", cfg.nodes);
      if (e.contains("g")) s.g = parse_modes(e.at("g"), "tangent g", cfg.nodes);
      cfg.tangents.push_back(std::move(s));
    }
  }
  if (doc.contains("pairs")) {
    const auto& p = doc.at("pairs");
    if (!p.is_array()) bad("'pairs' must be an array of [i, j]");
    for (const auto& e : p) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        bad("'pairs' entries must be [i, j] integer pairs");
      const int i = e[0].get<int>(), j = e[1].get<int>();
      if (i < 0 || j < 0 || i >= int(cfg.tangents.size()) || j >= int(cfg.tangents.size()))
        bad("'pairs' refers to a tangent that is not defined");
      cfg.pairs.emplace_back(i, j);
    }
  }
  if (doc.contains("levels")) cfg.levels = parse_levels(doc.at("levels"), cfg.r);
  if (doc.contains("profile")) {
    const auto& p = doc.at("profile");
    if (!p.is_object()) bad("'profile' must be an object");
    if (p.contains("k")) cfg.profile_level = get_int(p, "k");
    if (p.contains("w_max")) cfg.profile_w_max = get_number(p, "w_max");
    if (!(cfg.profile_w_max > 0.0)) bad("'profile.w_max' must be positive");
  }
  if (!(doc.contains("profile") && doc.at("profile").contains("k"))) cfg.profile_level = (80 / cfg.r) * cfg.r;
  if (cfg.profile_level <= 0 || cfg.profile_level % cfg.r != 0) bad("'profile.k' must be a positive multiple of r");
  if (doc.contains("decay")) {
    const auto& d = doc.at("decay");
    if (!d.is_object() || !d.contains("distances") || !d.at("distances").is_array() || d.at("distances").empty())
      bad("'decay' must be an object with a non-empty 'distances' array");
    cfg.decay_distances.clear();
    for (const auto& e : d.at("distances")) {
      if (!e.is_number() || !(e.get<double>() > 0.0) || !(e.get<double>() < kPi / 2))
        bad("'decay.distances' must lie in (0, pi/2)");
      cfg.decay_distances.push_back(e.get<double>());
    }
  }
  if (doc.contains("random_tangents")) {
    cfg.random_tangents = get_int(doc, "random_tangents");
    if (cfg.random_tangents < 1 || cfg.random_tangents > 1000) bad("'random_tangents' must lie in 1..1000");
  } else {
    cfg.random_tangents = 0;
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      bad("'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) bad("'tolerances' must be an object");
    const std::pair<const char*, double*> slots[] = {
        {"norm_rel", &cfg.tol.norm_rel},         {"theorem_rel", &cfg.tol.theorem_rel},
        {"derivative_rel", &cfg.tol.derivative_rel}, {"profile_abs", &cfg.tol.profile_abs},
        {"decay_slope", &cfg.tol.decay_slope},   {"identity", &cfg.tol.identity},
        {"ladder_band", &cfg.tol.ladder_band},   {"vanishing", &cfg.tol.vanishing}};
    for (const auto& [k, v] : t.items()) {
      auto slot = std::find_if(std::begin(slots), std::end(slots), [&](const auto& s) { return k == s.first; });
      if (slot == std::end(slots)) bad("unknown tolerance '" + k + "'");
      const double x = get_number(t, slot->first);
      if (!(x > 0.0)) bad("tolerance '" + k + "' must be positive");
      *slot->second = x;
    }
  }
  if (doc.contains("output")) {
    if (!doc.at("output").is_string() || doc.at("output").get<std::string>().empty())
      bad("'output' must be a non-empty path stem");
    cfg.output = doc.at("output").get<std::string>();
  }
  return cfg;
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ExperimentResult::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const ConstantCalibration& calibrate_constants() {
  static const ConstantCalibration cal = [] {
    ExperimentConfig cfg;
    cfg.p = 1;
    cfg.r = 2;
    const auto lf = make_leaf(cfg);
    const std::vector<leaf::LeafTangent> w = {make_tangent(lf, {{{1, 1.0, 0.0}}, {}}),
                                              make_tangent(lf, {{}, {{1, 1.0, 0.0}}})};
    const auto fits = pullback_fits(lf, w, {{0, 1}, {0, 0}}, cfg.l_max, cfg.terms, 1.0);
    ConstantCalibration c;
    c.omega_measured = fits[0].omega_fit.coefficients[0] / leaf::omega(w[0], w[1], lf.lambda);
    c.g_measured = fits[1].g_fit.coefficients[0] / leaf::metric_g(w[0], w[0], lf.lambda);
    c.c_omega = snap_constant(c.omega_measured);
    c.c_g = snap_constant(c.g_measured);
    c.admissible = std::abs(c.omega_measured / c.c_omega - 1.0) < cfg.tol.theorem_rel &&
                   std::abs(c.g_measured / c.c_g - 1.0) < cfg.tol.theorem_rel;
    return c;
  }();
  return cal;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  try {
    switch (config.kind) {
      case ExperimentKind::NormSweep: return run_norm_sweep(config);
      case ExperimentKind::TheoremCheck: return run_theorem_check(config);
      case ExperimentKind::DerivativeCrosscheck: return run_derivative_crosscheck(config);
      case ExperimentKind::Profile: return run_profile(config);
      case ExperimentKind::Decay: return run_decay(config);
      case ExperimentKind::IdentitySuite: return run_identity_suite(config);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // Numerical failures inside a run are reported, not propagated.
    ExperimentResult res;
    res.verdicts.push_back({"execution", false, {{"error", e.what()}}});
    return res;
  }
  throw ContractViolation("run_experiment: unknown experiment kind");
}

std::string series_csv(const Series& s) {
  std::string out = "k,l,r,value_re,value_im\n";
  for (const auto& row : s.rows) {
    out += std::to_string(row.k) + "," + std::to_string(row.l) + "," + std::to_string(row.r) + "," +
           format_double(row.re) + "," + format_double(row.im) + "\n";
  }
  return out;
}

json manifest(const ExperimentConfig& config, const ExperimentResult& result) {
  json verdicts = json::array();
  for (const auto& v : result.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  const auto& info = *std::find_if(kCatalog.begin(), kCatalog.end(), [&](const auto& e) { return e.kind == config.kind; });
  json series = json::array();
  for (const auto& s : result.series) series.push_back({{"name", s.name}, {"rows", s.rows.size()}});
  return json{
      {"experiment", info.name},
      {"config", config.source},
      {"config_hash", config_hash(config.source)},
      {"c", std::to_string(config.p) + "/" + std::to_string(config.r)},
      {"N", config.nodes},
      {"tolerances",
       {{"norm_rel", config.tol.norm_rel},
        {"theorem_rel", config.tol.theorem_rel},
        {"derivative_rel", config.tol.derivative_rel},
        {"profile_abs", config.tol.profile_abs},
        {"decay_slope", config.tol.decay_slope},
        {"identity", config.tol.identity},
        {"ladder_band", config.tol.ladder_band},
        {"vanishing", config.tol.vanishing}}},
      {"calibrated_signs", {{"theta", result.signs.theta}, {"normal", result.signs.normal}}},
      {"c_omega", result.c_omega ? json(*result.c_omega) : json(nullptr)},
      {"c_g", result.c_g ? json(*result.c_g) : json(nullptr)},
      {"smallest_admissible_k", result.smallest_admissible_k ? json(*result.smallest_admissible_k) : json(nullptr)},
      {"fits", result.fits},
      {"series", series},
      {"verdicts", verdicts},
      {"pass", result.pass()},
  };
}

ReportFiles emit_report(const ExperimentConfig& config, const ExperimentResult& result, const std::string& stem) {
  namespace fs = std::filesystem;
  ReportFiles files;
  auto write = [](const std::string& path, const std::string& text) {
    std::error_code ec;
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
  };
  if (result.series.size() <= 1) {
    const Series empty{"", {}};
    const std::string path = stem + ".csv";
    write(path, series_csv(result.series.empty() ? empty : result.series.front()));
    files.csv.push_back(path);
  } else {
    for (const auto& s : result.series) {
      const std::string path = stem + "." + s.name + ".csv";
      write(path, series_csv(s));
      files.csv.push_back(path);
    }
  }
  files.manifest = stem + ".json";
  write(files.manifest, manifest(config, result).dump(2) + "\n");
  return files;
}

}  // namespace bpulab::cli
