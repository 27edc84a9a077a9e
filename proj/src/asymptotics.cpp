#include "bpulab/asymptotics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpulab/errors.hpp"

namespace bpulab::asymptotics {

namespace {

void require_increasing(std::span<const Sample> s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].k > s[i - 1].k)) throw ContractViolation("fit: k values must be distinct and increasing");
  for (const Sample& x : s)
    if (!(x.k > 0.0)) throw ContractViolation("fit: k values must be positive");
}

double exponent(double alpha, int h, double step = 0.5) { return alpha - step * h; }

}  // namespace

double ExpansionFit::evaluate(double k, int terms) const {
  const int n = terms < 0 ? m : std::min(terms, m);
  double s = 0.0;
  for (int h = 0; h < n; ++h) s += coefficients[h] * std::pow(k, exponent(alpha, h, step));
  return s;
}

ExpansionFit fit_leading(std::span<const Sample> samples, double alpha, int m, double step) {
  if (!(step > 0.0)) throw ContractViolation("fit_leading: exponent step must be positive");
  if (m < 1) throw ContractViolation("fit_leading: need at least one term");
  if (samples.size() < static_cast<std::size_t>(m + 2)) throw ContractViolation("fit_leading: need at least m + 2 samples");
  require_increasing(samples);
  const std::size_t n = samples.size();
  const double kmax = samples.back().k;
  Eigen::MatrixXd a(n, m);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int h = 0; h < m; ++h) a(i, h) = std::pow(samples[i].k / kmax, exponent(alpha, h, step));
    y(i) = samples[i].value;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition))
    throw IllConditionedError("fit_leading: basis is degenerate on this k-range; sample a wider range of k");
  const Eigen::VectorXd c = svd.solve(y);

  ExpansionFit fit;
  fit.alpha = alpha;
  fit.m = m;
  fit.step = step;
  fit.condition = cond;
  fit.k_min = samples.front().k;
  fit.k_max = kmax;
  fit.coefficients.resize(m);
  for (int h = 0; h < m; ++h) fit.coefficients[h] = c(h) / std::pow(kmax, exponent(alpha, h, step));
  double r2 = 0.0;
  for (const Sample& s : samples) {
    const double d = s.value - fit.evaluate(s.k);
    r2 += d * d;
  }
  fit.residual = std::sqrt(r2);
  return fit;
}

std::vector<Sample> top_half(std::span<const Sample> samples) {
  std::vector<Sample> out;
  if (samples.empty()) return out;
  const double cut = 0.5 * samples.back().k;
  for (const Sample& s : samples)
    if (s.k >= cut) out.push_back(s);
  return out;
}

LadderReport ladder_residual_check(std::span<const Sample> samples, double alpha, int m, double floor,
                                   double scale, double step) {
  LadderReport rep;
  rep.alpha = alpha;
  rep.m = m;
  rep.step = step;
  rep.predicted_slope = exponent(alpha, m, step);
  const ExpansionFit fit = fit_leading(samples, alpha, m + 2, step);

  const double kmax = samples.back().k;
  if (scale <= 0.0)
    for (const Sample& s : samples) scale = std::max(scale, std::abs(s.value));
  std::vector<double> lx, ly;
  double rmax = 0.0;
  for (const Sample& s : samples) {
    if (s.k < 0.5 * kmax) continue;
    const double r = s.value - fit.evaluate(s.k, m);
    rmax = std::max(rmax, std::abs(r));
    if (r != 0.0) {
      lx.push_back(std::log(s.k));
      ly.push_back(std::log(std::abs(r)));
    }
  }
  if (rmax <= floor * scale || lx.size() < 2) {
    rep.inconclusive = true;
    return rep;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  rep.slope = sxy / sxx;
  rep.nearest_rung = alpha - step * std::round((alpha - rep.slope) / step);
  rep.within_band = std::abs(rep.slope - rep.predicted_slope) <= 0.25;
  rep.pass = rep.slope <= rep.predicted_slope + 0.25;
  return rep;
}

DecayVerdict superpoly_decay(std::span<const Sample> samples) {
  require_increasing(samples);
  for (const Sample& s : samples)
    if (!(s.value >= 0.0)) throw ContractViolation("superpoly_decay: samples must be positive");
  DecayVerdict v;
  if (samples.size() < 2) return v;
  auto nearest = [&](double k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
      if (std::abs(samples[i].k - k) < std::abs(samples[best].k - k)) best = i;
    return best;
  };
  std::vector<std::pair<double, double>> dyads;  // (start k, slope), descending
  std::size_t hi = samples.size() - 1;
  while (true) {
    const std::size_t lo = nearest(0.5 * samples[hi].k);
    if (lo >= hi) break;
    const double a = samples[lo].value, b = samples[hi].value;
    double slope;
    if (b == 0.0)
      slope = -std::numeric_limits<double>::infinity();
    else if (a == 0.0)
      slope = std::numeric_limits<double>::infinity();
    else
      slope = std::log(b / a) / std::log(samples[hi].k / samples[lo].k);
    dyads.emplace_back(samples[lo].k, slope);
    hi = lo;
  }
  std::reverse(dyads.begin(), dyads.end());
  for (const auto& [k, s] : dyads) {
    v.dyad_start.push_back(k);
    v.slopes.push_back(s);
  }
  v.pass = !v.slopes.empty() && v.slopes.back() < kDecaySlope;
  return v;
}

}  // namespace bpulab::asymptotics
