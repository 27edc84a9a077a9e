#pragma once

// Least-squares fits of sampled sequences to truncated half-power expansions
// c_0 k^alpha + c_1 k^(alpha - 1/2) + ..., plus decay diagnostics.

#include <optional>
#include <span>
#include <vector>

namespace bpulab::asymptotics {

struct Sample {
  double k = 0.0;
  double value = 0.0;
};

struct ExpansionFit {
  double alpha = 0.0;
  int m = 0;
  double step = 0.5;  // exponents alpha, alpha - step, ...
  std::vector<double> coefficients;
  double residual = 0.0;   // Euclidean misfit on the fitted samples
  double condition = 0.0;  // of the column-normalized basis
  double k_min = 0.0;
  double k_max = 0.0;

  double evaluate(double k, int terms = -1) const;
};

inline constexpr double kMaxCondition = 1e12;

/// Fit on all given samples; needs at least m + 2 strictly increasing k values.
ExpansionFit fit_leading(std::span<const Sample> samples, double alpha, int m, double step = 0.5);

/// Samples with k >= k_max / 2 (the default fit window).
std::vector<Sample> top_half(std::span<const Sample> samples);

struct LadderReport {
  double alpha = 0.0;
  int m = 0;
  double step = 0.5;
  double predicted_slope = 0.0;  // alpha - m step
  double slope = 0.0;            // log-log slope of the residual over the top dyad
  double nearest_rung = 0.0;     // alpha - h step closest to the measured slope
  bool inconclusive = false;     // residual at the numerical floor
  bool within_band = false;      // |slope - predicted| <= 0.25
  bool pass = false;             // residual shrinks at least as fast as predicted (slope <= predicted + 0.25)
};

/// Fits m + 2 terms, removes the first m and regresses log|remainder| on log k over the top dyad.
/// The remainder counts as numerical floor below floor * scale (scale defaults to max |value|).
LadderReport ladder_residual_check(std::span<const Sample> samples, double alpha, int m, double floor = 1e-12,
                                   double scale = 0.0, double step = 0.5);

struct DecayVerdict {
  std::vector<double> dyad_start;  // lower k of each dyad
  std::vector<double> slopes;
  bool pass = false;  // final slope below -10
};

inline constexpr double kDecaySlope = -10.0;

/// Per-dyad log-log slopes of positive samples, dyads descending from k_max by halving.
DecayVerdict superpoly_decay(std::span<const Sample> samples);

}  // namespace bpulab::asymptotics
