#pragma once

// Configuration-driven experiments tying the modules together, and their reports.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bpulab/bpu.hpp"
#include "json.hpp"

namespace bpulab::cli {

using nlohmann::json;

enum class ExperimentKind { NormSweep, TheoremCheck, DerivativeCrosscheck, Profile, Decay, IdentitySuite };

struct ExperimentInfo {
  ExperimentKind kind;
  const char* name;
  const char* summary;
};

/// Every experiment the runner knows, in a fixed order.
const std::vector<ExperimentInfo>& experiment_catalog();

/// a_m cos(m phi) + b_m sin(m phi).
struct FourierMode {
  int m = 0;
  double cos = 0.0;
  double sin = 0.0;
};

/// Tangent W(f, g lambda) given by Fourier descriptors of f and g.
struct TangentSpec {
  std::vector<FourierMode> f;
  std::vector<FourierMode> g;
};

struct Tolerances {
  double norm_rel = 0.01;
  double theorem_rel = 0.03;
  double derivative_rel = 1e-3;
  double profile_abs = 0.02;
  double decay_slope = 10.0;  // slopes must fall below -decay_slope
  double identity = 1e-9;
  double ladder_band = 0.25;
  double vanishing = 1e-11;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::NormSweep;
  int p = 1;
  int r = 2;
  std::size_t nodes = 512;
  int l_max = 40;
  int terms = 3;
  std::optional<double> fit_step;  // exponent spacing of the fit basis; per-experiment default
  std::vector<FourierMode> half_weight{{0, 1.0, 0.0}};
  std::vector<TangentSpec> tangents;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> levels;               // derivative-crosscheck, decay
  int profile_level = 80;
  double profile_w_max = 1.5;
  std::vector<double> decay_distances{0.45, 0.55, 0.65};
  int random_tangents = 5;
  std::uint64_t seed = 1;
  Tolerances tol;
  std::string output;  // path stem; empty means no files
  json source;         // the document as given
};

/// Validates and fills defaults; throws ConfigError on any problem.
ExperimentConfig parse_config(const json& doc);

/// "p/r" in lowest terms, 0 < p/r < 1, r <= 64.
std::pair<int, int> parse_fraction(const std::string& text);

/// FNV-1a (64 bit) of the canonical dump, as 16 hex digits.
std::string config_hash(const json& doc);

struct Row {
  int k = 0;
  int l = 0;
  int r = 0;
  double re = 0.0;
  double im = 0.0;
};

struct Series {
  std::string name;
  std::vector<Row> rows;
};

struct Verdict {
  std::string name;
  bool pass = false;
  json detail;
};

struct ExperimentResult {
  std::vector<Series> series;
  json fits = json::array();
  std::vector<Verdict> verdicts;
  bpu::ConventionSigns signs = bpu::kFrozenSigns;
  std::optional<double> c_omega;
  std::optional<double> c_g;
  std::optional<int> smallest_admissible_k;

  bool pass() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Global constants relating the leading pullback coefficients to Omega and G.
struct ConstantCalibration {
  double omega_measured = 0.0;
  double g_measured = 0.0;
  double c_omega = 0.0;  // nearest of +-1, +-1/2, +-2
  double c_g = 0.0;
  bool admissible = false;
};

/// Measured once per process on the r = 2 equator (W = (cos phi, 0), W' = (0, cos phi lambda)
/// for Omega, W = W' = (cos phi, 0) for G).
const ConstantCalibration& calibrate_constants();

struct ReportFiles {
  std::vector<std::string> csv;
  std::string manifest;
};

/// Writes `<stem>.csv` (or `<stem>.<series>.csv` per series) and `<stem>.json`.
ReportFiles emit_report(const ExperimentConfig& config, const ExperimentResult& result, const std::string& stem);

/// The manifest document written by emit_report.
json manifest(const ExperimentConfig& config, const ExperimentResult& result);

/// CSV text of one series (header only when empty).
std::string series_csv(const Series& s);

}  // namespace bpulab::cli
