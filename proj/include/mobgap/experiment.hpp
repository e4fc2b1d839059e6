#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mobgap/chern.hpp"
#include "mobgap/lattice.hpp"
#include "mobgap/localization.hpp"

namespace mobgap {

enum class PerturbationKind { random_onsite, staggered, uniform };

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& text);

/// On-site V with |V_xx| <= 1: i.i.d. uniform on [-1, 1] per orbital, (-1)^{x1+x2}, or 1.
struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::random_onsite;
  std::uint64_t seed = 1;

  bool operator==(const PerturbationSpec&) const = default;
};

BlockOperator build_perturbation(const LatticeBox& box, int orbitals, const PerturbationSpec& spec);

/// Everything one run needs. Text form: one `key = value` per line, `#` starts a comment,
/// lists are comma separated, `hopping = dx,dy,from,to,re,im` may repeat.
struct ExperimentConfig {
  ModelSpec model;
  /// Disorder seeds visited by multi-seed runs; empty means {model.seed}.
  std::vector<std::uint64_t> seeds;
  PerturbationSpec perturbation;
  std::vector<double> t_grid{0.0};
  double fermi_energy = 0.0;
  double window_lower = -0.5;
  double window_upper = 0.5;
  std::string switch_name = "sharp";
  int trace_radius = -1;
  double chern_tolerance = 0.05;
  CertificateThresholds thresholds;
  CertificateOptions certificate;
  /// Certified pairs closer than this in d_l must share a Chern number.
  double falsification_distance = 0.25;

  std::string scan_kind = "fermi";
  double scan_lower = 0.0;
  double scan_upper = 0.0;
  int scan_points = 0;

  double fm_s = 0.5;
  int fm_samples = 20;
  double fm_eta_min = 1e-4;
  double fm_eta_max = 1.0;
  int fm_eta_points = 12;

  int contour_nodes = 200;

  std::string output;
  int jobs = 1;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  EnergyWindow window() const { return {window_lower, window_upper}; }
  std::vector<std::uint64_t> seed_list() const;
  FractionalMomentConfig fractional_moment() const;
};

/// Throws ConfigError on unknown keys, malformed values and missing required keys
/// (`kind` and `L`).
ExperimentConfig parse_config(const std::string& text);
/// Every key in a fixed order; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

using Cell = std::variant<long long, double, std::string, bool>;

/// Tabular result of one subcommand with trailing key/value metadata.
struct Report {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> metadata;
  /// Set by runs that observe a certified pair with different Chern numbers.
  bool falsified = false;

  void add_meta(std::string key, Cell value) { metadata.emplace_back(std::move(key), std::move(value)); }
};

enum class ReportFormat { csv, json };

/// CSV: "# schema: mobgap-<kind>/1", header, rows, then "# key = value" lines. Floats use 17
/// significant digits.
std::string emit_report(const Report& report, ReportFormat format);
std::string format_double(double value);

Report run_continuity_experiment(const ExperimentConfig& cfg);
/// scan_kind "fermi" sweeps E_F, "disorder" sweeps W; scan_points == 0 gives an empty report.
Report run_scan(const ExperimentConfig& cfg);

/// Local distance between H and H + tV for every t in t_grid.
Report run_metric(const ExperimentConfig& cfg);
/// One-row metric report for two operators read from dumps (t is NaN).
Report run_metric_operators(const BlockOperator& a, const BlockOperator& b);
Report run_spectrum(const ExperimentConfig& cfg);
Report run_contour_check(const ExperimentConfig& cfg);
Report run_chern(const ExperimentConfig& cfg);
Report run_chern_scan(const ExperimentConfig& cfg);
Report run_certify(const ExperimentConfig& cfg);
Report run_fmm_ensemble(const ExperimentConfig& cfg);
Report run_sule(const ExperimentConfig& cfg);

}  // namespace mobgap
