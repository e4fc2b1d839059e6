#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mobgap/lattice.hpp"
#include "mobgap/spectral.hpp"

namespace mobgap {

enum class DecayKind { exponential, polynomial };

std::string to_string(DecayKind kind);

/// One observation value(x, y) at 1-norm distance |x - y| from source site x.
struct DecaySample {
  std::size_t source = 0;
  double distance = 0.0;
  double value = 0.0;
  /// Standard error of log(value); zero means unknown (ordinary least squares).
  double log_sigma = 0.0;
};

/// Log-domain least-squares fit of value <= amplitude |a(x)|^{-1} f(distance) with
/// f = e^{-rate d} (exponential) or (1 + d)^{-rate} (polynomial).
struct DecayFit {
  DecayKind kind = DecayKind::exponential;
  double amplitude = 0.0;
  double rate = 0.0;
  double log_amplitude_stderr = 0.0;
  double rate_stderr = 0.0;
  /// Per-source weights a(x), l1-normalized; empty when the fit is unweighted.
  std::vector<std::size_t> weight_sources;
  std::vector<double> weights;
  /// RMS of log-domain residuals.
  double residual = 0.0;
  /// Smallest over largest singular value of the design; 1 for well-posed unweighted fits.
  double identifiability = 1.0;
  std::size_t used = 0;
  std::size_t excluded = 0;

  /// Smallest C with value <= C f(d) on the given samples at this fit's rate.
  double envelope_amplitude(const std::vector<DecaySample>& samples) const;
};

/// Requires at least 10 samples above `floor` spanning two or more distances. Samples at or
/// below `floor` are excluded and counted in `excluded`.
DecayFit fit_decay(const std::vector<DecaySample>& samples, DecayKind kind, bool weighted = false,
                   double floor = 0.0);

/// Upper bound B(x,y) on sup over f in B_1(window) of |f(H)_xy|:
///   |chi_{(-inf,a]}(H)_xy| + |chi_{[b,inf)}(H)_xy| + sum_{lambda_n in window} |psi_n(x)| |psi_n(y)|.
RealMatrix b1_sup_bound(const SpectralDecomposition& dec, const EnergyWindow& window);
/// Rows of B for the given source sites only.
RealMatrix b1_sup_bound_rows(const SpectralDecomposition& dec, const EnergyWindow& window,
                             const std::vector<std::size_t>& sources);

struct FractionalMomentConfig {
  double s = 0.5;
  /// Positive imaginary parts; both signs are evaluated.
  std::vector<double> eta_grid;
  EnergyWindow window{-1.0, 1.0};
  int quad_nodes = 64;

  /// s = 0.5, 12 log-spaced eta from 1e-4 to 1, 64 energy nodes.
  static FractionalMomentConfig defaults(const EnergyWindow& window);
  void validate() const;
};

/// sup over +-eta of the Gauss-Legendre energy integral of |G(x,y;E + i eta)|^s over the window.
double greens_fractional_energy_integral(const SpectralDecomposition& dec, std::size_t x,
                                         std::size_t y, const FractionalMomentConfig& cfg);
/// Same for every target y at once.
std::vector<double> greens_fractional_energy_row(const SpectralDecomposition& dec, std::size_t x,
                                                 const FractionalMomentConfig& cfg);

struct CombesThomasReport {
  double distance = 0.0;         ///< dist(z, spectrum)
  double bound_amplitude = 0.0;  ///< 2 / dist
  double max_diagonal = 0.0;     ///< max_x |G(x,x;z)|
  /// Largest mu with |G(x,y;z)| <= (2/dist) e^{-mu dist |x-y|} on all pairs (inf if G is diagonal).
  double certified_rate = 0.0;
  std::optional<DecayFit> fit;   ///< absent when no off-diagonal element is nonzero
  bool pass = false;
};

/// Measures |G(x,y;z)| on every pair and checks the Combes-Thomas form. Requires
/// dist(z, spectrum) >= 0.5.
CombesThomasReport combes_thomas_check(const SpectralDecomposition& dec, cplx z);

struct PairStatistic {
  std::size_t source = 0;
  std::size_t target = 0;
  int distance = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct EnsembleResult {
  DecayFit fit;
  std::vector<PairStatistic> pairs;
  int n_samples = 0;
  /// rate / rate_stderr
  double significance = 0.0;
};

struct EnsembleOptions {
  int n_samples = 20;
  int jobs = 1;
  /// Sources of the measured rows; empty means the origin.
  std::vector<std::size_t> sources;
  /// Pairs whose mean falls below relative_floor^p times the largest mean are left out of the
  /// fit (p is the power of |G| in the integrand), since they sit at eigensolver round-off.
  double relative_floor = 1e-11;
};

/// Seed of the k-th realization of an ensemble.
std::uint64_t ensemble_seed(std::uint64_t base, std::size_t k);

/// sup over eta of E[|G(x,y;E + i eta)|^s], averaged over n_samples disorder realizations.
EnsembleResult ensemble_fractional_moment(const ModelSpec& spec, double energy,
                                          const FractionalMomentConfig& cfg,
                                          const EnsembleOptions& options);
/// sup over eta of eta E[|G(x,y;E + i eta)|^2].
EnsembleResult ensemble_second_moment(const ModelSpec& spec, double energy,
                                      const std::vector<double>& eta_grid,
                                      const EnsembleOptions& options);
/// E[B(x,y)] with B from b1_sup_bound.
EnsembleResult ensemble_b1_decay(const ModelSpec& spec, const EnergyWindow& window,
                                 const EnsembleOptions& options);

struct JensenCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  /// min over pairs of (mean_s)^{sigma/s} + 3 se_sigma - mean_sigma; negative means a violation.
  double worst_margin = 0.0;
};

/// Per-pair check mean_sigma <= (mean_s)^{sigma/s} + 3 standard errors for two fractional-moment
/// ensembles over the same pairs with sigma < s.
JensenCheck jensen_check(const EnsembleResult& low, double sigma, const EnsembleResult& high,
                         double s);

struct SuleReport {
  std::vector<std::size_t> states;   ///< eigenvalue indices inside the window
  std::vector<std::size_t> centers;  ///< argmax_x |psi_n(x)| per state
  std::vector<double> state_rates;   ///< per-state exponential rate, capped at 50
  double median_rate = 0.0;
  DecayFit joint_fit;
  /// Smallest C0 with |x_n| >= n^{1/2}/3 - C0 after sorting centers by |x_n| (n from 1).
  double growth_constant = 0.0;
};

inline constexpr double kSuleRateCap = 50.0;

SuleReport sule_analysis(const SpectralDecomposition& dec, const EnergyWindow& window,
                         double relative_floor = 1e-12);

/// Exact integral over the window of |(P_lambda - P'_lambda)_xy| d lambda; the integrand is
/// piecewise constant between merged eigenvalues.
double fermi_avg_projection_diff(const SpectralDecomposition& dec_a,
                                 const SpectralDecomposition& dec_b, const EnergyWindow& window,
                                 std::size_t x, std::size_t y);

struct CertificateThresholds {
  double min_width = 0.1;
  double max_amplitude = 5.0;
  double min_rate = 0.1;
  double max_weight_norm = 1.0;
  int max_degeneracy = 2;
  double min_greens_power = 0.0;

  bool operator==(const CertificateThresholds&) const = default;
};

struct CertificateOptions {
  /// Rows of B and of the Green's-function integral are measured from sites with
  /// |x|_inf <= probe_radius.
  int probe_radius = 1;
  bool weighted = false;
  double s = 0.5;
  int quad_nodes = 64;
  int eta_points = 12;
  double relative_floor = 1e-12;

  bool operator==(const CertificateOptions&) const = default;
};

struct CertificateClause {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct InsulatorCertificate {
  EnergyWindow window{-1.0, 1.0};
  EnergyWindow inner_window{-0.5, 0.5};
  int degeneracy = 0;
  DecayFit b1_fit;
  double b1_envelope_amplitude = 0.0;
  std::optional<DecayFit> greens_fit;
  std::vector<DecaySample> b1_samples;
  std::vector<DecaySample> greens_samples;
  CertificateThresholds thresholds;
  std::vector<CertificateClause> clauses;
  bool pass = false;
  int side = 0;
};

InsulatorCertificate insulator_certificate(const SpectralDecomposition& dec,
                                           const EnergyWindow& window,
                                           const CertificateThresholds& thresholds,
                                           const CertificateOptions& options = {});
InsulatorCertificate insulator_certificate(const BlockOperator& h, const EnergyWindow& window,
                                           const CertificateThresholds& thresholds,
                                           const CertificateOptions& options = {});

/// Sites with |x|_inf <= radius.
std::vector<std::size_t> central_sites(const LatticeBox& box, int radius);

}  // namespace mobgap
