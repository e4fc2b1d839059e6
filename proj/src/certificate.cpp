#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobgap/localization.hpp"
#include "mobgap/quadrature.hpp"

namespace mobgap {

namespace {

CertificateClause clause(std::string name, double measured, double threshold, bool pass) {
  return {std::move(name), measured, threshold, pass};
}

}  // namespace

InsulatorCertificate insulator_certificate(const SpectralDecomposition& dec,
                                           const EnergyWindow& window,
                                           const CertificateThresholds& thresholds,
                                           const CertificateOptions& options) {
  InsulatorCertificate cert;
  cert.window = window;
  cert.thresholds = thresholds;
  cert.side = dec.box().side();
  const double quarter = window.width() / 4.0;
  cert.inner_window = EnergyWindow(window.lower + quarter, window.upper - quarter);
  cert.degeneracy = max_degeneracy(dec, window);

  const LatticeBox& box = dec.box();
  const std::vector<std::size_t> probes = central_sites(box, options.probe_radius);

  const RealMatrix b = b1_sup_bound_rows(dec, window, probes);
  double b_max = 0.0;
  for (std::size_t k = 0; k < probes.size(); ++k)
    for (std::size_t y = 0; y < box.size(); ++y) {
      const double value = b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(y));
      b_max = std::max(b_max, value);
      cert.b1_samples.push_back(
          {probes[k], static_cast<double>(box.distance(probes[k], y)), value, 0.0});
    }

  cert.clauses.push_back(clause("window_width", window.width(), thresholds.min_width,
                                window.width() >= thresholds.min_width));
  cert.clauses.push_back(clause("degeneracy", cert.degeneracy, thresholds.max_degeneracy,
                                cert.degeneracy <= thresholds.max_degeneracy));

  bool fitted = true;
  try {
    cert.b1_fit = fit_decay(cert.b1_samples, DecayKind::exponential, options.weighted,
                            options.relative_floor * b_max);
    cert.b1_envelope_amplitude = cert.b1_fit.envelope_amplitude(cert.b1_samples);
  } catch (const std::invalid_argument&) {
    fitted = false;
  }
  cert.clauses.push_back(clause("amplitude", fitted ? cert.b1_envelope_amplitude : INFINITY,
                                thresholds.max_amplitude,
                                fitted && cert.b1_envelope_amplitude <= thresholds.max_amplitude));
  cert.clauses.push_back(clause("rate", fitted ? cert.b1_fit.rate : 0.0, thresholds.min_rate,
                                fitted && cert.b1_fit.rate >= thresholds.min_rate));
  if (options.weighted && fitted) {
    double l1 = 0.0;
    for (double a : cert.b1_fit.weights) l1 += std::abs(a);
    cert.clauses.push_back(clause("weight_l1", l1, thresholds.max_weight_norm,
                                  l1 <= thresholds.max_weight_norm * (1.0 + 1e-12)));
  }

  FractionalMomentConfig fm;
  fm.s = options.s;
  fm.window = cert.inner_window;
  fm.quad_nodes = options.quad_nodes;
  fm.eta_grid = log_grid(1e-4, 1.0, options.eta_points);
  double g_max = 0.0;
  for (std::size_t x : probes) {
    const std::vector<double> row = greens_fractional_energy_row(dec, x, fm);
    for (std::size_t y = 0; y < box.size(); ++y) {
      g_max = std::max(g_max, row[y]);
      cert.greens_samples.push_back({x, static_cast<double>(box.distance(x, y)), row[y], 0.0});
    }
  }
  try {
    cert.greens_fit = fit_decay(cert.greens_samples, DecayKind::polynomial, false,
                                options.relative_floor * g_max);
  } catch (const std::invalid_argument&) {
    cert.greens_fit.reset();
  }
  const double power = cert.greens_fit ? cert.greens_fit->rate : INFINITY;
  cert.clauses.push_back(clause("greens_power", power, thresholds.min_greens_power,
                                power >= thresholds.min_greens_power));

  cert.pass = std::all_of(cert.clauses.begin(), cert.clauses.end(),
                          [](const CertificateClause& c) { return c.pass; });
  return cert;
}

InsulatorCertificate insulator_certificate(const BlockOperator& h, const EnergyWindow& window,
                                           const CertificateThresholds& thresholds,
                                           const CertificateOptions& options) {
  return insulator_certificate(diagonalize(h), window, thresholds, options);
}

}  // namespace mobgap
