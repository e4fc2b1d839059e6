#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

#include "mobgap/localization.hpp"
#include "mobgap/parallel.hpp"
#include "mobgap/rng.hpp"

namespace mobgap {

std::uint64_t ensemble_seed(std::uint64_t base, std::size_t k) {
  return rng::mix(base, rng::kEnsembleStream, k);
}

namespace {

// Fixed-shape recursion; the result depends only on the order of the input.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_ensemble(const ModelSpec& spec, const EnsembleOptions& options) {
  spec.validate();
  if (spec.disorder_width <= 0.0) {
    throw std::invalid_argument("ensemble averages need a disordered model (disorder_w > 0)");
  }
  if (options.n_samples < 20) {
    throw std::invalid_argument("ensemble averages need n_samples >= 20");
  }
}

std::vector<std::size_t> resolve_sources(const ModelSpec& spec, const EnsembleOptions& options) {
  if (!options.sources.empty()) return options.sources;
  return {spec.box().origin()};
}

/// One realization yields a (n_channels x n_targets) table; the result keeps, per target, the
/// channel whose sample mean is largest.
using Sampler = std::function<RealMatrix(const SpectralDecomposition&)>;

EnsembleResult run_ensemble(const ModelSpec& spec, const EnsembleOptions& options,
                            const std::vector<std::size_t>& sources, double floor_power,
                            const Sampler& sampler) {
  const auto n = static_cast<std::size_t>(options.n_samples);
  std::vector<RealMatrix> tables(n);
  parallel_for(n, options.jobs, [&](std::size_t k) {
    ModelSpec realization = spec;
    realization.seed = ensemble_seed(spec.seed, k);
    tables[k] = sampler(diagonalize(build_hamiltonian(realization)));
  });

  const Eigen::Index n_channels = tables.front().rows();
  const Eigen::Index n_targets = tables.front().cols();
  const std::size_t n_sites = spec.box().size();
  const LatticeBox box = spec.box();

  EnsembleResult result;
  result.n_samples = options.n_samples;
  std::vector<double> column(n);
  for (Eigen::Index t = 0; t < n_targets; ++t) {
    double best_mean = -1.0;
    double best_se = 0.0;
    for (Eigen::Index c = 0; c < n_channels; ++c) {
      for (std::size_t k = 0; k < n; ++k) column[k] = tables[k](c, t);
      const double mean = pairwise_sum(column) / static_cast<double>(n);
      for (double& x : column) x = (x - mean) * (x - mean);
      const double var = pairwise_sum(column) / static_cast<double>(n - 1);
      if (mean > best_mean) {
        best_mean = mean;
        best_se = std::sqrt(var / static_cast<double>(n));
      }
    }
    PairStatistic pair;
    pair.source = sources[static_cast<std::size_t>(t) / n_sites];
    pair.target = static_cast<std::size_t>(t) % n_sites;
    pair.distance = box.distance(pair.source, pair.target);
    pair.mean = best_mean;
    pair.std_error = best_se;
    result.pairs.push_back(pair);
  }

  double largest = 0.0;
  for (const PairStatistic& p : result.pairs) largest = std::max(largest, p.mean);
  const double floor = std::pow(options.relative_floor, floor_power) * largest;
  std::vector<DecaySample> samples;
  for (const PairStatistic& p : result.pairs) {
    // Delta method: se(log m) = se(m) / m.
    const double log_sigma = p.mean > 0.0 ? p.std_error / p.mean : 0.0;
    samples.push_back({p.source, static_cast<double>(p.distance), p.mean, log_sigma});
  }
  // Pairs whose spread is round-off (e.g. B(x,x) = 1 in every realization) get the smallest
  // statistical relative error, so no single pair dominates the weighted fit.
  constexpr double kRoundoffSigma = 1e-9;
  double min_sigma = std::numeric_limits<double>::infinity();
  for (const DecaySample& s : samples)
    if (s.log_sigma > kRoundoffSigma && s.value > floor) min_sigma = std::min(min_sigma, s.log_sigma);
  if (std::isfinite(min_sigma)) {
    for (DecaySample& s : samples)
      if (s.log_sigma <= kRoundoffSigma) s.log_sigma = min_sigma;
  }
  result.fit = fit_decay(samples, DecayKind::exponential, false, floor);
  result.significance = result.fit.rate_stderr > 0.0 ? result.fit.rate / result.fit.rate_stderr
                                                     : std::numeric_limits<double>::infinity();
  return result;
}

/// Stacks the per-source resolvent norm rows; channel k is z_k.
RealMatrix resolvent_table(const SpectralDecomposition& dec, const std::vector<std::size_t>& sources,
                           const std::vector<cplx>& zs, const std::function<double(double, double)>& f,
                           const std::vector<double>& eta_of) {
  const auto n_sites = static_cast<Eigen::Index>(dec.box().size());
  RealMatrix table(static_cast<Eigen::Index>(zs.size()),
                   n_sites * static_cast<Eigen::Index>(sources.size()));
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const RealMatrix norms = resolvent_row_norms(dec, sources[k], zs);
    for (Eigen::Index c = 0; c < norms.rows(); ++c)
      for (Eigen::Index y = 0; y < n_sites; ++y) {
        table(c, static_cast<Eigen::Index>(k) * n_sites + y) =
            f(norms(c, y), eta_of[static_cast<std::size_t>(c)]);
      }
  }
  return table;
}

void signed_etas(double energy, const std::vector<double>& eta_grid, std::vector<cplx>& zs,
                 std::vector<double>& eta_of) {
  for (double eta : eta_grid) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta grid entries must be positive");
    for (double sign : {1.0, -1.0}) {
      zs.emplace_back(energy, sign * eta);
      eta_of.push_back(eta);
    }
  }
}

}  // namespace

EnsembleResult ensemble_fractional_moment(const ModelSpec& spec, double energy,
                                          const FractionalMomentConfig& cfg,
                                          const EnsembleOptions& options) {
  require_ensemble(spec, options);
  if (!(cfg.s > 0.0 && cfg.s < 1.0)) throw std::invalid_argument("s must lie in (0, 1)");
  if (cfg.eta_grid.empty()) throw std::invalid_argument("empty eta grid");
  const std::vector<std::size_t> sources = resolve_sources(spec, options);
  std::vector<cplx> zs;
  std::vector<double> eta_of;
  signed_etas(energy, cfg.eta_grid, zs, eta_of);
  const double s = cfg.s;
  return run_ensemble(spec, options, sources, s, [&](const SpectralDecomposition& dec) {
    return resolvent_table(dec, sources, zs, [s](double g, double) { return std::pow(g, s); },
                           eta_of);
  });
}

EnsembleResult ensemble_second_moment(const ModelSpec& spec, double energy,
                                      const std::vector<double>& eta_grid,
                                      const EnsembleOptions& options) {
  require_ensemble(spec, options);
  if (eta_grid.empty()) throw std::invalid_argument("empty eta grid");
  const std::vector<std::size_t> sources = resolve_sources(spec, options);
  std::vector<cplx> zs;
  std::vector<double> eta_of;
  signed_etas(energy, eta_grid, zs, eta_of);
  return run_ensemble(spec, options, sources, 2.0, [&](const SpectralDecomposition& dec) {
    return resolvent_table(dec, sources, zs, [](double g, double eta) { return eta * g * g; },
                           eta_of);
  });
}

EnsembleResult ensemble_b1_decay(const ModelSpec& spec, const EnergyWindow& window,
                                 const EnsembleOptions& options) {
  require_ensemble(spec, options);
  const std::vector<std::size_t> sources = resolve_sources(spec, options);
  return run_ensemble(spec, options, sources, 1.0, [&](const SpectralDecomposition& dec) {
    const RealMatrix rows = b1_sup_bound_rows(dec, window, sources);
    RealMatrix flat(1, rows.size());
    for (Eigen::Index k = 0; k < rows.rows(); ++k)
      flat.block(0, k * rows.cols(), 1, rows.cols()) = rows.row(k);
    return flat;
  });
}

JensenCheck jensen_check(const EnsembleResult& low, double sigma, const EnsembleResult& high,
                         double s) {
  if (!(sigma > 0.0 && sigma < s && s < 1.0)) {
    throw std::invalid_argument("jensen_check needs 0 < sigma < s < 1");
  }
  if (low.pairs.size() != high.pairs.size()) {
    throw std::invalid_argument("jensen_check: ensembles cover different pairs");
  }
  JensenCheck check;
  check.pairs = low.pairs.size();
  check.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < low.pairs.size(); ++k) {
    const PairStatistic& a = low.pairs[k];
    const PairStatistic& b = high.pairs[k];
    if (a.source != b.source || a.target != b.target) {
      throw std::invalid_argument("jensen_check: ensembles cover different pairs");
    }
    const double margin = std::pow(b.mean, sigma / s) + 3.0 * a.std_error - a.mean;
    check.worst_margin = std::min(check.worst_margin, margin);
    if (margin < 0.0) ++check.violations;
  }
  return check;
}

}  // namespace mobgap
