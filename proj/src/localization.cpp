#include "mobgap/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "mobgap/quadrature.hpp"

namespace mobgap {

std::string to_string(DecayKind kind) {
  return kind == DecayKind::exponential ? "exponential" : "polynomial";
}

namespace {

double decay_abscissa(DecayKind kind, double distance) {
  return kind == DecayKind::exponential ? distance : std::log1p(distance);
}

}  // namespace

double DecayFit::envelope_amplitude(const std::vector<DecaySample>& samples) const {
  std::map<std::size_t, double> weight_of;
  for (std::size_t k = 0; k < weights.size(); ++k) weight_of[weight_sources[k]] = weights[k];
  double c = 0.0;
  for (const DecaySample& s : samples) {
    if (!(s.value > 0.0)) continue;
    double factor = 1.0;
    if (auto it = weight_of.find(s.source); it != weight_of.end()) factor = it->second;
    c = std::max(c, s.value * factor * std::exp(rate * decay_abscissa(kind, s.distance)));
  }
  return c;
}

DecayFit fit_decay(const std::vector<DecaySample>& samples, DecayKind kind, bool weighted,
                   double floor) {
  std::vector<const DecaySample*> used;
  bool any_positive = false;
  for (const DecaySample& s : samples) {
    any_positive = any_positive || s.value > 0.0;
    if (s.value > floor && s.value > 0.0 && std::isfinite(s.value)) used.push_back(&s);
  }
  if (!any_positive) throw std::invalid_argument("fit_decay: every sample is zero");
  if (used.size() < 10) {
    throw std::invalid_argument("fit_decay: needs at least 10 positive samples above the floor, got " +
                                std::to_string(used.size()));
  }
  const double d0 = used.front()->distance;
  if (std::all_of(used.begin(), used.end(), [&](const DecaySample* s) { return s->distance == d0; })) {
    throw std::invalid_argument("fit_decay: all samples share one distance");
  }

  std::vector<std::size_t> sources;
  if (weighted) {
    std::set<std::size_t> distinct;
    for (const DecaySample* s : used) distinct.insert(s->source);
    sources.assign(distinct.begin(), distinct.end());
  }
  const bool known_sigma =
      std::all_of(used.begin(), used.end(), [](const DecaySample* s) { return s->log_sigma > 0.0; });

  // Columns: one intercept per source (or a single one), then -abscissa for the rate.
  const auto n = static_cast<Eigen::Index>(used.size());
  const auto n_icpt = static_cast<Eigen::Index>(weighted ? sources.size() : 1);
  const Eigen::Index p = n_icpt + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, p);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DecaySample& s = *used[static_cast<std::size_t>(i)];
    const double w = known_sigma ? 1.0 / s.log_sigma : 1.0;
    Eigen::Index col = 0;
    if (weighted) {
      col = std::lower_bound(sources.begin(), sources.end(), s.source) - sources.begin();
    }
    a(i, col) = w;
    a(i, n_icpt) = -w * decay_abscissa(kind, s.distance);
    rhs(i) = w * std::log(s.value);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv(p - 1) > 1e-12 * sv(0))) {
    throw std::invalid_argument("fit_decay: design matrix is rank deficient");
  }
  const Eigen::VectorXd beta = svd.solve(rhs);
  const Eigen::VectorXd res = rhs - a * beta;
  const double dof = static_cast<double>(std::max<Eigen::Index>(n - p, 1));
  const double scale2 = known_sigma ? 1.0 : res.squaredNorm() / dof;
  const Eigen::MatrixXd cov =
      scale2 * svd.matrixV() * sv.cwiseInverse().cwiseAbs2().asDiagonal() * svd.matrixV().transpose();

  DecayFit fit;
  fit.kind = kind;
  fit.rate = beta(n_icpt);
  fit.rate_stderr = std::sqrt(std::max(cov(n_icpt, n_icpt), 0.0));
  fit.used = used.size();
  fit.excluded = samples.size() - used.size();

  double rss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const DecaySample& s = *used[static_cast<std::size_t>(i)];
    const Eigen::Index col =
        weighted ? std::lower_bound(sources.begin(), sources.end(), s.source) - sources.begin() : 0;
    const double r = std::log(s.value) - beta(col) + fit.rate * decay_abscissa(kind, s.distance);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / static_cast<double>(n));

  if (!weighted) {
    fit.amplitude = std::exp(beta(0));
    fit.log_amplitude_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.identifiability = 1.0;
    return fit;
  }
  // a(x) = C e^{-beta_x} with sum_x a(x) = 1.
  const double shift = beta.head(n_icpt).minCoeff();
  Eigen::VectorXd e = (-(beta.head(n_icpt).array() - shift)).exp().matrix();
  const double total = e.sum();
  fit.amplitude = std::exp(shift) / total;
  fit.weight_sources = sources;
  fit.weights.resize(sources.size());
  for (Eigen::Index k = 0; k < n_icpt; ++k) fit.weights[static_cast<std::size_t>(k)] = e(k) / total;
  // d log C / d beta_x = a(x)
  const Eigen::VectorXd grad = e / total;
  fit.log_amplitude_stderr =
      std::sqrt(std::max((grad.transpose() * cov.topLeftCorner(n_icpt, n_icpt) * grad)(0, 0), 0.0));
  fit.identifiability = sv(p - 1) / sv(0);
  return fit;
}

std::vector<std::size_t> central_sites(const LatticeBox& box, int radius) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < box.size(); ++s) {
    const Site& x = box.site(s);
    if (std::max(std::abs(x[0]), std::abs(x[1])) <= radius) out.push_back(s);
  }
  return out;
}

RealMatrix b1_sup_bound_rows(const SpectralDecomposition& dec, const EnergyWindow& window,
                             const std::vector<std::size_t>& sources) {
  const Eigen::VectorXd& ev = dec.eigenvalues();
  const Matrix& v = dec.eigenvectors();
  const int n_orb = dec.orbitals();
  const auto n_sites = static_cast<Eigen::Index>(dec.box().size());
  const auto n_src = static_cast<Eigen::Index>(sources.size());
  const Eigen::Index n_states = ev.size();

  const Eigen::Index n_below =
      std::upper_bound(ev.data(), ev.data() + n_states, window.lower) - ev.data();
  const Eigen::Index first_above =
      std::lower_bound(ev.data(), ev.data() + n_states, window.upper) - ev.data();
  const Eigen::Index n_above = n_states - first_above;
  const Eigen::Index n_inside = first_above - n_below;

  Matrix src_rows(n_src * n_orb, n_states);
  for (Eigen::Index k = 0; k < n_src; ++k) {
    src_rows.middleRows(k * n_orb, n_orb) =
        v.middleRows(static_cast<Eigen::Index>(sources[static_cast<std::size_t>(k)]) * n_orb, n_orb);
  }
  const Matrix below = src_rows.leftCols(n_below) * v.leftCols(n_below).adjoint();
  const Matrix above = src_rows.rightCols(n_above) * v.rightCols(n_above).adjoint();

  // |psi_n(y)| for states inside the window.
  RealMatrix amp(n_sites, n_inside);
  for (Eigen::Index y = 0; y < n_sites; ++y)
    for (Eigen::Index n = 0; n < n_inside; ++n) {
      amp(y, n) = v.block(y * n_orb, n_below + n, n_orb, 1).norm();
    }
  RealMatrix src_amp(n_src, n_inside);
  for (Eigen::Index k = 0; k < n_src; ++k) {
    src_amp.row(k) = amp.row(static_cast<Eigen::Index>(sources[static_cast<std::size_t>(k)]));
  }
  RealMatrix out = src_amp * amp.transpose();
  for (Eigen::Index k = 0; k < n_src; ++k)
    for (Eigen::Index y = 0; y < n_sites; ++y) {
      out(k, y) += spectral_norm(below.block(k * n_orb, y * n_orb, n_orb, n_orb)) +
                   spectral_norm(above.block(k * n_orb, y * n_orb, n_orb, n_orb));
    }
  return out;
}

RealMatrix b1_sup_bound(const SpectralDecomposition& dec, const EnergyWindow& window) {
  std::vector<std::size_t> all(dec.box().size());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  return b1_sup_bound_rows(dec, window, all);
}

FractionalMomentConfig FractionalMomentConfig::defaults(const EnergyWindow& window) {
  FractionalMomentConfig cfg;
  cfg.window = window;
  cfg.eta_grid = log_grid(1e-4, 1.0, 12);
  return cfg;
}

void FractionalMomentConfig::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional moment: s must lie in (0, 1)");
  if (eta_grid.empty()) throw std::invalid_argument("fractional moment: empty eta grid");
  for (double eta : eta_grid) {
    if (!(eta > 0.0)) throw std::invalid_argument("fractional moment: eta must be positive");
  }
  if (quad_nodes < 1) throw std::invalid_argument("fractional moment: quad_nodes must be >= 1");
  if (!(window.width() > 0.0)) throw std::invalid_argument("fractional moment: empty window");
}

std::vector<double> greens_fractional_energy_row(const SpectralDecomposition& dec, std::size_t x,
                                                 const FractionalMomentConfig& cfg) {
  cfg.validate();
  const QuadratureRule rule = gauss_legendre(cfg.quad_nodes, cfg.window.lower, cfg.window.upper);
  const std::size_t n_sites = dec.box().size();
  std::vector<double> best(n_sites, 0.0);
  for (double eta : cfg.eta_grid)
    for (double sign : {1.0, -1.0}) {
      std::vector<cplx> zs;
      zs.reserve(rule.nodes.size());
      for (double e : rule.nodes) zs.emplace_back(e, sign * eta);
      const RealMatrix norms = resolvent_row_norms(dec, x, zs);
      for (std::size_t y = 0; y < n_sites; ++y) {
        double integral = 0.0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
          integral += rule.weights[k] *
                      std::pow(norms(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(y)), cfg.s);
        }
        best[y] = std::max(best[y], integral);
      }
    }
  return best;
}

double greens_fractional_energy_integral(const SpectralDecomposition& dec, std::size_t x,
                                         std::size_t y, const FractionalMomentConfig& cfg) {
  return greens_fractional_energy_row(dec, x, cfg).at(y);
}

CombesThomasReport combes_thomas_check(const SpectralDecomposition& dec, cplx z) {
  const Eigen::VectorXd& ev = dec.eigenvalues();
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < ev.size(); ++n) dist = std::min(dist, std::abs(ev(n) - z));
  if (!(dist >= 0.5)) {
    throw std::domain_error("combes_thomas_check: dist(z, spectrum) = " + std::to_string(dist) +
                            " < 0.5");
  }
  const Matrix& v = dec.eigenvectors();
  const Eigen::VectorXcd inv = (ev.cast<cplx>().array() - z).inverse().matrix();
  const Matrix g = v * inv.asDiagonal() * v.adjoint();

  CombesThomasReport report;
  report.distance = dist;
  report.bound_amplitude = 2.0 / dist;
  report.certified_rate = std::numeric_limits<double>::infinity();
  const LatticeBox& box = dec.box();
  const int n_orb = dec.orbitals();
  std::vector<DecaySample> samples;
  for (std::size_t x = 0; x < box.size(); ++x)
    for (std::size_t y = 0; y < box.size(); ++y) {
      const double norm = spectral_norm(g.block(static_cast<Eigen::Index>(x) * n_orb,
                                                static_cast<Eigen::Index>(y) * n_orb, n_orb, n_orb));
      if (x == y) {
        report.max_diagonal = std::max(report.max_diagonal, norm);
        continue;
      }
      if (norm == 0.0) continue;
      const double d = box.distance(x, y);
      report.certified_rate =
          std::min(report.certified_rate, std::log(report.bound_amplitude / norm) / (dist * d));
      samples.push_back({x, d, norm, 0.0});
    }
  // Off-diagonal entries at round-off level carry no decay information.
  const double floor = 1e-13 * report.bound_amplitude;
  try {
    report.fit = fit_decay(samples, DecayKind::exponential, false, floor);
  } catch (const std::invalid_argument&) {
    report.fit.reset();
  }
  report.pass = report.max_diagonal <= report.bound_amplitude && report.certified_rate > 0.0 &&
                (!report.fit || report.fit->rate > 0.0);
  return report;
}

SuleReport sule_analysis(const SpectralDecomposition& dec, const EnergyWindow& window,
                         double relative_floor) {
  const Eigen::VectorXd& ev = dec.eigenvalues();
  const Matrix& v = dec.eigenvectors();
  const LatticeBox& box = dec.box();
  const int n_orb = dec.orbitals();
  SuleReport report;
  for (Eigen::Index n = 0; n < ev.size(); ++n) {
    if (window.contains(ev(n))) report.states.push_back(static_cast<std::size_t>(n));
  }
  if (report.states.size() < 5) {
    throw std::invalid_argument("sule_analysis: window holds " +
                                std::to_string(report.states.size()) + " eigenvalues, need >= 5");
  }

  std::vector<DecaySample> pooled;
  for (std::size_t n : report.states) {
    Eigen::VectorXd amp(static_cast<Eigen::Index>(box.size()));
    for (std::size_t y = 0; y < box.size(); ++y) {
      amp(static_cast<Eigen::Index>(y)) =
          v.block(static_cast<Eigen::Index>(y) * n_orb, static_cast<Eigen::Index>(n), n_orb, 1).norm();
    }
    Eigen::Index center = 0;
    const double peak = amp.maxCoeff(&center);
    report.centers.push_back(static_cast<std::size_t>(center));

    std::vector<DecaySample> own;
    for (std::size_t y = 0; y < box.size(); ++y) {
      const double a = amp(static_cast<Eigen::Index>(y));
      if (a > relative_floor * peak) {
        own.push_back({static_cast<std::size_t>(center),
                       static_cast<double>(box.distance(static_cast<std::size_t>(center), y)), a, 0.0});
      }
    }
    pooled.insert(pooled.end(), own.begin(), own.end());

    // Straight-line log fit; too few distances means the state is a point mass.
    std::set<double> distances;
    for (const DecaySample& s : own) distances.insert(s.distance);
    double rate = kSuleRateCap;
    if (distances.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const DecaySample& s : own) {
        const double ly = std::log(s.value);
        sx += s.distance;
        sy += ly;
        sxx += s.distance * s.distance;
        sxy += s.distance * ly;
      }
      const double m = static_cast<double>(own.size());
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      rate = std::min(-slope, kSuleRateCap);
    }
    report.state_rates.push_back(rate);
  }

  std::vector<double> sorted = report.state_rates;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  report.median_rate = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  try {
    report.joint_fit = fit_decay(pooled, DecayKind::exponential, false, 0.0);
    report.joint_fit.rate = std::min(report.joint_fit.rate, kSuleRateCap);
  } catch (const std::invalid_argument&) {
    report.joint_fit = DecayFit{};
    report.joint_fit.rate = kSuleRateCap;
  }

  std::vector<int> norms;
  for (std::size_t c : report.centers) norms.push_back(box.norm(c));
  std::sort(norms.begin(), norms.end());
  report.growth_constant = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < norms.size(); ++k) {
    report.growth_constant = std::max(report.growth_constant,
                                      std::sqrt(static_cast<double>(k + 1)) / 3.0 - norms[k]);
  }
  return report;
}

double fermi_avg_projection_diff(const SpectralDecomposition& dec_a,
                                 const SpectralDecomposition& dec_b, const EnergyWindow& window,
                                 std::size_t x, std::size_t y) {
  if (!(dec_a.box() == dec_b.box()) || dec_a.orbitals() != dec_b.orbitals()) {
    throw std::invalid_argument("fermi_avg_projection_diff: decompositions live on different boxes");
  }
  const int n_orb = dec_a.orbitals();
  const auto rx = static_cast<Eigen::Index>(x) * n_orb;
  const auto ry = static_cast<Eigen::Index>(y) * n_orb;

  // Each eigenvalue contributes psi_n(x) psi_n(y)^dagger to P (sign +1) or to P' (sign -1).
  struct Jump {
    double energy;
    int sign;
    Eigen::Index index;
    const SpectralDecomposition* dec;
  };
  std::vector<Jump> jumps;
  // Separate running sums keep the difference bitwise zero when H' = H.
  Matrix block_a = Matrix::Zero(n_orb, n_orb);
  Matrix block_b = Matrix::Zero(n_orb, n_orb);
  auto accumulate = [&](const Jump& j, const Matrix& m) { (j.sign > 0 ? block_a : block_b) += m; };
  auto outer = [&](const Jump& j) {
    const Matrix& v = j.dec->eigenvectors();
    return Matrix(v.block(rx, j.index, n_orb, 1) * v.block(ry, j.index, n_orb, 1).adjoint());
  };
  for (int side = 0; side < 2; ++side) {
    const SpectralDecomposition* dec = side == 0 ? &dec_a : &dec_b;
    const int sign = side == 0 ? 1 : -1;
    const Eigen::VectorXd& ev = dec->eigenvalues();
    for (Eigen::Index n = 0; n < ev.size(); ++n) {
      const Jump j{ev(n), sign, n, dec};
      if (ev(n) <= window.lower) {
        accumulate(j, outer(j));
      } else if (ev(n) < window.upper) {
        jumps.push_back(j);
      }
    }
  }
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& a, const Jump& b) { return a.energy < b.energy; });

  double total = 0.0;
  double left = window.lower;
  std::size_t k = 0;
  while (true) {
    const double right = k < jumps.size() ? jumps[k].energy : window.upper;
    if (right > left) total += (right - left) * spectral_norm(block_a - block_b);
    if (k == jumps.size()) break;
    const double e = jumps[k].energy;
    for (; k < jumps.size() && jumps[k].energy == e; ++k) {
      accumulate(jumps[k], outer(jumps[k]));
    }
    left = e;
  }
  return total;
}

}  // namespace mobgap
