#include "mobgap/chern.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "mobgap/errors.hpp"
#include "mobgap/parallel.hpp"
#include "mobgap/quadrature.hpp"

namespace mobgap {

int default_trace_radius(const LatticeBox& box) { return box.half_width() / 2; }

ChernResult chern_number(const BlockOperator& projection, const SwitchFunction& sw,
                         const ChernOptions& options) {
  const LatticeBox& box = projection.box();
  if (box.dim() != 2) throw std::invalid_argument("chern_number requires a two-dimensional box");
  const Matrix& p = projection.dense();
  const double defect = (p * p - p).cwiseAbs().maxCoeff();
  if (!(defect < options.projector_tol)) {
    throw std::invalid_argument("chern_number: input is not a projection (|P^2 - P| = " +
                                std::to_string(defect) + ")");
  }

  const int radius = options.trace_radius < 0 ? default_trace_radius(box) : options.trace_radius;
  const int n_orb = projection.orbitals();
  std::vector<Eigen::Index> rows;
  for (std::size_t s = 0; s < box.size(); ++s) {
    const Site& x = box.site(s);
    if (std::max(std::abs(x[0]), std::abs(x[1])) <= radius) {
      for (int o = 0; o < n_orb; ++o) rows.push_back(static_cast<Eigen::Index>(s) * n_orb + o);
    }
  }

  const Matrix d1 = nc_derivative(projection, 1, sw).dense();
  const Matrix d2 = nc_derivative(projection, 2, sw).dense();
  const Matrix commutator = d1 * d2 - d2 * d1;

  // tr_R P M P = sum_{i in R} (P_i. M) . P_.i
  Matrix p_rows(static_cast<Eigen::Index>(rows.size()), p.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) p_rows.row(static_cast<Eigen::Index>(k)) = p.row(rows[k]);
  const Matrix left = p_rows * commutator;
  cplx trace(0.0, 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    trace += (left.row(static_cast<Eigen::Index>(k)) * p.col(rows[k]))(0, 0);
  }

  const cplx value = cplx(0.0, 2.0 * std::numbers::pi) * trace;
  ChernResult result;
  result.raw = value.real();
  result.imaginary = value.imag();
  result.rounded = std::lround(result.raw);
  result.residual = std::abs(result.raw - static_cast<double>(result.rounded));
  result.decided = result.residual <= options.tolerance;
  result.switch_id = sw.name();
  result.side = box.side();
  result.trace_radius = radius;
  return result;
}

ChernResult chern_of_hamiltonian(const SpectralDecomposition& dec, double fermi_energy,
                                 const SwitchFunction& sw, const ChernOptions& options) {
  ChernResult result = chern_number(fermi_projection(dec, fermi_energy), sw, options);
  result.fermi_energy = fermi_energy;
  return result;
}

ChernResult chern_of_hamiltonian(const BlockOperator& h, double fermi_energy,
                                 const SwitchFunction& sw, const ChernOptions& options) {
  return chern_of_hamiltonian(diagonalize(h), fermi_energy, sw, options);
}

ChernScan fermi_energy_scan(const SpectralDecomposition& dec, const EnergyWindow& window,
                            int n_grid, const SwitchFunction& sw, const ChernOptions& options,
                            int jobs) {
  const std::vector<double> grid = linear_grid(window.lower, window.upper, n_grid);
  std::vector<std::optional<ChernResult>> slots(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    try {
      slots[i] = chern_of_hamiltonian(dec, grid[i], sw, options);
    } catch (const EigenvalueCollision&) {
      slots[i].reset();
    }
  });

  ChernScan scan;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!slots[i]) {
      scan.skipped.push_back(grid[i]);
      continue;
    }
    const ChernResult& r = *slots[i];
    if (scan.rows.empty()) {
      lo = hi = r.raw;
    } else {
      lo = std::min(lo, r.raw);
      hi = std::max(hi, r.raw);
      scan.rounded_constant = scan.rounded_constant && r.rounded == scan.rows.front().rounded;
    }
    scan.rows.push_back(r);
  }
  scan.raw_spread = hi - lo;
  return scan;
}

ChernScan fermi_energy_scan(const BlockOperator& h, const EnergyWindow& window, int n_grid,
                            const SwitchFunction& sw, const ChernOptions& options, int jobs) {
  return fermi_energy_scan(diagonalize(h), window, n_grid, sw, options, jobs);
}

}  // namespace mobgap
