#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "mobgap/chern.hpp"
#include "mobgap/errors.hpp"

namespace mobgap {

int magnetic_cell_sites(const ModelSpec& spec) {
  return spec.kind == ModelKind::hofstadter ? static_cast<int>(spec.flux_q) : 1;
}

namespace {

void require_clean_2d(const ModelSpec& spec) {
  spec.validate();
  if (spec.dim != 2) throw std::invalid_argument("Bloch oracle requires d = 2");
  if (spec.disorder_width != 0.0) {
    throw std::invalid_argument("Bloch oracle requires a clean model (disorder_w = 0)");
  }
}

}  // namespace

Matrix bloch_hamiltonian(const ModelSpec& spec, double k1, double k2) {
  const int q = magnetic_cell_sites(spec);
  const int n_orb = spec.orbitals;
  const Eigen::Index dim = static_cast<Eigen::Index>(q) * n_orb;
  Matrix hk = Matrix::Zero(dim, dim);
  const cplx i(0.0, 1.0);

  // <x'|H|x> = t with x in the reference cell adds t e^{i k.(x - x')} to H(k)[cell(x'), cell(x)].
  auto add_term = [&](int to_site, int to_orb, int from_site, int from_orb, double dx1, double dx2,
                      cplx t) {
    const Eigen::Index a = static_cast<Eigen::Index>(to_site) * n_orb + to_orb;
    const Eigen::Index b = static_cast<Eigen::Index>(from_site) * n_orb + from_orb;
    hk(a, b) += t * std::exp(-i * (k1 * dx1 + k2 * dx2));
    hk(b, a) += std::conj(t) * std::exp(i * (k1 * dx1 + k2 * dx2));
  };

  if (spec.kind == ModelKind::custom) {
    for (const Hopping& hop : spec.hoppings) {
      if (hop.displacement == Site{0, 0} && hop.from_orbital == hop.to_orbital) {
        hk(hop.from_orbital, hop.from_orbital) += hop.amplitude.real();
      } else {
        add_term(0, hop.to_orbital, 0, hop.from_orbital, hop.displacement[0], hop.displacement[1],
                 hop.amplitude);
      }
    }
  } else {
    const long p = spec.kind == ModelKind::hofstadter ? spec.flux_p : 0;
    for (int m = 0; m < q; ++m) {
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>((p * m) % q) / static_cast<double>(q);
      const cplx y_phase(std::cos(angle), std::sin(angle));
      for (int o = 0; o < n_orb; ++o) {
        add_term((m + 1) % q, o, m, o, 1.0, 0.0, 1.0);
        add_term(m, o, m, o, 0.0, 1.0, y_phase);
      }
    }
  }
  hk.diagonal().array() += spec.energy_shift;
  return hk;
}

BlochChern bloch_chern(const ModelSpec& spec, int n_bands_filled, int k_grid) {
  require_clean_2d(spec);
  if (k_grid < 12) throw std::invalid_argument("Bloch oracle needs k_grid >= 12");
  const int q = magnetic_cell_sites(spec);
  const int n_orb = spec.orbitals;
  const Eigen::Index dim = static_cast<Eigen::Index>(q) * n_orb;
  if (n_bands_filled < 0 || n_bands_filled > dim) {
    throw std::invalid_argument("n_bands_filled out of range");
  }
  if (n_bands_filled == 0 || n_bands_filled == dim) return {0, 0.0};

  const double g1 = 2.0 * std::numbers::pi / q;
  const double g2 = 2.0 * std::numbers::pi;
  const auto K = static_cast<std::size_t>(k_grid);

  // frames[a][b]: occupied eigenvectors at (a g1/K, b g2/K), with one extra row/column
  // filled by the periodic-gauge images u(k + G).
  std::vector<std::vector<Matrix>> frames(K + 1, std::vector<Matrix>(K + 1));
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          bloch_hamiltonian(spec, g1 * static_cast<double>(a) / k_grid,
                            g2 * static_cast<double>(b) / k_grid));
      min_gap = std::min(min_gap,
                         es.eigenvalues()(n_bands_filled) - es.eigenvalues()(n_bands_filled - 1));
      frames[a][b] = es.eigenvectors().leftCols(n_bands_filled);
    }
  if (!(min_gap > 1e-8)) {
    throw NumericError("Bloch oracle: filled bands touch the empty ones (gap " +
                       std::to_string(min_gap) + ")");
  }
  // u(k + G1) = diag(e^{-i G1 . r}) u(k); site m of the cell sits at x1 = m. G2 . r = 0.
  Eigen::VectorXcd shift(dim);
  for (int m = 0; m < q; ++m)
    for (int o = 0; o < n_orb; ++o) {
      shift(static_cast<Eigen::Index>(m) * n_orb + o) = std::exp(cplx(0.0, -g1 * m));
    }
  for (std::size_t a = 0; a < K; ++a) frames[a][K] = frames[a][0];
  for (std::size_t b = 0; b <= K; ++b) frames[K][b] = shift.asDiagonal() * frames[0][b];

  auto link = [&](const Matrix& u, const Matrix& v) { return (u.adjoint() * v).determinant(); };
  double total = 0.0;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) {
      const cplx loop = link(frames[a][b], frames[a + 1][b]) *
                        link(frames[a + 1][b], frames[a + 1][b + 1]) *
                        link(frames[a + 1][b + 1], frames[a][b + 1]) *
                        link(frames[a][b + 1], frames[a][b]);
      total += std::arg(loop);
    }
  const double raw = -total / (2.0 * std::numbers::pi);
  const long value = std::lround(raw);
  if (std::abs(raw - static_cast<double>(value)) > 1e-6) {
    throw NumericError("Bloch oracle: plaquette sum " + std::to_string(raw) + " is not integral");
  }
  return {value, raw};
}

long bloch_chern_oracle(const ModelSpec& spec, int n_bands_filled, int k_grid) {
  return bloch_chern(spec, n_bands_filled, k_grid).value;
}

}  // namespace mobgap
