#include "mobgap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "mobgap/errors.hpp"
#include "mobgap/quadrature.hpp"

namespace mobgap {

EnergyWindow::EnergyWindow(double lo, double hi) : lower(lo), upper(hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("energy window must satisfy lower < upper");
  }
}

SpectralDecomposition::SpectralDecomposition(std::shared_ptr<const BlockOperator> source,
                                             Eigen::VectorXd eigenvalues, Matrix eigenvectors)
    : source_(std::move(source)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)) {}

double SpectralDecomposition::norm() const {
  if (eigenvalues_.size() == 0) return 0.0;
  return std::max(std::abs(eigenvalues_(0)), std::abs(eigenvalues_(eigenvalues_.size() - 1)));
}

Vector SpectralDecomposition::component(std::size_t n, std::size_t x) const {
  const int n_orb = orbitals();
  return eigenvectors_.col(static_cast<Eigen::Index>(n))
      .segment(static_cast<Eigen::Index>(x) * n_orb, n_orb);
}

std::size_t SpectralDecomposition::count_below(double e) const {
  const double* begin = eigenvalues_.data();
  return static_cast<std::size_t>(std::lower_bound(begin, begin + eigenvalues_.size(), e) - begin);
}

double SpectralDecomposition::distance_to_spectrum(double e) const {
  if (eigenvalues_.size() == 0) return std::numeric_limits<double>::infinity();
  const std::size_t k = count_below(e);
  double d = std::numeric_limits<double>::infinity();
  if (k < size()) d = std::min(d, eigenvalues_(static_cast<Eigen::Index>(k)) - e);
  if (k > 0) d = std::min(d, e - eigenvalues_(static_cast<Eigen::Index>(k) - 1));
  return d;
}

SpectralDecomposition diagonalize(const BlockOperator& h) {
  const double scale = std::max(1.0, h.dense().cwiseAbs().maxCoeff());
  if (h.hermiticity_defect() > 1e-12 * scale) {
    throw std::invalid_argument("diagonalize: operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.dense());
  if (es.info() != Eigen::Success) throw NumericError("diagonalize: eigensolver did not converge");
  return SpectralDecomposition(std::make_shared<const BlockOperator>(h), es.eigenvalues(),
                               es.eigenvectors());
}

namespace {

/// V diag(c) V^dagger restricted to the columns in [begin, end).
Matrix spectral_sum(const SpectralDecomposition& dec, const Eigen::VectorXcd& coeff,
                    Eigen::Index begin, Eigen::Index end) {
  const Matrix& v = dec.eigenvectors();
  const Eigen::Index n = v.rows();
  if (end <= begin) return Matrix::Zero(n, n);
  const auto cols = v.middleCols(begin, end - begin);
  return cols * coeff.segment(begin, end - begin).asDiagonal() * cols.adjoint();
}

}  // namespace

BlockOperator fermi_projection(const SpectralDecomposition& dec, double fermi_energy,
                               double collision_tol) {
  const auto& ev = dec.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k) - fermi_energy) <= collision_tol) {
      throw EigenvalueCollision(fermi_energy, ev(k));
    }
  }
  const auto filled = static_cast<Eigen::Index>(dec.count_below(fermi_energy));
  const Matrix& v = dec.eigenvectors();
  const auto cols = v.leftCols(filled);
  Matrix p = cols * cols.adjoint();
  return BlockOperator(dec.box(), dec.orbitals(), std::move(p), true);
}

BlockOperator apply_borel(const SpectralDecomposition& dec, const std::function<cplx(double)>& f,
                          bool require_unit_bound) {
  const auto& ev = dec.eigenvalues();
  Eigen::VectorXcd coeff(ev.size());
  bool real_valued = true;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    coeff(k) = f(ev(k));
    if (require_unit_bound && std::abs(coeff(k)) > 1.0 + 1e-12) {
      throw std::domain_error("apply_borel: |f(" + std::to_string(ev(k)) + ")| exceeds 1");
    }
    real_valued = real_valued && coeff(k).imag() == 0.0;
  }
  return BlockOperator(dec.box(), dec.orbitals(), spectral_sum(dec, coeff, 0, ev.size()),
                       real_valued);
}

namespace {

void require_off_spectrum(const SpectralDecomposition& dec, cplx z) {
  const auto& ev = dec.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k) - z) <= 1e-13) {
      throw std::domain_error("resolvent requested on the spectrum");
    }
  }
}

}  // namespace

Matrix resolvent_block(const SpectralDecomposition& dec, std::size_t x, std::size_t y, cplx z) {
  require_off_spectrum(dec, z);
  const int n_orb = dec.orbitals();
  const Matrix& v = dec.eigenvectors();
  const auto rx = v.middleRows(static_cast<Eigen::Index>(x) * n_orb, n_orb);
  const auto ry = v.middleRows(static_cast<Eigen::Index>(y) * n_orb, n_orb);
  const Eigen::VectorXcd inv = (dec.eigenvalues().cast<cplx>().array() - z).inverse().matrix();
  return rx * inv.asDiagonal() * ry.adjoint();
}

RealMatrix resolvent_row_norms(const SpectralDecomposition& dec, std::size_t x,
                               const std::vector<cplx>& zs) {
  for (cplx z : zs) require_off_spectrum(dec, z);
  const int n_orb = dec.orbitals();
  const Matrix& v = dec.eigenvectors();
  const Eigen::Index n_states = v.cols();
  const Eigen::Index n_sites = static_cast<Eigen::Index>(dec.box().size());
  const auto n_z = static_cast<Eigen::Index>(zs.size());
  const auto rx = v.middleRows(static_cast<Eigen::Index>(x) * n_orb, n_orb);
  const Eigen::VectorXcd ev = dec.eigenvalues().cast<cplx>();

  // Row k*N + a holds psi(x)_a / (lambda - z_k); one product gives every G(x, . ; z_k).
  Matrix weighted(n_z * n_orb, n_states);
  for (Eigen::Index k = 0; k < n_z; ++k) {
    const Eigen::VectorXcd inv = (ev.array() - zs[static_cast<std::size_t>(k)]).inverse().matrix();
    weighted.middleRows(k * n_orb, n_orb) = rx * inv.asDiagonal();
  }
  const Matrix rows = weighted * v.adjoint();

  RealMatrix norms(n_z, n_sites);
  for (Eigen::Index k = 0; k < n_z; ++k)
    for (Eigen::Index y = 0; y < n_sites; ++y)
      norms(k, y) = spectral_norm(rows.block(k * n_orb, y * n_orb, n_orb, n_orb));
  return norms;
}

namespace {

struct ContourNode {
  cplx z;
  cplx weight;  // quadrature weight times dz/ds times i/(2 pi)
};

std::vector<ContourNode> rectangle_nodes(double lambda, double left, int nodes_per_unit) {
  constexpr int kOrder = 8;
  const cplx corners[4] = {{lambda, -1.0}, {lambda, 1.0}, {left, 1.0}, {left, -1.0}};
  const cplx prefactor(0.0, 1.0 / (2.0 * std::numbers::pi));
  std::vector<ContourNode> nodes;
  for (int e = 0; e < 4; ++e) {
    const cplx a = corners[e];
    const cplx b = corners[(e + 1) % 4];
    const double length = std::abs(b - a);
    if (length == 0.0) continue;
    const cplx direction = (b - a) / length;
    const int count = static_cast<int>(std::ceil(length * nodes_per_unit));
    const int panels = std::max(1, (count + kOrder - 1) / kOrder);
    const QuadratureRule rule = composite_gauss_legendre(panels, kOrder, 0.0, length);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      nodes.push_back({a + direction * rule.nodes[k], prefactor * direction * rule.weights[k]});
    }
  }
  return nodes;
}

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// (T - z)^{-1} for real symmetric tridiagonal T by Gaussian elimination with partial pivoting
/// (the banded scheme of LAPACK gtsv). Throws NumericError on an exactly singular pivot.
RowMatrix tridiagonal_resolvent(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, cplx z) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXcd d = diag.cast<cplx>().array() - z;
  Eigen::VectorXcd du = off.cast<cplx>();
  // dl holds the subdiagonal, then the second superdiagonal created by row swaps.
  Eigen::VectorXcd dl = off.cast<cplx>();
  RowMatrix b = RowMatrix::Identity(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (dl(k) == cplx(0.0)) {
      if (d(k) == cplx(0.0)) throw NumericError("tridiagonal resolvent: singular pivot");
    } else if (std::abs(d(k)) >= std::abs(dl(k))) {
      const cplx mult = dl(k) / d(k);
      d(k + 1) -= mult * du(k);
      b.row(k + 1) -= mult * b.row(k);
      if (k + 2 < n) dl(k) = 0.0;
    } else {
      const cplx mult = d(k) / dl(k);
      d(k) = dl(k);
      const cplx temp = d(k + 1);
      d(k + 1) = du(k) - mult * temp;
      if (k + 2 < n) {
        dl(k) = du(k + 1);
        du(k + 1) = -mult * dl(k);
      }
      du(k) = temp;
      b.row(k).swap(b.row(k + 1));
      b.row(k + 1) -= mult * b.row(k);
    }
  }
  if (d(n - 1) == cplx(0.0)) throw NumericError("tridiagonal resolvent: singular pivot");
  b.row(n - 1) /= d(n - 1);
  if (n > 1) b.row(n - 2) = (b.row(n - 2) - du(n - 2) * b.row(n - 1)) / d(n - 2);
  for (Eigen::Index k = n - 3; k >= 0; --k)
    b.row(k) = (b.row(k) - du(k) * b.row(k + 1) - dl(k) * b.row(k + 2)) / d(k);
  return b;
}

}  // namespace

BlockOperator contour_projection(const SpectralDecomposition& dec, double lambda,
                                 int nodes_per_unit) {
  if (nodes_per_unit < 1) throw std::invalid_argument("contour_projection: nodes_per_unit >= 1");
  const auto& ev = dec.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) == lambda) throw EigenvalueCollision(lambda, ev(k));
  }
  const auto nodes = rectangle_nodes(lambda, -dec.norm() - 1.0, nodes_per_unit);
  Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(ev.size());
  for (const ContourNode& node : nodes) {
    coeff.array() += node.weight / (ev.cast<cplx>().array() - node.z);
  }
  return BlockOperator(dec.box(), dec.orbitals(), spectral_sum(dec, coeff, 0, ev.size()), false);
}

BlockOperator contour_projection(const BlockOperator& h, double lambda, int nodes_per_unit,
                                 ResolventMethod method) {
  if (method == ResolventMethod::spectral) {
    return contour_projection(diagonalize(h), lambda, nodes_per_unit);
  }
  if (nodes_per_unit < 1) throw std::invalid_argument("contour_projection: nodes_per_unit >= 1");
  const double norm = operator_norm(h);
  const auto nodes = rectangle_nodes(lambda, -norm - 1.0, nodes_per_unit);
  // H = Q T Q^dagger with T real tridiagonal, so (H - z)^{-1} = Q (T - z)^{-1} Q^dagger and each node
  // costs one O(n^2) banded solve instead of a dense factorization.
  const Eigen::Tridiagonalization<Matrix> tri(h.dense());
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd off = tri.subDiagonal();
  const auto n = static_cast<Eigen::Index>(h.dim());
  RowMatrix acc = RowMatrix::Zero(n, n);
  for (const ContourNode& node : nodes) acc += node.weight * tridiagonal_resolvent(diag, off, node.z);
  const Matrix q = tri.matrixQ();
  return BlockOperator(h.box(), h.orbitals(), Matrix(q * acc * q.adjoint()), false);
}

int max_degeneracy(const SpectralDecomposition& dec, const EnergyWindow& window,
                   double cluster_tol) {
  if (!(cluster_tol > 0.0)) throw std::invalid_argument("max_degeneracy: cluster_tol must be > 0");
  const auto& ev = dec.eigenvalues();
  int best = 0;
  int run = 0;
  double previous = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (!window.contains(ev(k))) continue;
    if (run > 0 && ev(k) - previous < cluster_tol) {
      ++run;
    } else {
      run = 1;
    }
    previous = ev(k);
    best = std::max(best, run);
  }
  return best;
}

}  // namespace mobgap
