#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mobgap/lattice.hpp"

namespace mobgap {

/// Open energy interval (lower, upper).
struct EnergyWindow {
  double lower;
  double upper;

  EnergyWindow(double lo, double hi);
  double width() const { return upper - lower; }
  bool contains(double e) const { return e > lower && e < upper; }
  bool operator==(const EnergyWindow&) const = default;
};

/// Eigen-decomposition of a Hermitian block operator. Eigenvalues ascend; column n of
/// `eigenvectors()` is psi_n with the site-major, orbital-minor layout of BlockOperator.
class SpectralDecomposition {
 public:
  SpectralDecomposition(std::shared_ptr<const BlockOperator> source, Eigen::VectorXd eigenvalues,
                        Matrix eigenvectors);

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  const BlockOperator& source() const { return *source_; }
  const LatticeBox& box() const { return source_->box(); }
  int orbitals() const { return source_->orbitals(); }
  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  /// max |lambda_n|, equal to the operator norm of the source.
  double norm() const;
  /// Component block psi_n(x) as an N-vector.
  Vector component(std::size_t n, std::size_t x) const;
  /// Number of eigenvalues strictly below e.
  std::size_t count_below(double e) const;
  /// Distance from e to the nearest eigenvalue.
  double distance_to_spectrum(double e) const;

 private:
  std::shared_ptr<const BlockOperator> source_;
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
};

/// Throws std::invalid_argument when the input is not Hermitian to 1e-12.
SpectralDecomposition diagonalize(const BlockOperator& h);

/// chi_{(-inf, E_F)}(H). Throws EigenvalueCollision if E_F is within `collision_tol`
/// of an eigenvalue.
BlockOperator fermi_projection(const SpectralDecomposition& dec, double fermi_energy,
                               double collision_tol = 1e-12);

/// f(H) = sum_n f(lambda_n) psi_n psi_n^dagger. With `require_unit_bound`, throws
/// std::domain_error if |f(lambda_n)| > 1 for some n.
BlockOperator apply_borel(const SpectralDecomposition& dec, const std::function<cplx(double)>& f,
                          bool require_unit_bound = true);

/// G(x,y;z) = (H - z)^{-1}_xy. Throws std::domain_error when z lies on the spectrum.
Matrix resolvent_block(const SpectralDecomposition& dec, std::size_t x, std::size_t y, cplx z);

/// Block norms |G(x,y;z_k)| for one source site x and every site y; row k belongs to z_k.
RealMatrix resolvent_row_norms(const SpectralDecomposition& dec, std::size_t x,
                               const std::vector<cplx>& zs);

enum class ResolventMethod {
  spectral,  ///< R(z) from the eigen-expansion
  direct,    ///< R(z) from one Householder tridiagonalization and a pivoted banded solve per node
};

/// (i/2pi) times the counter-clockwise integral of R(z) around the rectangle with corners
/// lambda +- i and -|H|-1 +- i, by composite 8-point Gauss-Legendre with
/// `nodes_per_unit` nodes per unit arc length on each edge.
BlockOperator contour_projection(const BlockOperator& h, double lambda, int nodes_per_unit,
                                 ResolventMethod method = ResolventMethod::spectral);
BlockOperator contour_projection(const SpectralDecomposition& dec, double lambda,
                                 int nodes_per_unit);

/// Largest cluster of eigenvalues inside the window, clustering consecutive eigenvalues
/// whose gap is below cluster_tol. Zero when the window holds no eigenvalue.
int max_degeneracy(const SpectralDecomposition& dec, const EnergyWindow& window,
                   double cluster_tol = 1e-8);

}  // namespace mobgap
