#pragma once

#include <cmath>
#include <random>

#include "mobgap/lattice.hpp"

namespace mobgap::testing {

/// Dense operator with block norms of order amplitude * e^{-rate |x-y|} and random phases.
inline BlockOperator random_local_operator(const LatticeBox& box, int orbitals, std::mt19937_64& gen,
                                           double amplitude = 1.0, double rate = 0.7,
                                           bool hermitian = false) {
  std::normal_distribution<double> normal;
  const auto dim = static_cast<Eigen::Index>(box.size()) * orbitals;
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const int d = box.distance(static_cast<std::size_t>(i / orbitals), static_cast<std::size_t>(j / orbitals));
      m(i, j) = amplitude * std::exp(-rate * d) * cplx(normal(gen), normal(gen));
    }
  if (hermitian) m = (0.5 * (m + m.adjoint())).eval();
  return BlockOperator(box, orbitals, std::move(m), hermitian);
}

inline Matrix random_matrix(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(normal(gen), normal(gen));
  return m;
}

inline BlockOperator random_hermitian(const LatticeBox& box, int orbitals, std::mt19937_64& gen) {
  const auto dim = static_cast<Eigen::Index>(box.size()) * orbitals;
  Matrix m = random_matrix(dim, gen);
  return BlockOperator(box, orbitals, (0.5 * (m + m.adjoint())).eval(), true);
}

inline BlockOperator diagonal_operator(const LatticeBox& box, const std::vector<double>& values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  return BlockOperator(box, static_cast<int>(values.size() / box.size()), std::move(m), true);
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace mobgap::testing
