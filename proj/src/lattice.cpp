#include "mobgap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mobgap {

LatticeBox::LatticeBox(int dim, int side) : dim_(dim), side_(side) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("lattice dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (side < 1 || side % 2 == 0) {
    throw std::invalid_argument("box side must be a positive odd integer, got " +
                                std::to_string(side));
  }
  const int h = half_width();
  if (dim == 1) {
    for (int a = -h; a <= h; ++a) sites_.push_back(Site{a, 0});
  } else {
    for (int a = -h; a <= h; ++a)
      for (int b = -h; b <= h; ++b) sites_.push_back(Site{a, b});
  }
}

std::optional<std::size_t> LatticeBox::find(const Site& s) const {
  const int h = half_width();
  if (std::abs(s[0]) > h) return std::nullopt;
  if (dim_ == 1) {
    if (s[1] != 0) return std::nullopt;
    return static_cast<std::size_t>(s[0] + h);
  }
  if (std::abs(s[1]) > h) return std::nullopt;
  return static_cast<std::size_t>((s[0] + h) * side_ + (s[1] + h));
}

std::size_t LatticeBox::index_of(const Site& s) const {
  auto idx = find(s);
  if (!idx) {
    throw std::out_of_range("site (" + std::to_string(s[0]) + "," + std::to_string(s[1]) +
                            ") outside the box");
  }
  return *idx;
}

int LatticeBox::distance(std::size_t i, std::size_t j) const {
  const Site& a = sites_[i];
  const Site& b = sites_[j];
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
}

int LatticeBox::norm(std::size_t i) const {
  return std::abs(sites_[i][0]) + std::abs(sites_[i][1]);
}

double spectral_norm(const Eigen::Ref<const Matrix>& block) {
  if (block.rows() == 1 && block.cols() == 1) return std::abs(block(0, 0));
  if (block.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(block);
  return svd.singularValues()(0);
}

BlockOperator::BlockOperator(LatticeBox box, int orbitals)
    : BlockOperator(box, orbitals,
                    Matrix::Zero(static_cast<Eigen::Index>(box.size()) * orbitals,
                                 static_cast<Eigen::Index>(box.size()) * orbitals),
                    true) {}

BlockOperator::BlockOperator(LatticeBox box, int orbitals, Matrix dense, bool hermitian)
    : box_(std::move(box)), orbitals_(orbitals), dense_(std::move(dense)), hermitian_(hermitian) {
  if (orbitals < 1) throw std::invalid_argument("internal dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(box_.size()) * orbitals_;
  if (dense_.rows() != n || dense_.cols() != n) {
    throw std::invalid_argument("dense matrix is " + std::to_string(dense_.rows()) + "x" +
                                std::to_string(dense_.cols()) + ", expected " +
                                std::to_string(n) + "x" + std::to_string(n));
  }
}

BlockOperator BlockOperator::identity(const LatticeBox& box, int orbitals) {
  const auto n = static_cast<Eigen::Index>(box.size()) * orbitals;
  return BlockOperator(box, orbitals, Matrix::Identity(n, n), true);
}

RealMatrix BlockOperator::block_norms() const {
  const auto n = static_cast<Eigen::Index>(box_.size());
  RealMatrix norms(n, n);
  if (orbitals_ == 1) {
    norms = dense_.cwiseAbs();
    return norms;
  }
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x) norms(x, y) = block_norm(x, y);
  return norms;
}

double BlockOperator::hermiticity_defect() const {
  return (dense_ - dense_.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

void require_same_shape(const BlockOperator& a, const BlockOperator& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": operands differ in box or internal dimension");
  }
}

}  // namespace

BlockOperator compose(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b, "compose");
  return BlockOperator(a.box(), a.orbitals(), a.dense() * b.dense(), false);
}

BlockOperator add(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b, "add");
  return BlockOperator(a.box(), a.orbitals(), a.dense() + b.dense(),
                       a.hermitian() && b.hermitian());
}

BlockOperator subtract(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b, "subtract");
  return BlockOperator(a.box(), a.orbitals(), a.dense() - b.dense(),
                       a.hermitian() && b.hermitian());
}

BlockOperator scale(const BlockOperator& a, cplx factor) {
  return BlockOperator(a.box(), a.orbitals(), factor * a.dense(),
                       a.hermitian() && factor.imag() == 0.0);
}

BlockOperator adjoint(const BlockOperator& a) {
  return BlockOperator(a.box(), a.orbitals(), a.dense().adjoint(), a.hermitian());
}

double holmgren_bound(const BlockOperator& a) {
  const RealMatrix norms = a.block_norms();
  return std::max(norms.colwise().sum().maxCoeff(), norms.rowwise().sum().maxCoeff());
}

double operator_norm(const BlockOperator& a) {
  if (a.dim() == 0) return 0.0;
  if (a.hermitian() && a.hermiticity_defect() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(a.dense());
  return svd.singularValues()(0);
}

double trace_norm(const BlockOperator& a) {
  Eigen::BDCSVD<Matrix> svd(a.dense());
  return svd.singularValues().sum();
}

double trace_norm_estimate(const BlockOperator& a, const BlockOperator& b) {
  require_same_shape(a, b, "trace_norm_estimate");
  const RealMatrix na = a.block_norms();
  const RealMatrix nb = b.block_norms();
  // sum_{xyz} na(x,y) nb(y,z) = (column sums of na) . (row sums of nb)
  return na.colwise().sum().dot(nb.rowwise().sum().transpose());
}

SwitchFunction::SwitchFunction(std::string name, int support, std::vector<double> values)
    : name_(std::move(name)), support_(support), values_(std::move(values)) {
  if (support < 1) throw std::invalid_argument("switch support must be >= 1");
  if (values_.size() != static_cast<std::size_t>(2 * support + 1)) {
    throw std::invalid_argument("switch table must hold 2M+1 values");
  }
  if (values_.front() != 0.0 || values_.back() != 1.0) {
    throw std::invalid_argument("switch table must start at 0 and end at 1");
  }
}

SwitchFunction SwitchFunction::sharp() { return SwitchFunction("sharp", 1, {0.0, 1.0, 1.0}); }

SwitchFunction SwitchFunction::smooth() {
  constexpr int kSupport = 20;
  std::vector<double> values(2 * kSupport + 1);
  for (int n = -kSupport; n <= kSupport; ++n) {
    double v = 0.5 * (1.0 + std::tanh(n / 3.0));
    if (n == -kSupport) v = 0.0;
    if (n == kSupport) v = 1.0;
    values[static_cast<std::size_t>(n + kSupport)] = v;
  }
  return SwitchFunction("tanh", kSupport, std::move(values));
}

SwitchFunction SwitchFunction::by_name(const std::string& name) {
  if (name == "sharp") return sharp();
  if (name == "tanh") return smooth();
  throw std::invalid_argument("unknown switch function '" + name + "' (expected sharp|tanh)");
}

double SwitchFunction::operator()(int n) const {
  if (n <= -support_) return 0.0;
  if (n >= support_) return 1.0;
  return values_[static_cast<std::size_t>(n + support_)];
}

double SwitchFunction::total_variation() const {
  double tv = 0.0;
  for (std::size_t k = 1; k < values_.size(); ++k) tv += std::abs(values_[k] - values_[k - 1]);
  return tv;
}

BlockOperator nc_derivative(const BlockOperator& a, int axis, const SwitchFunction& sw) {
  const LatticeBox& box = a.box();
  if (axis < 1 || axis > box.dim()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " exceeds lattice dimension");
  }
  const int n_orb = a.orbitals();
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(a.dim()));
  for (std::size_t s = 0; s < box.size(); ++s) {
    const double v = sw(box.coordinate(s, axis - 1));
    for (int o = 0; o < n_orb; ++o) lambda(static_cast<Eigen::Index>(s) * n_orb + o) = v;
  }
  const auto n = static_cast<Eigen::Index>(a.dim());
  Matrix out(n, n);
  const cplx minus_i(0.0, -1.0);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = minus_i * (lambda(i) - lambda(j)) * a.dense()(i, j);
  return BlockOperator(box, n_orb, std::move(out), a.hermitian());
}

}  // namespace mobgap
