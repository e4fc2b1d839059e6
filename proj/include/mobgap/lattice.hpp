#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mobgap {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

/// Integer lattice point; unused trailing coordinates are zero.
using Site = std::array<int, 2>;

/// Origin-centred box {x in Z^d : |x|_inf <= (L-1)/2} with open boundaries.
///
/// Sites are enumerated with the first coordinate slowest, so index = (x1+h)*L + (x2+h)
/// in two dimensions and index = x1+h in one.
class LatticeBox {
 public:
  LatticeBox(int dim, int side);

  int dim() const { return dim_; }
  int side() const { return side_; }
  int half_width() const { return (side_ - 1) / 2; }
  std::size_t size() const { return sites_.size(); }

  const Site& site(std::size_t index) const { return sites_[index]; }
  int coordinate(std::size_t index, int axis) const { return sites_[index][axis]; }
  std::optional<std::size_t> find(const Site& s) const;
  std::size_t index_of(const Site& s) const;
  std::size_t origin() const { return index_of(Site{0, 0}); }

  /// 1-norm distance between two sites.
  int distance(std::size_t i, std::size_t j) const;
  int norm(std::size_t i) const;
  /// Largest 1-norm distance between two sites of the box.
  int diameter() const { return dim_ * (side_ - 1); }

  bool operator==(const LatticeBox& other) const {
    return dim_ == other.dim_ && side_ == other.side_;
  }

 private:
  int dim_;
  int side_;
  std::vector<Site> sites_;
};

/// Spectral norm of a small dense block.
double spectral_norm(const Eigen::Ref<const Matrix>& block);

/// Operator on l^2(box) (x) C^N stored densely; block (x,y) is the N x N matrix
/// <delta_x, A delta_y>. Immutable after construction.
class BlockOperator {
 public:
  BlockOperator(LatticeBox box, int orbitals);
  BlockOperator(LatticeBox box, int orbitals, Matrix dense, bool hermitian = false);

  static BlockOperator identity(const LatticeBox& box, int orbitals);

  const LatticeBox& box() const { return box_; }
  int orbitals() const { return orbitals_; }
  std::size_t dim() const { return static_cast<std::size_t>(dense_.rows()); }
  bool hermitian() const { return hermitian_; }
  const Matrix& dense() const { return dense_; }

  Eigen::Block<const Matrix> block(std::size_t x, std::size_t y) const {
    return dense_.block(static_cast<Eigen::Index>(x) * orbitals_,
                        static_cast<Eigen::Index>(y) * orbitals_, orbitals_, orbitals_);
  }
  double block_norm(std::size_t x, std::size_t y) const { return spectral_norm(block(x, y)); }
  /// Spectral norms of all blocks, indexed by (site, site).
  RealMatrix block_norms() const;

  /// max over site pairs of |A_xy - (A_yx)^dagger|.
  double hermiticity_defect() const;
  bool same_shape(const BlockOperator& other) const {
    return box_ == other.box_ && orbitals_ == other.orbitals_;
  }

 private:
  LatticeBox box_;
  int orbitals_;
  Matrix dense_;
  bool hermitian_;
};

BlockOperator compose(const BlockOperator& a, const BlockOperator& b);
BlockOperator add(const BlockOperator& a, const BlockOperator& b);
BlockOperator subtract(const BlockOperator& a, const BlockOperator& b);
BlockOperator scale(const BlockOperator& a, cplx factor);
BlockOperator adjoint(const BlockOperator& a);

/// max(sup_y sum_x |A_xy|, sup_x sum_y |A_xy|), an upper bound on the operator norm.
double holmgren_bound(const BlockOperator& a);
/// Largest singular value of the flattened operator.
double operator_norm(const BlockOperator& a);
/// Sum of singular values.
double trace_norm(const BlockOperator& a);
/// sum_{x,y,z} |A_xy| |B_yz|, an upper bound on the trace norm of AB.
double trace_norm_estimate(const BlockOperator& a, const BlockOperator& b);

/// Monotone interpolation Lambda: Z -> R from 0 (n <= -M) to 1 (n >= M).
class SwitchFunction {
 public:
  /// `values[k]` is Lambda(k - M) for k = 0..2M.
  SwitchFunction(std::string name, int support, std::vector<double> values);

  /// Lambda(n) = 1 for n >= 0, 0 otherwise.
  static SwitchFunction sharp();
  /// Lambda(n) = (1 + tanh(n/3))/2 for |n| < 20, clamped to 0/1 outside.
  static SwitchFunction smooth();
  static SwitchFunction by_name(const std::string& name);

  double operator()(int n) const;
  int support() const { return support_; }
  const std::string& name() const { return name_; }
  double total_variation() const;

 private:
  std::string name_;
  int support_;
  std::vector<double> values_;
};

/// -i [Lambda(X_axis), A]; block (x,y) is -i (Lambda(x_axis) - Lambda(y_axis)) A_xy.
/// `axis` is 1-based.
BlockOperator nc_derivative(const BlockOperator& a, int axis, const SwitchFunction& sw);

enum class ModelKind { hofstadter, anderson, custom };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

/// One term t |x + R, to><x, from| + h.c. of a translation-invariant hopping table.
/// Pure on-site diagonal terms (R = 0, to == from) are added once and must be real.
struct Hopping {
  Site displacement{0, 0};
  int from_orbital = 0;
  int to_orbital = 0;
  cplx amplitude{0.0, 0.0};

  bool operator==(const Hopping&) const = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::anderson;
  int dim = 2;
  int side = 21;
  int orbitals = 1;
  long flux_p = 0;
  long flux_q = 1;
  std::string disorder_kind = "uniform";
  double disorder_width = 0.0;
  std::vector<Hopping> hoppings;
  std::uint64_t seed = 0;
  double energy_shift = 0.0;

  bool operator==(const ModelSpec&) const = default;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  LatticeBox box() const { return LatticeBox(dim, side); }
};

/// Finite-range Hamiltonian for the spec: nearest-neighbour hopping of amplitude 1
/// (y-bonds carry exp(2 pi i p/q x1) in the hofstadter kind, Landau gauge),
/// i.i.d. on-site disorder uniform on [-W/2, W/2], plus energy_shift * identity.
BlockOperator build_hamiltonian(const ModelSpec& spec);

/// On-site disorder value for (site, orbital) drawn from the counter-based generator.
double disorder_value(const ModelSpec& spec, std::size_t site, int orbital);

/// Text dump: header lines "# mobgap-operator v1", "dim", "side", "orbitals",
/// "hermitian", "entries", followed by one "row col re im" line per nonzero entry.
void write_operator(std::ostream& out, const BlockOperator& a);
BlockOperator read_operator(std::istream& in);

}  // namespace mobgap
