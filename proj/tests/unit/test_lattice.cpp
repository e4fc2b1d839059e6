#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "mobgap/lattice.hpp"
#include "mobgap/spectral.hpp"

using namespace mobgap;
using Catch::Approx;

TEST_CASE("box enumerates L^d sites with stable indices", "[lattice]") {
  for (int dim : {1, 2}) {
    for (int side : {1, 3, 9}) {
      LatticeBox box(dim, side);
      const std::size_t expected = dim == 1 ? side : static_cast<std::size_t>(side) * side;
      REQUIRE(box.size() == expected);
      std::set<Site> seen;
      for (std::size_t i = 0; i < box.size(); ++i) {
        REQUIRE(box.index_of(box.site(i)) == i);
        seen.insert(box.site(i));
      }
      REQUIRE(seen.size() == box.size());
      REQUIRE(box.site(box.origin()) == Site{0, 0});
    }
  }
}

TEST_CASE("box rejects even or nonpositive sides and bad dimensions", "[lattice]") {
  REQUIRE_THROWS_AS(LatticeBox(2, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(LatticeBox(2, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(LatticeBox(3, 5), std::invalid_argument);
  LatticeBox box(2, 5);
  REQUIRE_THROWS_AS(box.index_of(Site{3, 0}), std::out_of_range);
  REQUIRE_FALSE(box.find(Site{0, -3}).has_value());
}

TEST_CASE("1-norm distance is symmetric and matches coordinates", "[lattice]") {
  LatticeBox box(2, 7);
  for (std::size_t i = 0; i < box.size(); ++i)
    for (std::size_t j = 0; j < box.size(); ++j) {
      const Site& a = box.site(i);
      const Site& b = box.site(j);
      REQUIRE(box.distance(i, j) == box.distance(j, i));
      REQUIRE(box.distance(i, j) == std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]));
    }
  REQUIRE(box.diameter() == 12);
}

TEST_CASE("clean 1D chain of three sites is the path-graph adjacency", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::anderson;
  spec.dim = 1;
  spec.side = 3;
  const BlockOperator h = build_hamiltonian(spec);
  Matrix expected(3, 3);
  expected << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  REQUIRE(testing::max_abs(h.dense() - expected) == 0.0);
  REQUIRE(h.hermitian());
}

TEST_CASE("zero-flux hofstadter has unit hoppings", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::hofstadter;
  spec.side = 5;
  spec.flux_p = 0;
  spec.flux_q = 1;
  const BlockOperator h = build_hamiltonian(spec);
  const LatticeBox box = spec.box();
  for (std::size_t i = 0; i < box.size(); ++i)
    for (std::size_t j = 0; j < box.size(); ++j) {
      const cplx expected = box.distance(i, j) == 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
      REQUIRE(h.dense()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == expected);
    }
}

TEST_CASE("hofstadter y-bonds carry the Landau-gauge phase", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::hofstadter;
  spec.side = 7;
  spec.flux_p = 1;
  spec.flux_q = 3;
  const BlockOperator h = build_hamiltonian(spec);
  const LatticeBox box = spec.box();
  double plaquette_phase_error = 0.0;
  for (int x = -3; x < 3; ++x)
    for (int y = -3; y < 3; ++y) {
      auto at = [&](int a, int b) { return static_cast<Eigen::Index>(box.index_of(Site{a, b})); };
      // Product of hoppings around a plaquette is e^{2 pi i p/q} up to orientation.
      const cplx loop = h.dense()(at(x + 1, y), at(x, y)) * h.dense()(at(x + 1, y + 1), at(x + 1, y)) *
                        h.dense()(at(x, y + 1), at(x + 1, y + 1)) * h.dense()(at(x, y), at(x, y + 1));
      const double angle = 2.0 * std::numbers::pi / 3.0;
      const double err = std::min(std::abs(loop - std::polar(1.0, angle)),
                                  std::abs(loop - std::polar(1.0, -angle)));
      plaquette_phase_error = std::max(plaquette_phase_error, err);
    }
  REQUIRE(plaquette_phase_error < 1e-12);
  REQUIRE(h.hermiticity_defect() < 1e-12);
}

TEST_CASE("hofstadter 1/3 has a gap after the lowest third of states", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::hofstadter;
  spec.side = 21;
  spec.flux_p = 1;
  spec.flux_q = 3;
  const SpectralDecomposition dec = diagonalize(build_hamiltonian(spec));
  // Bulk band edges from the Bloch Hamiltonian on a fine momentum mesh.
  double lowest_top = -1e9;
  double middle_bottom = 1e9;
  const int mesh = 48;
  for (int a = 0; a < mesh; ++a)
    for (int b = 0; b < mesh; ++b) {
      // Magnetic cell of 3 sites along x1: H(k) is the 3x3 Harper matrix.
      const double k1 = 2.0 * std::numbers::pi * a / (3.0 * mesh);
      const double k2 = 2.0 * std::numbers::pi * b / mesh;
      Matrix hk = Matrix::Zero(3, 3);
      for (int j = 0; j < 3; ++j) {
        hk(j, j) = 2.0 * std::cos(k2 + 2.0 * std::numbers::pi * j / 3.0);
        hk((j + 1) % 3, j) += std::polar(1.0, k1);
        hk(j, (j + 1) % 3) += std::polar(1.0, -k1);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hk);
      lowest_top = std::max(lowest_top, es.eigenvalues()(0));
      middle_bottom = std::min(middle_bottom, es.eigenvalues()(1));
    }
  REQUIRE(middle_bottom - lowest_top > 0.5);
  // The finite box has edge states in the gap but the bulk count below the gap is about N/3.
  const std::size_t below_gap = dec.count_below(lowest_top + 1e-9);
  const double fraction = static_cast<double>(below_gap) / static_cast<double>(dec.size());
  REQUIRE(fraction > 0.25);
  REQUIRE(fraction < 1.0 / 3.0 + 0.01);
  REQUIRE(dec.eigenvalues()(0) >= -3.0 * 1.0 - 1e-9);
}

TEST_CASE("model spec validation rejects invalid input", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::hofstadter;
  spec.flux_p = 2;
  spec.flux_q = 4;
  REQUIRE_THROWS_AS(build_hamiltonian(spec), std::invalid_argument);
  spec.flux_p = 1;
  spec.flux_q = 0;
  REQUIRE_THROWS_AS(build_hamiltonian(spec), std::invalid_argument);
  spec.flux_q = 3;
  spec.side = 20;
  REQUIRE_THROWS_AS(build_hamiltonian(spec), std::invalid_argument);
  spec.side = 21;
  spec.disorder_width = -1.0;
  REQUIRE_THROWS_AS(build_hamiltonian(spec), std::invalid_argument);
  REQUIRE_THROWS_AS(model_kind_from_string("graphene"), std::invalid_argument);

  ModelSpec custom;
  custom.kind = ModelKind::custom;
  custom.dim = 1;
  custom.side = 3;
  custom.hoppings = {Hopping{Site{5, 0}, 0, 0, cplx(1.0, 0.0)}};
  REQUIRE_THROWS_AS(build_hamiltonian(custom), std::invalid_argument);
}

TEST_CASE("identical specs give bit-identical Hamiltonians", "[lattice][model]") {
  ModelSpec spec;
  spec.kind = ModelKind::hofstadter;
  spec.side = 9;
  spec.flux_p = 1;
  spec.flux_q = 3;
  spec.disorder_width = 2.0;
  spec.seed = 42;
  const BlockOperator a = build_hamiltonian(spec);
  const BlockOperator b = build_hamiltonian(spec);
  REQUIRE(a.dense() == b.dense());
  spec.seed = 43;
  REQUIRE_FALSE(build_hamiltonian(spec).dense() == a.dense());
}

TEST_CASE("disorder is uniform on [-W/2, W/2] and energy shift moves the spectrum", "[lattice][model]") {
  ModelSpec spec;
  spec.dim = 2;
  spec.side = 31;
  spec.disorder_width = 3.0;
  spec.seed = 7;
  const BlockOperator h = build_hamiltonian(spec);
  double lo = 1e9, hi = -1e9, mean = 0.0;
  for (Eigen::Index i = 0; i < h.dense().rows(); ++i) {
    const double v = h.dense()(i, i).real();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= static_cast<double>(h.dense().rows());
  REQUIRE(lo >= -1.5);
  REQUIRE(hi < 1.5);
  REQUIRE(hi - lo > 2.9);
  REQUIRE(std::abs(mean) < 0.15);

  spec.energy_shift = 0.25;
  const BlockOperator shifted = build_hamiltonian(spec);
  REQUIRE(testing::max_abs(shifted.dense() - h.dense() -
                           0.25 * Matrix::Identity(h.dense().rows(), h.dense().rows())) < 1e-15);
}

TEST_CASE("built Hamiltonians are Hermitian", "[lattice][model][property]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelSpec spec;
    spec.kind = seed % 2 ? ModelKind::hofstadter : ModelKind::anderson;
    spec.side = 7;
    spec.flux_p = seed % 2 ? 1 : 0;
    spec.flux_q = seed % 2 ? 5 : 1;
    spec.disorder_width = 1.0 + static_cast<double>(seed);
    spec.seed = seed;
    REQUIRE(build_hamiltonian(spec).hermiticity_defect() < 1e-12);
  }
  ModelSpec custom;
  custom.kind = ModelKind::custom;
  custom.dim = 2;
  custom.side = 5;
  custom.orbitals = 2;
  custom.hoppings = {Hopping{Site{0, 0}, 0, 0, cplx(1.0, 0.0)},
                     Hopping{Site{0, 0}, 0, 1, cplx(0.3, 0.4)},
                     Hopping{Site{1, 0}, 1, 0, cplx(0.0, 0.5)},
                     Hopping{Site{0, 1}, 0, 0, cplx(-1.0, 0.2)}};
  REQUIRE(build_hamiltonian(custom).hermiticity_defect() < 1e-12);
}

TEST_CASE("block arithmetic matches dense arithmetic", "[lattice][arith]") {
  std::mt19937_64 gen(11);
  LatticeBox box(1, 3);
  const BlockOperator a = testing::random_local_operator(box, 2, gen);
  const BlockOperator b = testing::random_local_operator(box, 2, gen);
  const BlockOperator id = BlockOperator::identity(box, 2);
  REQUIRE(compose(id, a).dense() == a.dense());
  REQUIRE(adjoint(adjoint(a)).dense() == a.dense());

  LatticeBox two(1, 1);
  // Two sites are not an odd box, so use a single-site box with N = 2 and a 3-site N = 1 pair.
  const BlockOperator p = testing::random_local_operator(two, 2, gen);
  const BlockOperator q = testing::random_local_operator(two, 2, gen);
  Matrix product = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) product(i, j) += p.dense()(i, k) * q.dense()(k, j);
  REQUIRE(testing::max_abs(compose(p, q).dense() - product) < 1e-14);

  REQUIRE(testing::max_abs(add(a, b).dense() - (a.dense() + b.dense())) == 0.0);
  REQUIRE(testing::max_abs(subtract(a, b).dense() - (a.dense() - b.dense())) == 0.0);
  REQUIRE(testing::max_abs(scale(a, cplx(0.0, 2.0)).dense() - cplx(0.0, 2.0) * a.dense()) == 0.0);

  const BlockOperator h = testing::random_hermitian(box, 2, gen);
  REQUIRE(adjoint(h).hermitian());
  REQUIRE_FALSE(scale(h, cplx(0.0, 1.0)).hermitian());
  REQUIRE(scale(h, cplx(2.0, 0.0)).hermitian());

  REQUIRE_THROWS_AS(compose(a, BlockOperator::identity(box, 1)), std::invalid_argument);
  REQUIRE_THROWS_AS(add(a, BlockOperator::identity(LatticeBox(1, 5), 2)), std::invalid_argument);
}

TEST_CASE("holmgren bound examples", "[lattice][norm]") {
  LatticeBox box(2, 3);
  REQUIRE(holmgren_bound(BlockOperator::identity(box, 2)) == Approx(1.0));
  Matrix m = Matrix::Zero(18, 18);
  const cplx c(0.6, -0.8);
  m.block(0, 4, 2, 2) = c * Matrix::Identity(2, 2);
  REQUIRE(holmgren_bound(BlockOperator(box, 2, m)) == Approx(std::abs(c)));

  std::mt19937_64 gen(3);
  const BlockOperator h = testing::random_hermitian(LatticeBox(1, 3), 1, gen);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.dense());
  REQUIRE(holmgren_bound(h) >= es.eigenvalues().cwiseAbs().maxCoeff() - 1e-12);
}

TEST_CASE("holmgren bound dominates the operator norm", "[lattice][norm][property]") {
  std::mt19937_64 gen(5);
  LatticeBox box(2, 3);
  for (int k = 0; k < 100; ++k) {
    const BlockOperator a = testing::random_local_operator(box, 1 + k % 2, gen, 1.0, 0.3 * (k % 4));
    REQUIRE(holmgren_bound(a) >= operator_norm(a) - 1e-9);
  }
}

TEST_CASE("operator norm examples", "[lattice][norm]") {
  LatticeBox box(1, 1);
  REQUIRE(operator_norm(BlockOperator(box, 3)) == 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = 2.0;
  REQUIRE(operator_norm(BlockOperator(box, 2, d, true)) == Approx(2.0).epsilon(1e-12));

  ModelSpec chain;
  chain.dim = 1;
  chain.side = 101;
  const double expected = 2.0 * std::cos(std::numbers::pi / 102.0);
  REQUIRE(std::abs(operator_norm(build_hamiltonian(chain)) - expected) < 1e-6);

  std::mt19937_64 gen(8);
  const BlockOperator a = testing::random_local_operator(LatticeBox(1, 5), 2, gen);
  Eigen::JacobiSVD<Matrix> svd(a.dense());
  REQUIRE(operator_norm(a) == Approx(svd.singularValues()(0)).epsilon(1e-9));
}

TEST_CASE("switch function tables", "[lattice][switch]") {
  for (const SwitchFunction& sw : {SwitchFunction::sharp(), SwitchFunction::smooth()}) {
    for (int n = -60; n <= -sw.support(); ++n) REQUIRE(sw(n) == 0.0);
    for (int n = sw.support(); n <= 60; ++n) REQUIRE(sw(n) == 1.0);
    for (int n = -60; n < 60; ++n) REQUIRE(sw(n + 1) >= sw(n));
    REQUIRE(sw.total_variation() == Approx(1.0));
  }
  const SwitchFunction sharp = SwitchFunction::sharp();
  REQUIRE(sharp(0) == 1.0);
  REQUIRE(sharp(-1) == 0.0);
  REQUIRE(SwitchFunction::smooth()(0) == Approx(0.5));
  REQUIRE(SwitchFunction::by_name("tanh").name() == "tanh");
  REQUIRE_THROWS_AS(SwitchFunction::by_name("erf"), std::invalid_argument);
  REQUIRE_THROWS_AS(SwitchFunction("bad", 1, {0.0, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(SwitchFunction("bad", 1, {0.1, 0.5, 1.0}), std::invalid_argument);
}

namespace {

Matrix switch_matrix(const LatticeBox& box, int orbitals, int axis, const SwitchFunction& sw) {
  const auto n = static_cast<Eigen::Index>(box.size()) * orbitals;
  Matrix lam = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < box.size(); ++s)
    for (int o = 0; o < orbitals; ++o) {
      const auto i = static_cast<Eigen::Index>(s) * orbitals + o;
      lam(i, i) = sw(box.coordinate(s, axis - 1));
    }
  return lam;
}

}  // namespace

TEST_CASE("nc_derivative examples", "[lattice][derivative]") {
  LatticeBox box(2, 3);
  const SwitchFunction sharp = SwitchFunction::sharp();
  std::vector<double> values(18);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i) - 4.5;
  const BlockOperator diag = testing::diagonal_operator(box, values);
  REQUIRE(testing::max_abs(nc_derivative(diag, 1, sharp).dense()) == 0.0);
  REQUIRE(testing::max_abs(nc_derivative(diag, 2, sharp).dense()) == 0.0);

  LatticeBox line(1, 3);
  Matrix bond = Matrix::Zero(3, 3);
  const auto x = static_cast<Eigen::Index>(line.index_of(Site{-1, 0}));
  const auto y = static_cast<Eigen::Index>(line.index_of(Site{0, 0}));
  bond(x, y) = 1.0;
  const BlockOperator d = nc_derivative(BlockOperator(line, 1, bond), 1, sharp);
  // -i (Lambda(-1) - Lambda(0)) = i
  REQUIRE(d.dense()(x, y) == cplx(0.0, 1.0));
  REQUIRE(testing::max_abs(d.dense()) == 1.0);

  REQUIRE_THROWS_AS(nc_derivative(BlockOperator(line, 1, bond), 2, sharp), std::invalid_argument);
}

TEST_CASE("nc_derivative matches the dense commutator", "[lattice][derivative]") {
  std::mt19937_64 gen(21);
  LatticeBox box(2, 5);
  for (const SwitchFunction& sw : {SwitchFunction::sharp(), SwitchFunction::smooth()}) {
    for (int orbitals : {1, 2}) {
      const BlockOperator a = testing::random_local_operator(box, orbitals, gen);
      for (int axis : {1, 2}) {
        const Matrix lam = switch_matrix(box, orbitals, axis, sw);
        const Matrix oracle = cplx(0.0, -1.0) * (lam * a.dense() - a.dense() * lam);
        REQUIRE(testing::max_abs(nc_derivative(a, axis, sw).dense() - oracle) < 1e-13);
      }
    }
  }
}

TEST_CASE("nc_derivative is a derivation on products", "[lattice][derivative][property]") {
  std::mt19937_64 gen(22);
  LatticeBox box(2, 5);
  for (int k = 0; k < 20; ++k) {
    const SwitchFunction sw = k % 2 ? SwitchFunction::smooth() : SwitchFunction::sharp();
    const BlockOperator a = testing::random_local_operator(box, 1, gen);
    const BlockOperator b = testing::random_local_operator(box, 1, gen);
    const int axis = 1 + k % 2;
    const Matrix lhs = nc_derivative(compose(a, b), axis, sw).dense();
    const Matrix rhs = nc_derivative(a, axis, sw).dense() * b.dense() +
                       a.dense() * nc_derivative(b, axis, sw).dense();
    REQUIRE(testing::max_abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("trace norm estimate examples", "[lattice][trace]") {
  LatticeBox box(2, 3);
  std::mt19937_64 gen(4);
  const BlockOperator a = testing::random_local_operator(box, 1, gen);
  REQUIRE(trace_norm_estimate(a, BlockOperator(box, 1)) == 0.0);

  Matrix proj = Matrix::Zero(9, 9);
  proj(4, 4) = 1.0;
  const BlockOperator p(box, 1, proj, true);
  REQUIRE(trace_norm_estimate(p, p) == 1.0);
  REQUIRE(trace_norm(compose(p, p)) == Approx(1.0));

  LatticeBox four(2, 3);
  for (int k = 0; k < 20; ++k) {
    const BlockOperator x = testing::random_local_operator(four, 2, gen);
    const BlockOperator y = testing::random_local_operator(four, 2, gen);
    Eigen::JacobiSVD<Matrix> svd(x.dense() * y.dense());
    REQUIRE(trace_norm_estimate(x, y) >= svd.singularValues().sum() - 1e-9);
  }
}

TEST_CASE("operator text dump round-trips", "[lattice][io]") {
  std::mt19937_64 gen(9);
  const BlockOperator a = testing::random_local_operator(LatticeBox(2, 3), 2, gen);
  std::stringstream buf;
  write_operator(buf, a);
  const BlockOperator b = read_operator(buf);
  REQUIRE(b.same_shape(a));
  REQUIRE(b.dense() == a.dense());
  REQUIRE(b.hermitian() == a.hermitian());

  std::stringstream bad("# not an operator\n");
  REQUIRE_THROWS(read_operator(bad));
}
