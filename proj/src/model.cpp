#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mobgap/lattice.hpp"
#include "mobgap/rng.hpp"

namespace mobgap {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::hofstadter:
      return "hofstadter";
    case ModelKind::anderson:
      return "anderson";
    case ModelKind::custom:
      return "custom";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& text) {
  if (text == "hofstadter") return ModelKind::hofstadter;
  if (text == "anderson") return ModelKind::anderson;
  if (text == "custom") return ModelKind::custom;
  throw std::invalid_argument("unknown model kind '" + text + "'");
}

void ModelSpec::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("d must be 1 or 2");
  if (side < 1 || side % 2 == 0) throw std::invalid_argument("L must be a positive odd integer");
  if (orbitals < 1) throw std::invalid_argument("N must be >= 1");
  if (flux_q < 1) throw std::invalid_argument("flux_q must be >= 1");
  if (std::gcd(flux_p, flux_q) != 1) throw std::invalid_argument("flux p/q must be in lowest terms");
  if (!(disorder_width >= 0.0) || !std::isfinite(disorder_width)) {
    throw std::invalid_argument("disorder_w must be finite and >= 0");
  }
  if (disorder_kind != "uniform") {
    throw std::invalid_argument("unsupported disorder kind '" + disorder_kind + "'");
  }
  if (!std::isfinite(energy_shift)) throw std::invalid_argument("energy_shift must be finite");
  if (kind == ModelKind::hofstadter && dim != 2) {
    throw std::invalid_argument("hofstadter kind requires d = 2");
  }
  if (kind != ModelKind::custom && !hoppings.empty()) {
    throw std::invalid_argument("hopping table is only allowed for the custom kind");
  }
  if (kind != ModelKind::hofstadter && flux_p != 0) {
    throw std::invalid_argument("flux is only allowed for the hofstadter kind");
  }
  for (const Hopping& h : hoppings) {
    if (h.from_orbital < 0 || h.from_orbital >= orbitals || h.to_orbital < 0 ||
        h.to_orbital >= orbitals) {
      throw std::invalid_argument("hopping orbital index out of range");
    }
    if (std::abs(h.displacement[0]) > side - 1 || std::abs(h.displacement[1]) > side - 1) {
      throw std::invalid_argument("hopping range does not fit inside the box");
    }
    if (dim == 1 && h.displacement[1] != 0) {
      throw std::invalid_argument("hopping displacement has a second component in d = 1");
    }
    const bool onsite_diag = h.displacement == Site{0, 0} && h.from_orbital == h.to_orbital;
    if (onsite_diag && h.amplitude.imag() != 0.0) {
      throw std::invalid_argument("on-site diagonal hopping must be real");
    }
  }
}

double disorder_value(const ModelSpec& spec, std::size_t site, int orbital) {
  const auto index = static_cast<std::uint64_t>(site) * static_cast<std::uint64_t>(spec.orbitals) +
                     static_cast<std::uint64_t>(orbital);
  return rng::centered(spec.seed, rng::kDisorderStream, index, spec.disorder_width);
}

namespace {

/// exp(2 pi i p x / q) with the integer product reduced mod q first.
cplx landau_phase(long p, long q, int x) {
  long r = (p * x) % q;
  if (r < 0) r += q;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(q);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

BlockOperator build_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  const LatticeBox box = spec.box();
  const int n_orb = spec.orbitals;
  const auto n = static_cast<Eigen::Index>(box.size()) * n_orb;
  Matrix h = Matrix::Zero(n, n);

  auto add_bond = [&](std::size_t to, int to_orb, std::size_t from, int from_orb, cplx t) {
    const Eigen::Index i = static_cast<Eigen::Index>(to) * n_orb + to_orb;
    const Eigen::Index j = static_cast<Eigen::Index>(from) * n_orb + from_orb;
    h(i, j) += t;
    h(j, i) += std::conj(t);
  };

  if (spec.kind == ModelKind::custom) {
    for (std::size_t s = 0; s < box.size(); ++s) {
      const Site x = box.site(s);
      for (const Hopping& hop : spec.hoppings) {
        const Site target{x[0] + hop.displacement[0], x[1] + hop.displacement[1]};
        auto t = box.find(target);
        if (!t) continue;
        if (hop.displacement == Site{0, 0} && hop.from_orbital == hop.to_orbital) {
          const Eigen::Index i = static_cast<Eigen::Index>(s) * n_orb + hop.from_orbital;
          h(i, i) += hop.amplitude.real();
        } else {
          add_bond(*t, hop.to_orbital, s, hop.from_orbital, hop.amplitude);
        }
      }
    }
  } else {
    for (std::size_t s = 0; s < box.size(); ++s) {
      const Site x = box.site(s);
      if (auto t = box.find(Site{x[0] + 1, x[1]})) {
        for (int o = 0; o < n_orb; ++o) add_bond(*t, o, s, o, 1.0);
      }
      if (spec.dim == 2) {
        if (auto t = box.find(Site{x[0], x[1] + 1})) {
          const cplx phase = spec.kind == ModelKind::hofstadter
                                 ? landau_phase(spec.flux_p, spec.flux_q, x[0])
                                 : cplx(1.0, 0.0);
          for (int o = 0; o < n_orb; ++o) add_bond(*t, o, s, o, phase);
        }
      }
    }
  }

  if (spec.disorder_width > 0.0) {
    for (std::size_t s = 0; s < box.size(); ++s)
      for (int o = 0; o < n_orb; ++o) {
        const Eigen::Index i = static_cast<Eigen::Index>(s) * n_orb + o;
        h(i, i) += disorder_value(spec, s, o);
      }
  }
  if (spec.energy_shift != 0.0) h.diagonal().array() += spec.energy_shift;

  return BlockOperator(box, n_orb, std::move(h), true);
}

void write_operator(std::ostream& out, const BlockOperator& a) {
  const Matrix& m = a.dense();
  std::size_t nonzero = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != cplx(0.0, 0.0)) ++nonzero;

  std::ostringstream body;
  body << std::setprecision(17);
  body << "# mobgap-operator v1\n";
  body << "dim " << a.box().dim() << "\n";
  body << "side " << a.box().side() << "\n";
  body << "orbitals " << a.orbitals() << "\n";
  body << "hermitian " << (a.hermitian() ? 1 : 0) << "\n";
  body << "entries " << nonzero << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != cplx(0.0, 0.0)) {
        body << i << " " << j << " " << m(i, j).real() << " " << m(i, j).imag() << "\n";
      }
  out << body.str();
}

BlockOperator read_operator(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# mobgap-operator v1") {
    throw std::invalid_argument("operator dump: missing '# mobgap-operator v1' header");
  }
  auto read_field = [&](const std::string& name) {
    std::string key;
    long value = 0;
    if (!(in >> key >> value) || key != name) {
      throw std::invalid_argument("operator dump: expected field '" + name + "'");
    }
    return value;
  };
  const int dim = static_cast<int>(read_field("dim"));
  const int side = static_cast<int>(read_field("side"));
  const int orbitals = static_cast<int>(read_field("orbitals"));
  const bool hermitian = read_field("hermitian") != 0;
  const long entries = read_field("entries");
  LatticeBox box(dim, side);
  const auto n = static_cast<Eigen::Index>(box.size()) * orbitals;
  Matrix m = Matrix::Zero(n, n);
  for (long k = 0; k < entries; ++k) {
    Eigen::Index i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(in >> i >> j >> re >> im)) throw std::invalid_argument("operator dump: truncated entries");
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::invalid_argument("operator dump: entry index out of range");
    }
    m(i, j) = cplx(re, im);
  }
  return BlockOperator(box, orbitals, std::move(m), hermitian);
}

}  // namespace mobgap
