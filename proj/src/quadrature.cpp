#include "mobgap/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mobgap {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = mid - half * z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * z;
    rule.weights[static_cast<std::size_t>(i)] = half * w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: need >= 1 panel");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels * order));
  rule.weights.reserve(static_cast<std::size_t>(panels * order));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t k = 0; k < base.nodes.size(); ++k) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
      rule.weights.push_back(0.5 * h * base.weights[k]);
    }
  }
  return rule;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1) return {};
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("log_grid: bounds must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = lo * std::exp(step * k);
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) return {};
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  const double step = (hi - lo) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = lo + step * k;
  out.back() = hi;
  return out;
}

}  // namespace mobgap
