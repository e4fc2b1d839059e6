#pragma once

#include <vector>

namespace mobgap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// `panels` equal panels on [a, b], each carrying an `order`-point Gauss-Legendre rule.
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

/// `count` points log-spaced from lo to hi inclusive (count == 1 gives lo).
std::vector<double> log_grid(double lo, double hi, int count);
/// `count` points evenly spaced from lo to hi inclusive (count == 1 gives the midpoint).
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace mobgap
