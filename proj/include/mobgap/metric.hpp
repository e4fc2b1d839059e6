#pragma once

#include <vector>

#include "mobgap/lattice.hpp"

namespace mobgap {

/// Exponential envelope C e^{-mu |x-y|}.
struct DecayEnvelope {
  double amplitude;
  double rate;
};

/// Finite-box estimate of the local distance. `value` always refers to the box it was
/// computed on; a larger box can only increase it.
struct MetricResult {
  double value;
  double mu_star;
  double c_star;
  LatticeBox box;
};

inline constexpr double kMetricRateMin = 1e-3;
inline constexpr double kMetricRateMax = 50.0;
inline constexpr double kMetricRateTol = 1e-9;

/// Largest block norm at each 1-norm distance r = 0..diameter.
std::vector<double> distance_profile(const BlockOperator& difference);

/// Minimal C with |D_xy| <= C e^{-mu |x-y|} on the box: max over pairs of |D_xy| e^{mu |x-y|}.
double envelope_constant(const BlockOperator& difference, double mu);
double envelope_constant(const std::vector<double>& profile, double mu);

/// min over mu in [1e-3, 50] of max(C(mu), 1/mu). Exactly 0 when A == B.
MetricResult local_distance(const BlockOperator& a, const BlockOperator& b);

/// True iff |(A-B)_xy| <= (t+slack) e^{-|x-y|/(t+slack)} for every pair.
bool envelope_check(const BlockOperator& a, const BlockOperator& b, double t, double slack = 1e-9);

/// dl * coth(1/(2 dl))^d, the operator-norm bound implied by a local distance dl.
double opnorm_bound_from_metric(double dl, int dim);

}  // namespace mobgap
