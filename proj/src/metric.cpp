#include "mobgap/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mobgap {

std::vector<double> distance_profile(const BlockOperator& difference) {
  const LatticeBox& box = difference.box();
  std::vector<double> profile(static_cast<std::size_t>(box.diameter()) + 1, 0.0);
  const RealMatrix norms = difference.block_norms();
  for (std::size_t y = 0; y < box.size(); ++y)
    for (std::size_t x = 0; x < box.size(); ++x) {
      auto& slot = profile[static_cast<std::size_t>(box.distance(x, y))];
      slot = std::max(slot, norms(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
    }
  return profile;
}

double envelope_constant(const std::vector<double>& profile, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("envelope rate must be positive");
  double c = 0.0;
  for (std::size_t r = 0; r < profile.size(); ++r) {
    if (profile[r] > 0.0) c = std::max(c, profile[r] * std::exp(mu * static_cast<double>(r)));
  }
  return c;
}

double envelope_constant(const BlockOperator& difference, double mu) {
  return envelope_constant(distance_profile(difference), mu);
}

MetricResult local_distance(const BlockOperator& a, const BlockOperator& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("local_distance: shape mismatch");
  const auto profile = distance_profile(subtract(a, b));
  if (std::all_of(profile.begin(), profile.end(), [](double v) { return v == 0.0; })) {
    return {0.0, std::numeric_limits<double>::infinity(), 0.0, a.box()};
  }

  auto c_of = [&](double mu) { return envelope_constant(profile, mu); };
  // C(mu) - 1/mu is nondecreasing; the minimum of max(C, 1/mu) sits at its root.
  double lo = kMetricRateMin;
  double hi = kMetricRateMax;
  double mu = 0.0;
  if (c_of(lo) >= 1.0 / lo) {
    mu = lo;
  } else if (c_of(hi) <= 1.0 / hi) {
    mu = hi;
  } else {
    while (hi - lo > kMetricRateTol) {
      const double mid = 0.5 * (lo + hi);
      if (c_of(mid) < 1.0 / mid) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    // Take the side of the bracket with the smaller objective.
    mu = std::max(c_of(lo), 1.0 / lo) <= std::max(c_of(hi), 1.0 / hi) ? lo : hi;
  }
  const double value = std::max(c_of(mu), 1.0 / mu);

  // Where C(mu) is flat past the crossing, report the largest rate attaining the value.
  double mu_star = mu;
  if (c_of(kMetricRateMax) <= value) {
    mu_star = kMetricRateMax;
  } else if (c_of(mu) < value) {
    double l = mu;
    double h = kMetricRateMax;
    while (h - l > kMetricRateTol) {
      const double mid = 0.5 * (l + h);
      if (c_of(mid) <= value) {
        l = mid;
      } else {
        h = mid;
      }
    }
    mu_star = l;
  }
  return {value, mu_star, c_of(mu_star), a.box()};
}

bool envelope_check(const BlockOperator& a, const BlockOperator& b, double t, double slack) {
  if (!(t > 0.0)) throw std::invalid_argument("envelope_check: t must be positive");
  if (!a.same_shape(b)) throw std::invalid_argument("envelope_check: shape mismatch");
  const double tt = t + slack;
  const auto profile = distance_profile(subtract(a, b));
  for (std::size_t r = 0; r < profile.size(); ++r) {
    if (profile[r] > tt * std::exp(-static_cast<double>(r) / tt)) return false;
  }
  return true;
}

double opnorm_bound_from_metric(double dl, int dim) {
  if (!(dl > 0.0)) throw std::invalid_argument("opnorm_bound_from_metric: dl must be positive");
  const double arg = 1.0 / (2.0 * dl);
  // coth(arg) = 1 to double precision once arg > ~19
  const double coth = arg > 40.0 ? 1.0 : 1.0 / std::tanh(arg);
  return dl * std::pow(coth, dim);
}

}  // namespace mobgap
