#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mobgap/lattice.hpp"
#include "mobgap/metric.hpp"

using namespace mobgap;
using Catch::Approx;

namespace {

/// |D_xy| = amplitude e^{-rate |x-y|} with unit-modulus phases.
BlockOperator synthetic_difference(const LatticeBox& box, double amplitude, double rate) {
  const auto n = static_cast<Eigen::Index>(box.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const int d = box.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      m(i, j) = std::polar(amplitude * std::exp(-rate * d), 0.37 * static_cast<double>(i - 2 * j));
    }
  return BlockOperator(box, 1, std::move(m));
}

/// Grid minimum of max(C(mu), 1/mu), refined around the best grid point.
double grid_local_distance(const BlockOperator& d) {
  auto g = [&](double mu) { return std::max(envelope_constant(d, mu), 1.0 / mu); };
  double best_mu = kMetricRateMin;
  double best = g(best_mu);
  const int n = 20000;
  for (int k = 0; k <= n; ++k) {
    const double mu = kMetricRateMin * std::pow(kMetricRateMax / kMetricRateMin, double(k) / n);
    const double v = g(mu);
    if (v < best) {
      best = v;
      best_mu = mu;
    }
  }
  for (int k = -2000; k <= 2000; ++k) {
    const double mu = best_mu * (1.0 + 1e-6 * k);
    if (mu < kMetricRateMin || mu > kMetricRateMax) continue;
    best = std::min(best, g(mu));
  }
  return best;
}

BlockOperator random_operator(const LatticeBox& box, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> amp(0.05, 2.0);
  std::uniform_real_distribution<double> rate(0.1, 3.0);
  return testing::random_local_operator(box, 1, gen, amp(gen), rate(gen));
}

}  // namespace

TEST_CASE("envelope constant examples", "[metric]") {
  LatticeBox box(2, 7);
  const BlockOperator zero(box, 1);
  REQUIRE(envelope_constant(zero, 0.7) == 0.0);

  std::vector<double> values(box.size(), 0.1);
  values[5] = -0.3;
  const BlockOperator diag = testing::diagonal_operator(box, values);
  for (double mu : {1e-3, 0.5, 10.0, 50.0}) REQUIRE(envelope_constant(diag, mu) == Approx(0.3));

  const BlockOperator syn = synthetic_difference(box, 2.0, 0.5);
  REQUIRE(envelope_constant(syn, 0.5) == Approx(2.0).epsilon(1e-12));
  REQUIRE(envelope_constant(syn, 0.6) == Approx(2.0 * std::exp(0.1 * box.diameter())).epsilon(1e-12));

  REQUIRE_THROWS_AS(envelope_constant(syn, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(envelope_constant(syn, -1.0), std::invalid_argument);
}

TEST_CASE("local distance examples", "[metric]") {
  LatticeBox box(2, 7);
  std::mt19937_64 gen(1);
  const BlockOperator a = random_operator(box, gen);
  const MetricResult same = local_distance(a, a);
  REQUIRE(same.value == 0.0);

  std::vector<double> values(box.size(), 0.0);
  values[3] = 0.3;
  const MetricResult diag = local_distance(add(a, testing::diagonal_operator(box, values)), a);
  REQUIRE(diag.value == Approx(0.3).epsilon(1e-12));
  REQUIRE(diag.mu_star == Approx(kMetricRateMax));

  const MetricResult syn = local_distance(synthetic_difference(box, 2.0, 0.5), BlockOperator(box, 1));
  REQUIRE(syn.value == Approx(2.0).epsilon(1e-9));
  REQUIRE(syn.value == Approx(grid_local_distance(synthetic_difference(box, 2.0, 0.5))).epsilon(1e-6));

  REQUIRE_THROWS_AS(local_distance(a, BlockOperator(LatticeBox(2, 5), 1)), std::invalid_argument);
}

TEST_CASE("local distance agrees with a grid-search oracle", "[metric]") {
  std::mt19937_64 gen(2);
  LatticeBox box(2, 5);
  for (int k = 0; k < 10; ++k) {
    const BlockOperator a = random_operator(box, gen);
    const BlockOperator b = random_operator(box, gen);
    const MetricResult r = local_distance(a, b);
    const double oracle = grid_local_distance(subtract(a, b));
    REQUIRE(r.value == Approx(oracle).epsilon(1e-6));
    REQUIRE(r.value <= oracle + 1e-9);
  }
}

TEST_CASE("metric result invariants", "[metric][property]") {
  std::mt19937_64 gen(3);
  LatticeBox box(2, 9);
  for (int k = 0; k < 50; ++k) {
    const BlockOperator a = random_operator(box, gen);
    const BlockOperator b = random_operator(box, gen);
    const MetricResult r = local_distance(a, b);
    REQUIRE(std::isfinite(r.mu_star));
    REQUIRE(r.mu_star > 0.0);
    REQUIRE(r.c_star > 0.0);
    REQUIRE(r.value == Approx(std::max(r.c_star, 1.0 / r.mu_star)).margin(1e-9));
    const RealMatrix norms = subtract(a, b).block_norms();
    for (std::size_t x = 0; x < box.size(); ++x)
      for (std::size_t y = 0; y < box.size(); ++y)
        REQUIRE(norms(x, y) <= r.c_star * std::exp(-r.mu_star * box.distance(x, y)) * (1 + 1e-12));
    REQUIRE(envelope_check(a, b, r.value, 1e-9));
  }
}

TEST_CASE("envelope check examples", "[metric]") {
  LatticeBox box(1, 9);
  std::mt19937_64 gen(4);
  const BlockOperator a = random_operator(box, gen);
  REQUIRE(envelope_check(a, a, 1e-3));
  std::vector<double> values(box.size(), 0.0);
  values[0] = 0.3;
  const BlockOperator b = add(a, testing::diagonal_operator(box, values));
  // (a + 0.3) - a is 0.3 only up to round-off.
  REQUIRE(envelope_check(b, a, 0.3, 1e-12));
  REQUIRE_FALSE(envelope_check(b, a, 0.29, 0.0));
  REQUIRE_THROWS_AS(envelope_check(a, a, 0.0), std::invalid_argument);
}

TEST_CASE("local distance is a metric on random triples", "[metric][property]") {
  std::mt19937_64 gen(5);
  LatticeBox box(2, 9);
  for (int k = 0; k < 200; ++k) {
    const BlockOperator a = random_operator(box, gen);
    const BlockOperator b = random_operator(box, gen);
    const BlockOperator c = random_operator(box, gen);
    const double ab = local_distance(a, b).value;
    REQUIRE(ab == local_distance(b, a).value);
    REQUIRE(ab <= local_distance(a, c).value + local_distance(c, b).value + 1e-7);
  }
  // d = 0 forces A = B: any nonzero block raises d to at least its norm.
  const BlockOperator a = random_operator(box, gen);
  Matrix bumped = a.dense();
  bumped(3, 7) += 1e-8;
  REQUIRE(local_distance(a, BlockOperator(box, 1, bumped)).value >= 1e-8 * 0.999);
}

TEST_CASE("local distance is translation invariant", "[metric][property]") {
  std::mt19937_64 gen(6);
  LatticeBox box(2, 7);
  for (int k = 0; k < 20; ++k) {
    const BlockOperator a = random_operator(box, gen);
    const BlockOperator b = random_operator(box, gen);
    const BlockOperator noise = random_operator(box, gen);
    const double base = local_distance(a, b).value;
    const double moved = local_distance(add(a, noise), add(b, noise)).value;
    // Equal up to the rounding of the two additions.
    REQUIRE(moved == Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("local distance is not homogeneous", "[metric][property]") {
  LatticeBox box(1, 9);
  const BlockOperator d = synthetic_difference(box, 2.0, 0.5);
  const BlockOperator zero(box, 1);
  const double base = local_distance(zero, d).value;
  const double scaled = local_distance(zero, scale(d, 0.01)).value;
  // Scaling the amplitude by 0.01 cannot push the rate term 1/mu below its floor.
  REQUIRE(std::abs(scaled - 0.01 * base) > 1e-3);
}

TEST_CASE("local distance grows with the box", "[metric][property]") {
  std::mt19937_64 gen(7);
  for (int k = 0; k < 10; ++k) {
    std::uniform_real_distribution<double> amp(0.1, 2.0);
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    const double c = amp(gen);
    const double mu = rate(gen);
    // Same infinite-volume kernel restricted to nested boxes.
    double previous = 0.0;
    for (int side : {3, 5, 7, 9, 11}) {
      LatticeBox box(2, side);
      const auto n = static_cast<Eigen::Index>(box.size());
      Matrix m(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const Site& x = box.site(static_cast<std::size_t>(i));
          const Site& y = box.site(static_cast<std::size_t>(j));
          const int dist = box.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          const double wobble = 1.0 + 0.5 * std::sin(1.3 * x[0] + 0.7 * y[1] + 0.2 * x[1] * y[0]);
          m(i, j) = c * wobble * std::exp(-mu * dist * dist / 3.0);
        }
      const double value = local_distance(BlockOperator(box, 1, m), BlockOperator(box, 1)).value;
      REQUIRE(value >= previous - 1e-9);
      previous = value;
    }
  }
}

TEST_CASE("operator-norm bound from the metric", "[metric]") {
  REQUIRE(opnorm_bound_from_metric(1e-6, 2) < 2e-6);
  const double coth1 = std::cosh(1.0) / std::sinh(1.0);
  REQUIRE(opnorm_bound_from_metric(0.5, 2) == Approx(0.5 * coth1 * coth1).epsilon(1e-12));
  REQUIRE(opnorm_bound_from_metric(0.5, 2) == Approx(0.86203).epsilon(1e-5));
  double previous = 0.0;
  for (double dl = 0.01; dl < 5.0; dl *= 1.3) {
    const double v = opnorm_bound_from_metric(dl, 2);
    REQUIRE(v > previous);
    previous = v;
  }
  REQUIRE_THROWS_AS(opnorm_bound_from_metric(0.0, 1), std::invalid_argument);

  std::mt19937_64 gen(8);
  for (int dim : {1, 2}) {
    LatticeBox box(dim, dim == 1 ? 41 : 9);
    for (int k = 0; k < 50; ++k) {
      const BlockOperator a = random_operator(box, gen);
      const BlockOperator b = random_operator(box, gen);
      const double dl = local_distance(a, b).value;
      REQUIRE(operator_norm(subtract(a, b)) <= opnorm_bound_from_metric(dl, dim) * (1 + 1e-12));
    }
  }
}

TEST_CASE("distance profile takes the largest block per distance", "[metric]") {
  LatticeBox box(1, 5);
  const BlockOperator syn = synthetic_difference(box, 1.5, 0.25);
  const std::vector<double> profile = distance_profile(syn);
  REQUIRE(profile.size() == static_cast<std::size_t>(box.diameter() + 1));
  for (std::size_t r = 0; r < profile.size(); ++r)
    REQUIRE(profile[r] == Approx(1.5 * std::exp(-0.25 * static_cast<double>(r))).epsilon(1e-12));
}
