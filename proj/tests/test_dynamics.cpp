#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "heatchain/dynamics.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

TEST_CASE("harmonic chain has a single stable critical point at the origin", "[dynamics][critical]") {
  const auto m = testing::quadratic_model();
  const auto sets = testing::critical_sets(m);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].point.vec().norm() < 1e-9);
  CHECK(sets[0].stability == Stability::stable);
  CHECK(sets[0].g_value == Approx(0.0).margin(1e-12));
  // Effective Hessian [[1.5, -1], [-1, 1.5]] has eigenvalues 0.5 and 2.5.
  REQUIRE(sets[0].hessian_spectrum.size() == 2);
  CHECK(sets[0].hessian_spectrum[0] == Approx(0.5));
  CHECK(sets[0].hessian_spectrum[1] == Approx(2.5));
}

TEST_CASE("double well has two wells and a saddle at closed-form positions", "[dynamics][critical]") {
  const auto m = testing::double_well_model();
  const auto sets = testing::critical_sets(m);
  REQUIRE(sets.size() == 3);
  // Symmetric wells q1 = q2 = +-s with s^2 = 1 + lambda2, G = -2 (1 + lambda2)^2 / 4.
  const double s = std::sqrt(1.1);
  for (int i : {0, 1}) {
    CHECK(sets[i].stability == Stability::stable);
    CHECK(sets[i].g_value == Approx(-0.605).epsilon(1e-10));
    CHECK(std::abs(sets[i].point.q()(0)) == Approx(s).epsilon(1e-8));
    CHECK(sets[i].point.q()(1) == Approx(sets[i].point.q()(0)).epsilon(1e-8));
    CHECK(sets[i].point.r()(0) == Approx(0.1 * sets[i].point.q()(0)).epsilon(1e-8));
  }
  CHECK(sets[0].point.q()(0) * sets[1].point.q()(0) < 0.0);
  CHECK(sets[2].stability == Stability::saddle);
  CHECK(sets[2].g_value == Approx(0.0).margin(1e-10));
  CHECK(sets[2].point.vec().norm() < 1e-8);
}

TEST_CASE("critical point search is identical serial and parallel", "[dynamics][parallel]") {
  const auto m = testing::double_well_model(0.0, 0.0, 0.1);
  const auto seeds = default_seeds(m, 3.0, 7);
  const auto a = find_critical_points(m, seeds, {}, Exec::serial);
  const auto b = find_critical_points(m, seeds, {}, Exec::parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].point == b[i].point);
    CHECK(a[i].g_value == b[i].g_value);
  }
}

TEST_CASE("G is non-increasing along the zero-temperature flow", "[dynamics][lyapunov]") {
  const auto m = testing::double_well_model();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    State x(2, 1);
    for (int i = 0; i < x.size(); ++i) x.vec()[i] = g(rng);
    const auto path = integrate_zero_T(m, x, 50.0, 0.01);
    double worst = 0.0;
    for (std::size_t j = 1; j < path.g_values.size(); ++j) {
      worst = std::max(worst, path.g_values[j] - path.g_values[j - 1]);
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("every flow trajectory is captured by a critical set", "[dynamics][omega]") {
  const auto m = testing::double_well_model();
  const auto sets = testing::critical_sets(m);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<State> starts;
  for (int k = 0; k < 16; ++k) {
    State x(2, 1);
    for (int i = 0; i < x.size(); ++i) x.vec()[i] = g(rng);
    starts.push_back(x);
  }
  const auto serial = omega_limit_batch(m, sets, starts, {}, Exec::serial);
  const auto parallel = omega_limit_batch(m, sets, starts, {}, Exec::parallel);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    REQUIRE(serial[k].id.has_value());
    CHECK(sets[*serial[k].id].stability == Stability::stable);
    CHECK(serial[k].max_g_increase <= 1e-10);
    CHECK(parallel[k].id == serial[k].id);
    CHECK(parallel[k].time == serial[k].time);
  }
}

TEST_CASE("a start on a critical point stays there", "[dynamics][omega]") {
  const auto m = testing::double_well_model();
  const auto sets = testing::critical_sets(m);
  const auto res = omega_limit(m, sets, sets[2].point);
  REQUIRE(res.id.has_value());
  CHECK(*res.id == 2);
  CHECK(res.time == 0.0);
}

TEST_CASE("rk4 integrates the harmonic flow to fourth order", "[dynamics]") {
  const auto m = testing::quadratic_model();
  State x(2, 1);
  x.vec() << 0.5, -0.2, 0.3, 0.1, 0.0, 0.2;
  const State ref(2, 1, integrate_zero_T(m, x, 2.0, 1e-4).states.back().vec());
  const double e1 = (integrate_zero_T(m, x, 2.0, 0.1).states.back().vec() - ref.vec()).norm();
  const double e2 = (integrate_zero_T(m, x, 2.0, 0.05).states.back().vec() - ref.vec()).norm();
  CHECK(std::log2(e1 / e2) == Approx(4.0).margin(0.3));
}
