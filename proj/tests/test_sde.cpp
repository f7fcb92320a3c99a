#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "heatchain/errors.hpp"
#include "heatchain/sde.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

TEST_CASE("Euler-Maruyama step adds drift and noise on r only", "[sde]") {
  const auto m = testing::quadratic_model(0.2, 0.4);
  State x(2, 1);
  x.vec() << 0.1, -0.3, 0.5, 0.2, -0.1, 0.4;
  const double h = 0.01;
  const std::vector<double> gauss{0.7, -1.2};
  const State y = sde_step(m, x, h, gauss);
  Vec expect = x.vec() + h * drift(m, x);
  const Vec s = noise_diagonal(m);
  expect[4] += std::sqrt(m.eps * h) * s[0] * gauss[0];
  expect[5] += std::sqrt(m.eps * h) * s[1] * gauss[1];
  CHECK((y.vec() - expect).norm() < 1e-14);
}

TEST_CASE("semi-implicit step with zero noise is symplectic Euler plus implicit r relaxation", "[sde]") {
  const auto m = testing::quadratic_model(0.0);
  State x(2, 1);
  x.vec() << 0.1, -0.3, 0.5, 0.2, -0.1, 0.4;
  const double h = 0.05;
  const std::vector<double> gauss{0.0, 0.0};
  const State y = sde_step(m, x, h, gauss, SdeScheme::semi_implicit);
  const Vec f = drift(m, x);
  Vec p = x.p() + h * f.head(2);
  Vec q = x.q() + h * p;
  const double gh = h * m.gamma;
  CHECK((y.p() - p).norm() < 1e-14);
  CHECK((y.q() - q).norm() < 1e-14);
  CHECK(y.r()(0) == Approx((x.r()(0) + gh * m.lambda2 * q(0)) / (1.0 + gh)).epsilon(1e-14));
  CHECK(y.r()(1) == Approx((x.r()(1) + gh * m.lambda2 * q(1)) / (1.0 + gh)).epsilon(1e-14));
}

TEST_CASE("integrator consumes the counter-based stream step by step", "[sde]") {
  const auto m = testing::double_well_model(0.2);
  const auto sets = testing::critical_sets(m);
  const NormalStream noise(77, 3);
  SdeIntegrator it(m, sets[0].point, 0.01, noise);
  State x = sets[0].point;
  std::vector<double> g(2);
  for (int k = 0; k < 100; ++k) {
    noise.normals(k, g);
    x = sde_step(m, x, 0.01, g);
    it.advance();
  }
  CHECK(it.state() == x.vec());
  CHECK(it.time() == Approx(1.0));
}

TEST_CASE("simulate is reproducible and honours thinning", "[sde]") {
  const auto m = testing::double_well_model(0.2);
  const auto sets = testing::critical_sets(m);
  SimulateOptions o;
  o.T = 5.0;
  o.h = 0.01;
  o.seed = 5;
  o.thin = 10;
  const auto a = simulate(m, sets[0].point, o);
  const auto b = simulate(m, sets[0].point, o);
  REQUIRE(a.trajectory.states.size() == 51);
  CHECK(a.trajectory.times.back() == Approx(5.0));
  for (std::size_t k = 0; k < a.trajectory.states.size(); ++k) CHECK(a.trajectory.states[k] == b.trajectory.states[k]);
  o.seed = 6;
  const auto c = simulate(m, sets[0].point, o);
  CHECK_FALSE(c.trajectory.states.back() == a.trajectory.states.back());
}

TEST_CASE("hitting times agree between serial and parallel runs", "[sde][parallel]") {
  const auto m = testing::double_well_model(0.3);
  const auto sets = testing::critical_sets(m);
  const Region target = Region::ball(sets[1].point.vec(), 0.3, {2, 3});
  const auto a = hitting_times(m, sets[0].point, target, 0.02, 99, 1e4, 6, Exec::serial, SdeScheme::semi_implicit);
  const auto b = hitting_times(m, sets[0].point, target, 0.02, 99, 1e4, 6, Exec::parallel, SdeScheme::semi_implicit);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].time == b[k].time);
    CHECK(a[k].time.has_value());
  }
  CHECK(hitting_time(m, sets[0].point, target, 0.02, 99, 1e4, 2, SdeScheme::semi_implicit) == a[2].time);
}

TEST_CASE("blow-up raises a numerical error", "[sde][validation]") {
  const auto m = testing::double_well_model(0.2);
  State x(2, 1);
  x.vec() << 0, 0, 50.0, -50.0, 0, 0;
  SdeIntegrator it(m, x, 0.5, NormalStream(1, 0), SdeScheme::euler_maruyama, 1e6);
  CHECK_THROWS_AS([&] {
    for (int k = 0; k < 100; ++k) it.advance();
  }(), NumericalError);
}

TEST_CASE("stationary q variance of the harmonic chain matches eps H^-1", "[sde][gibbs]") {
  const double eps = 0.2;
  const auto m = testing::quadratic_model(eps);
  const Mat C = eps * oracle::harmonic_chain_hessian(2, 1.0, 1.0, 0.5).inverse();
  SdeIntegrator it(m, State(2, 1), 0.005, NormalStream(2024, 0), SdeScheme::semi_implicit);
  for (int k = 0; k < 20000; ++k) it.advance();
  double s2 = 0.0;
  double s12 = 0.0;
  const int N = 4000000;
  for (int k = 0; k < N; ++k) {
    it.advance();
    const Vec& x = it.state();
    s2 += x[2] * x[2];
    s12 += x[2] * x[3];
  }
  CHECK(s2 / N == Approx(C(2, 2)).epsilon(0.1));
  CHECK(s12 / N == Approx(C(2, 3)).epsilon(0.15));
}
