#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "heatchain/errors.hpp"
#include "heatchain/model.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

namespace {

Vec random_vec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

ModelParams random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(2, 4);
  std::uniform_int_distribution<int> d_dist(1, 2);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  const int n = n_dist(rng);
  const int d = d_dist(rng);
  PotentialSpec u1{PotentialKind::polynomial_even, {0, 0, u(rng), 0, 0.1 * u(rng)}};
  PotentialSpec u2{PotentialKind::polynomial_even, {0, 0, u(rng), 0, 0.1 * u(rng)}};
  return ModelParams::make(n, d, u1, u2, u(rng), u(rng), 0.1, 0.0);
}

}  // namespace

TEST_CASE("G of the harmonic chain is the oracle quadratic form", "[model]") {
  const auto m = testing::quadratic_model();
  const Mat H = oracle::harmonic_chain_hessian(2, 1.0, 1.0, 0.5);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_vec(rng, m.dim(), 1.0);
    const State s(2, 1, x);
    CHECK(eval_G(m, s) == Approx(0.5 * x.dot(H * x)).epsilon(1e-12));
    CHECK((hess_G(m, s) - H).norm() < 1e-10);
  }
}

TEST_CASE("grad G matches central differences on random models", "[model][gradient]") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto m = random_model(rng);
    const Vec x = random_vec(rng, m.dim(), 1.0);
    const Vec g = grad_G(m, State(m.n, m.d, x));
    const Vec fd = oracle::fd_gradient([&](const Vec& y) { return eval_G(m, State(m.n, m.d, y)); }, x);
    INFO("instance " << k);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("drift is the Hamiltonian vector field with bath damping", "[model]") {
  const auto m = testing::double_well_model();
  std::mt19937_64 rng(3);
  const Vec x = random_vec(rng, m.dim(), 1.0);
  const State s(2, 1, x);
  const Vec g = grad_G(m, s);
  const Vec f = drift(m, s);
  CHECK((f.segment(0, 2) + g.segment(2, 2)).norm() < 1e-12);
  CHECK((f.segment(2, 2) - g.segment(0, 2)).norm() < 1e-12);
  CHECK((f.segment(4, 2) + m.gamma * m.lambda2 * g.segment(4, 2)).norm() < 1e-12);
}

TEST_CASE("noise acts on r with temperatures (1 +- eta) eps", "[model]") {
  const auto m = testing::quadratic_model(0.2, 0.4);
  const Vec s = noise_diagonal(m);
  CHECK(s[0] == Approx(std::sqrt(2.0 * 1.0 * 0.5 * 1.4)));
  CHECK(s[1] == Approx(std::sqrt(2.0 * 1.0 * 0.5 * 0.6)));
  const auto [t1, tn] = m.temperatures();
  CHECK(t1 == Approx(0.28));
  CHECK(tn == Approx(0.12));
  const auto [eps, eta] = eps_eta_from_temperatures(t1, tn);
  CHECK(eps == Approx(0.2));
  CHECK(eta == Approx(0.4));
}

TEST_CASE("effective potential eliminates p and r", "[model]") {
  const auto m = testing::quadratic_model();
  Vec q(2);
  q << 0.7, -0.3;
  const Vec r = m.lambda2 * q;
  Vec x(6);
  x << 0, 0, q, r;
  CHECK(effective_potential(m, q) == Approx(eval_G(m, State(2, 1, x))));
  Mat A(2, 2);
  A << 1.5, -1.0, -1.0, 1.5;
  CHECK((effective_hessian(m, q) - A).norm() < 1e-12);
}

TEST_CASE("model validation rejects bad parameters", "[model][validation]") {
  const PotentialSpec quad{PotentialKind::quadratic, {0, 0, 0.5}};
  CHECK_THROWS_AS(ModelParams::make(1, 1, quad, quad, 1.0, 0.5, 0.1, 0.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, quad, 1.0, 0.5, 0.1, 1.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, quad, 1.0, 0.5, 0.1, -1.5), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, quad, 0.0, 0.5, 0.1, 0.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, quad, 1.0, -0.5, 0.1, 0.0), ModelError);
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, quad, 1.0, 0.5, -0.1, 0.0), ModelError);
  const PotentialSpec well{PotentialKind::quartic_double_well, {0, 0, -0.5, 0, 0.25}};
  CHECK_THROWS_AS(ModelParams::make(2, 1, quad, well, 1.0, 0.5, 0.1, 0.0), ModelError);
  const PotentialSpec odd{PotentialKind::polynomial_even, {0, 0.1, 0.5}};
  CHECK_THROWS_AS(ModelParams::make(2, 1, odd, quad, 1.0, 0.5, 0.1, 0.0), ModelError);
  const PotentialSpec tilted{PotentialKind::quartic_double_well, {0, 0.1, -0.5, 0, 0.25}};
  CHECK_NOTHROW(ModelParams::make(2, 1, tilted, quad, 1.0, 0.5, 0.1, 0.0));
  CHECK_THROWS_AS(ModelParams::make(2, 2, tilted, quad, 1.0, 0.5, 0.1, 0.0), ModelError);
  CHECK_THROWS_AS(testing::quadratic_model().with_temperature(0.1, 1.0), ModelError);
}

TEST_CASE("states of the wrong layout are rejected", "[model][validation]") {
  const auto m = testing::quadratic_model();
  CHECK_THROWS_AS(eval_G(m, State(3, 1)), DimensionError);
  CHECK_THROWS_AS(State(2, 1, Vec::Zero(5)), DimensionError);
}

TEST_CASE("time reversal flips momenta only", "[model]") {
  State x(2, 1);
  x.vec() << 1, 2, 3, 4, 5, 6;
  const State y = reverse_momenta(x);
  CHECK(y.vec()(0) == -1.0);
  CHECK(y.vec()(1) == -2.0);
  CHECK(y.vec().tail(4) == x.vec().tail(4));
  CHECK(reverse_momenta(y) == x);
}
