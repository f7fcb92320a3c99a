#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>

#include "heatchain/measure.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Region q_box() {
  Vec lo = Vec::Constant(6, -kInf);
  Vec hi = Vec::Constant(6, kInf);
  lo[2] = 0.0;
  hi[2] = 1.0;
  lo[3] = -0.5;
  hi[3] = 0.5;
  return Region::box(lo, hi);
}

Region level_set_tail() {
  Mat A(2, 2);
  A << 1.5, -1.0, -1.0, 1.5;
  return Region::ellipsoid(Vec::Zero(6), A, {2, 3}).complement();
}

double gaussian_box(double eps) {
  const Mat C = eps * oracle::harmonic_chain_hessian(2, 1.0, 1.0, 0.5).inverse();
  Eigen::Matrix2d S = C.block(2, 2, 2, 2);
  return oracle::bivariate_box_probability(S, 0.0, 1.0, -0.5, 0.5);
}

}  // namespace

TEST_CASE("Gaussian box oracle is self-consistent", "[measure][oracle]") {
  // Independent marginals reduce to a product of erf differences.
  Eigen::Matrix2d S;
  S << 0.3, 0.0, 0.0, 0.5;
  const double p = (oracle::normal_cdf(1.0 / std::sqrt(0.3)) - 0.5) *
                   (oracle::normal_cdf(0.5 / std::sqrt(0.5)) - oracle::normal_cdf(-0.5 / std::sqrt(0.5)));
  CHECK(oracle::bivariate_box_probability(S, 0.0, 1.0, -0.5, 0.5) == Approx(p).epsilon(1e-10));
  // Frozen value for the harmonic chain at eps = 0.2.
  CHECK(gaussian_box(0.2) == Approx(0.341629449).epsilon(1e-8));
}

TEST_CASE("direct occupation matches the Gaussian box probability", "[measure][gibbs]") {
  const auto m = testing::quadratic_model(0.2);
  SamplingOptions o;
  o.T_burn = 20.0;
  o.T_sample = 1000.0;
  o.replicas = 8;
  o.seed = 41;
  const auto est = estimate_mu(m, State(2, 1), q_box(), o);
  CHECK(std::abs(est.mu_hat - gaussian_box(0.2)) < 3.0 * est.stderr);
  CHECK(est.samples == 8 * 100000);
}

TEST_CASE("direct estimates are identical serial and parallel", "[measure][parallel]") {
  const auto m = testing::quadratic_model(0.3);
  SamplingOptions o;
  o.T_burn = 5.0;
  o.T_sample = 50.0;
  o.replicas = 4;
  o.seed = 3;
  const auto a = estimate_mu(m, State(2, 1), {q_box(), level_set_tail()}, o, Exec::serial);
  const auto b = estimate_mu(m, State(2, 1), {q_box(), level_set_tail()}, o, Exec::parallel);
  for (int k = 0; k < 2; ++k) {
    CHECK(a[k].mu_hat == b[k].mu_hat);
    CHECK(a[k].per_replica == b[k].per_replica);
  }
}

TEST_CASE("cycle estimator agrees with the exact level-set tail", "[measure][cycle]") {
  // Outside {q^T A q <= 1} the q-marginal gives mu = exp(-1 / (2 eps)) exactly.
  const double eps = 0.3;
  const auto m = testing::quadratic_model(eps);
  const auto sets = testing::critical_sets(m);
  CycleOptions o;
  o.rho = 0.5;
  o.rho_prime = 1.0;
  o.cycles = 800;
  o.replicas = 8;
  o.seed = 17;
  const auto est = estimate_nu_cycle(m, sets, level_set_tail(), o);
  CHECK(est.cycles == 800);
  CHECK(std::abs(est.mu_hat - std::exp(-0.5 / eps)) < 3.0 * est.stderr);
}

TEST_CASE("scaling fit recovers the exponent of exact exponentials", "[measure][scaling]") {
  std::vector<ScalingInput> pts;
  for (double eps : {0.4, 0.3, 0.2, 0.15, 0.1}) pts.push_back({eps, 2.0 * std::exp(-0.5 / eps), 1e-12});
  const auto fit = fit_scaling(pts, 1, 200);
  CHECK(fit.extrapolated_limit == Approx(-0.5).epsilon(1e-9));
  CHECK(fit.slope == Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(fit.stderr < 1e-9);
}

TEST_CASE("affine scaling fit is biased by an eps^(1/2) prefactor", "[measure][scaling]") {
  // Half-space {q1 >= 1}: exact mu = P(Z >= 1 / sqrt(1.2 eps)), limit -1/2.4. The Mills-ratio
  // prefactor adds (1/2) eps log eps to eps log mu, which the affine fit cannot absorb.
  std::vector<ScalingInput> pts;
  for (double eps : {0.4, 0.3, 0.2, 0.15, 0.1}) pts.push_back({eps, oracle::normal_sf(1.0 / std::sqrt(1.2 * eps)), 1e-12});
  const auto fit = fit_scaling(pts, 1, 200);
  CHECK(fit.extrapolated_limit == Approx(-0.4945).margin(5e-4));
}

TEST_CASE("scaling fit drops empty grid points and needs three", "[measure][scaling]") {
  std::vector<ScalingInput> pts{{0.4, 0.1, 0.01}, {0.3, 0.05, 0.01}, {0.2, 0.0, 0.0}, {0.1, 0.01, 0.001}};
  const auto fit = fit_scaling(pts, 1, 100);
  CHECK(fit.excluded_eps == std::vector<double>{0.2});
  pts[0].mu_hat = 0.0;
  CHECK_THROWS(fit_scaling(pts, 1, 100));
  CHECK_THROWS(fit_scaling({{0.1, 0.1, 0.01}, {0.2, 0.1, 0.01}, {0.3, 0.1, 0.01}}, 1, 100));
}

TEST_CASE("Arrhenius fit recovers barrier and prefactor slopes", "[measure][kramers]") {
  std::vector<ArrheniusInput> a;
  std::vector<ArrheniusInput> b;
  for (double eps : {0.25, 0.2, 0.15}) {
    a.push_back({eps, 3.0 * std::exp(0.6 / eps), 1e-9});
    b.push_back({eps, eps * std::exp(0.6 / eps), 1e-9});
  }
  const auto fa = fit_arrhenius(a, 1, 100);
  CHECK(fa.slope == Approx(0.6).epsilon(1e-9));
  CHECK(fa.intercept == Approx(std::log(3.0)).epsilon(1e-9));
  const auto fb = fit_arrhenius(b, 1, 100);
  CHECK(fb.prefactor_slope == Approx(0.6).epsilon(1e-9));
  CHECK(fb.slope < 0.6);
}

TEST_CASE("hitting summary counts timeouts separately", "[measure]") {
  std::vector<HittingRecord> r{{0, 1, 2.0}, {1, 1, 4.0}, {2, 1, std::nullopt}};
  const auto s = summarize_hitting(r);
  CHECK(s.mean == 3.0);
  CHECK(s.hits == 2);
  CHECK(s.timeouts == 1);
  CHECK(s.stderr == Approx(1.0));
}

TEST_CASE("entropy production is positive out of equilibrium", "[measure][entropy]") {
  const auto m = testing::quadratic_model(0.2, 0.4);
  SamplingOptions o;
  o.T_burn = 20.0;
  o.T_sample = 500.0;
  o.replicas = 8;
  o.seed = 8;
  const auto s = mean_entropy_production(m, State(2, 1), o);
  CHECK(s.sigma_hat > 3.0 * s.stderr);
}
