#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "heatchain/mam.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

namespace {

State target_state(const ModelParams& m, double q1, double q2) {
  State y(2, 1);
  y.vec() << 0, 0, q1, q2, m.lambda2 * q1, m.lambda2 * q2;
  return y;
}

}  // namespace

TEST_CASE("adjoint gradient of the shooting objective matches finite differences", "[mam][gradient]") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int k = 0; k < 10; ++k) {
    const auto m = k % 2 ? testing::double_well_model(0.0, 0.3) : testing::quadratic_model(0.0, 0.2);
    State x(2, 1);
    State y(2, 1);
    for (int i = 0; i < 6; ++i) {
      x.vec()[i] = g(rng);
      y.vec()[i] = g(rng);
    }
    const int N = 16;
    ActionObjective obj(m, x, y, 1.5, N, 10.0);
    Vec u(obj.num_parameters());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = g(rng);
    Vec grad;
    obj.evaluate(u, &grad);
    const Vec fd = oracle::fd_gradient([&](const Vec& v) { return obj.evaluate(v, nullptr); }, u);
    INFO("instance " << k);
    CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("resampling aligns controls at the end time", "[mam]") {
  Mat u(5, 1);
  u << 1, 2, 3, 4, 5;
  const Mat v = resample_control(u, 4.0, 8.0, 8);
  CHECK(v(8, 0) == Approx(5.0));
  CHECK(v(4, 0) == Approx(1.0));
  CHECK(v(6, 0) == Approx(3.0));
  CHECK(v(0, 0) == 0.0);
}

TEST_CASE("initial guesses have one control row per node", "[mam]") {
  const auto m = testing::double_well_model();
  const auto sets = testing::critical_sets(m);
  for (auto init : {MamInit::zero_control, MamInit::linear_r_interpolation, MamInit::reversed_flow,
                    MamInit::forward_flow}) {
    const auto g = initial_guess(m, MamProblem{sets[0].point, sets[2].point, 8.0, 40, init});
    CHECK(g.control.rows() == 41);
    CHECK(g.control.cols() == 2);
    CHECK(parse_mam_init(to_string(init)) == init);
  }
  CHECK_THROWS(parse_mam_init("sideways"));
}

TEST_CASE("quasipotential of the harmonic chain equals G at eta = 0", "[mam][equilibrium]") {
  const auto m = testing::quadratic_model();
  const auto sets = testing::critical_sets(m);
  PairOptions o;
  o.T_grid = {2, 4, 8, 16, 32};
  o.check_warm_start = false;
  for (const auto& [q1, q2] : std::vector<std::pair<double, double>>{{1.0, 0.0}, {0.5, -0.5}}) {
    const State y = target_state(m, q1, q2);
    const auto res = quasipotential_pair(m, sets[0].point, y, o);
    INFO("target q = (" << q1 << ", " << q2 << ")");
    REQUIRE(res.converged);
    CHECK(res.value == Approx(eval_G(m, y)).epsilon(0.03));
  }
}

TEST_CASE("transcription and shooting agree on a fixed horizon", "[mam][transcription]") {
  const auto m = testing::quadratic_model();
  const auto sets = testing::critical_sets(m);
  const MamProblem prob{sets[0].point, target_state(m, 0.8, 0.2), 8.0, 80, MamInit::linear_r_interpolation};
  MamOptions shoot;
  MamOptions trans;
  trans.method = MamMethod::transcription;
  const auto a = minimize_action_T(m, prob, shoot);
  const auto b = minimize_action_T(m, prob, trans);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(a.value == Approx(b.value).epsilon(1e-3));
  CHECK(a.endpoint_gap < 1e-4);
  CHECK(b.endpoint_gap < 1e-4);
}

TEST_CASE("triangle closure routes through intermediate sets", "[mam]") {
  QuasipotentialTable t;
  t.L = 3;
  t.V = Mat::Zero(3, 3);
  t.V << 0, 5, 1, 4, 0, 2, 1, 1, 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) t.pair_entries.push_back({i, j, t.V(i, j), 1.0, true, 0.0, -1});
    }
  }
  t.V_to_target = Mat(3, 1);
  t.V_to_target << 3, 0.5, 2;
  t.target_entries = {{0, 0, 3, 1, true, 0, -1}, {1, 0, 0.5, 1, true, 0, -1}, {2, 0, 2, 1, true, 0, -1}};
  close_under_concatenation(t);
  CHECK(t.V(0, 1) == 2.0);
  CHECK(t.V(1, 0) == 3.0);
  CHECK(t.V_to_target(0, 0) == 2.5);
  CHECK(t.V_to_target(2, 0) == 1.5);
  CHECK(t.pair_entries[0].via == 2);
}

TEST_CASE("pairwise costs are identical serial, parallel and resumed", "[mam][parallel]") {
  const auto m = testing::quadratic_model(0.0, 0.4);
  const auto sets = testing::critical_sets(m);
  const std::vector<State> targets{target_state(m, 0.5, 0.0), target_state(m, 0.0, -0.5)};
  PairOptions o;
  o.T_grid = {2, 4, 8};
  o.check_warm_start = false;
  const auto a = pairwise_costs(m, sets, targets, o, Exec::serial);
  const auto b = pairwise_costs(m, sets, targets, o, Exec::parallel);
  CHECK(a.V_to_target == b.V_to_target);
  CostCache cache;
  const auto c = pairwise_costs(m, sets, targets, o, Exec::serial, cache);
  REQUIRE(cache.targets.size() == 2);
  REQUIRE(cache.find(0, 1, true) != nullptr);
  const auto d = pairwise_costs(m, sets, targets, o, Exec::serial, cache);
  CHECK(c.V_to_target == a.V_to_target);
  CHECK(d.V_to_target == a.V_to_target);
}
