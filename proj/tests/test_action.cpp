#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "heatchain/action.hpp"
#include "heatchain/dynamics.hpp"
#include "heatchain/rng.hpp"
#include "support.hpp"

using namespace heatchain;
using Catch::Approx;

namespace {

State start_state() {
  State x(2, 1);
  x.vec() << 0.3, -0.2, 0.5, -0.4, 0.1, 0.2;
  return x;
}

// Reversal residuals for one control on 100, 200 and 400 segments.
std::vector<double> residuals(const ModelParams& m, std::uint64_t seed, double factor) {
  const auto c = random_smooth_control(m, 2.0, seed);
  std::vector<double> out;
  for (const auto& r : reversal_refinement(m, start_state(), c, {100, 200, 400}, factor)) out.push_back(r.residual);
  return out;
}

}  // namespace

TEST_CASE("control energy is the trapezoid of |u|^2 / 2", "[action]") {
  Mat u(3, 2);
  u << 1, 0, 0, 2, 1, 1;
  // (h/2) * (1/2) * (1 + 2 * 4 + 2) with h = 0.5
  CHECK(control_energy(u, 0.5) == Approx(0.25 * 0.5 * 11.0));
}

TEST_CASE("zero control follows the zero-temperature flow", "[action]") {
  const auto m = testing::double_well_model();
  const State x = start_state();
  const auto cp = integrate_controlled(m, x, Mat::Zero(201, 2), 2.0);
  const auto flow = integrate_zero_T(m, x, 2.0, 0.01);
  CHECK((cp.states.row(200).transpose() - flow.states.back().vec()).norm() < 1e-12);
  CHECK(cp.action == 0.0);
  CHECK(eval_action_path(m, to_path_record(cp)) == Approx(0.0).margin(1e-6));
}

TEST_CASE("path action converges to the control energy", "[action]") {
  const auto m = testing::double_well_model();
  const auto c = random_smooth_control(m, 2.0, 31);
  double prev = 0.0;
  for (int N : {200, 400, 800}) {
    const auto cp = integrate_controlled(m, start_state(), sample_control(c, N), 2.0);
    const double err = std::abs(eval_action_path(m, to_path_record(cp)) - cp.action);
    if (N > 200) CHECK(err < 0.5 * prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("path controls recover the driving control", "[action]") {
  const auto m = testing::quadratic_model();
  const auto c = random_smooth_control(m, 2.0, 4);
  const Mat u = sample_control(c, 800);
  const auto cp = integrate_controlled(m, start_state(), u, 2.0);
  const Mat back = path_controls(m, to_path_record(cp));
  CHECK((back - u).middleRows(1, 799).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("paths violating the Hamiltonian constraints have infinite action", "[action]") {
  const auto m = testing::quadratic_model();
  auto path = to_path_record(integrate_controlled(m, start_state(), Mat::Zero(101, 2), 1.0));
  CHECK(std::isfinite(eval_action_path(m, path)));
  CHECK(constraint_residual(m, path) < 1e-3);
  for (Eigen::Index k = 0; k < path.states.rows(); ++k) path.states(k, 2) += 0.5 * path.times[k];
  CHECK(eval_action_path(m, path) == kInfiniteAction);
  CHECK(constraint_residual(m, path) > 0.1);
}

TEST_CASE("time reversal is an involution", "[action]") {
  const auto m = testing::quadratic_model();
  const auto path = to_path_record(integrate_controlled(m, start_state(), sample_control(random_smooth_control(m, 1.0, 2), 50), 1.0));
  const auto back = time_reverse(time_reverse(path));
  CHECK((back.states - path.states).norm() < 1e-14);
  CHECK((back.times - path.times).norm() < 1e-14);
  const auto rev = time_reverse(path);
  CHECK(rev.states(0, 2) == path.states(50, 2));
  CHECK(rev.states(0, 0) == -path.states(50, 0));
}

TEST_CASE("entropy flows are the boundary energy currents", "[action][entropy]") {
  const auto m = testing::quadratic_model(0.2, 0.4);
  const State x = start_state();
  const auto f = entropy_flows(m, x);
  CHECK(f.f1 == Approx(0.3 * (0.1 - 0.5 * 0.5)));
  CHECK(f.fn == Approx(-0.2 * (0.2 - 0.5 * -0.4)));
  CHECK(f.theta == Approx(-f.f1 / 1.4 - f.fn / 0.6));
}

TEST_CASE("reversal residual closes at second order at eta = 0", "[action][reversal]") {
  const auto m = testing::double_well_model();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = residuals(m, derive_seed(1, "test", s), kBoundaryRFactor);
    CHECK(r[2] < 1e-3);
    CHECK(r[0] / r[2] > 3.0);
  }
}

TEST_CASE("reversal R factor selection: only 1/2 closes the identity", "[action][reversal]") {
  const auto m = testing::quadratic_model(0.0, 0.4);
  double rms_half = 0.0;
  double rms_one = 0.0;
  double rms_quarter = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto half = residuals(m, derive_seed(2, "test", s), 0.5);
    const auto one = residuals(m, derive_seed(2, "test", s), 1.0);
    const auto quarter = residuals(m, derive_seed(2, "test", s), 0.25);
    rms_half += half[2] * half[2];
    rms_one += one[2] * one[2];
    rms_quarter += quarter[2] * quarter[2];
    // Wrong factors leave a residual that does not shrink under refinement.
    CHECK(one[2] > 0.5 * one[0]);
    CHECK(quarter[2] > 0.5 * quarter[0]);
  }
  CHECK(std::sqrt(rms_half / 5) < 1e-3);
  CHECK(std::sqrt(rms_one / 5) > 1e-2);
  CHECK(std::sqrt(rms_quarter / 5) > 1e-2);
}

TEST_CASE("at eta = 0 the entropy branch reduces to the G branch", "[action][reversal]") {
  const auto m0 = testing::double_well_model(0.0, 0.0);
  const auto c = random_smooth_control(m0, 2.0, 17);
  const auto cp = integrate_controlled(m0, start_state(), sample_control(c, 800), 2.0);
  const auto path = to_path_record(cp);
  const State x0 = state_at(m0, path, 0);
  const State xT = state_at(m0, path, path.times.size() - 1);
  double theta = 0.0;
  for (Eigen::Index k = 0; k + 1 < path.times.size(); ++k) {
    const double a = entropy_flows(m0, state_at(m0, path, k)).theta;
    const double b = entropy_flows(m0, state_at(m0, path, k + 1)).theta;
    theta += 0.5 * (a + b) * (path.times[k + 1] - path.times[k]);
  }
  const double r_branch = boundary_R(m0, xT) - boundary_R(m0, x0) - theta;
  CHECK(r_branch == Approx(eval_G(m0, xT) - eval_G(m0, x0)).margin(1e-4));
}
