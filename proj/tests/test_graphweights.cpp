#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "heatchain/graphweights.hpp"
#include "oracles/oracles.hpp"

using namespace heatchain;
using Catch::Approx;

namespace {

QuasipotentialTable table_from(const Mat& V) {
  QuasipotentialTable t;
  t.L = static_cast<int>(V.rows());
  t.V = V;
  return t;
}

}  // namespace

TEST_CASE("i-graph counts match brute-force filtered assignments", "[graph]") {
  // Rooted spanning in-trees of the complete digraph: L^(L-2) per root.
  const int expected[] = {0, 1, 1, 3, 16, 125};
  for (int L = 1; L <= 5; ++L) {
    for (int root = 0; root < L; ++root) {
      const auto graphs = enumerate_igraphs(L, root);
      const auto brute = oracle::brute_force_igraphs(L, root);
      CHECK(graphs.size() == brute.size());
      CHECK(static_cast<int>(graphs.size()) == expected[L]);
      for (const auto& g : graphs) {
        CHECK(g.valid());
        CHECK(std::find(brute.begin(), brute.end(), g.target) != brute.end());
      }
    }
  }
  CHECK_THROWS_AS(enumerate_igraphs(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_igraphs(kMaxGraphLabels + 1, 0), std::invalid_argument);
}

TEST_CASE("graph validity rejects cycles and a root with an arrow", "[graph]") {
  CHECK(IGraph{0, {-1, 0, 1}}.valid());
  CHECK_FALSE(IGraph{0, {-1, 2, 1}}.valid());
  CHECK_FALSE(IGraph{0, {1, 0, 0}}.valid());
  CHECK_FALSE(IGraph{0, {-1, 1, 0}}.valid());
}

TEST_CASE("weight of set equals the brute-force minimum on random tables", "[graph]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<int> size(2, 5);
  for (int k = 0; k < 100; ++k) {
    const int L = size(rng);
    Mat V = Mat::Zero(L, L);
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        if (i != j) V(i, j) = u(rng);
      }
    }
    const auto t = table_from(V);
    for (int i = 0; i < L; ++i) CHECK(weight_of_set(t, i) == Approx(oracle::brute_force_weight(V, i)).epsilon(1e-14));
  }
}

TEST_CASE("missing entries are avoided and all-missing gives infinity", "[graph]") {
  const double inf = std::numeric_limits<double>::infinity();
  Mat V(3, 3);
  V << 0, inf, 1, 2, 0, inf, inf, 3, 0;
  const auto t = table_from(V);
  CHECK(weight_of_set(t, 0) == 5.0);
  Mat W(2, 2);
  W << 0, inf, inf, 0;
  CHECK(std::isinf(weight_of_set(table_from(W), 0)));
}

TEST_CASE("W(x) takes the cheapest set and subtracts min W", "[graph]") {
  Mat V(2, 2);
  V << 0, 1.0, 0.4, 0;
  auto t = table_from(V);
  compute_weights(t);
  CHECK(t.W[0] == 0.4);
  CHECK(t.W[1] == 1.0);
  Vec to_x(2);
  to_x << 0.5, 0.2;
  CHECK(W_of_x(t, to_x) == Approx(0.5));
}

TEST_CASE("sandwich bounds flag samples outside the cone", "[graph]") {
  std::vector<BoundSample> s{{1.0, 1.0}, {1.0, 0.9}, {1.0, 1.4}, {0.0, 0.0}};
  const auto rep = verify_bounds(0.2, s, 0.05);
  CHECK(rep.checked == 4);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].index == 2);
  CHECK(rep.lower[0] == Approx(1.0 / 1.2));
  CHECK(rep.upper[0] == Approx(1.0 / 0.8));
}

TEST_CASE("detailed balance residual of a consistent table is zero", "[graph]") {
  Mat V(2, 2);
  V << 0, 0.8, 0.5, 0;
  auto t = table_from(V);
  const auto good = detailed_balance_check(t, {-0.5, -0.2});
  CHECK(good.max_residual == Approx(0.0).margin(1e-14));
  CHECK(good.max_cost == 0.8);
  const auto bad = detailed_balance_check(t, {-0.2, -0.2});
  CHECK(bad.relative() == Approx(0.3 / 0.8));
}
