#include "catch_amalgamated.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "heatchain/rng.hpp"

using namespace heatchain;

TEST_CASE("philox4x32-10 reproduces the Random123 known-answer vectors", "[rng]") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("derived seeds differ across streams and indices", "[rng]") {
  std::set<std::uint64_t> seen;
  for (const char* name : {"sde", "measure", "action"}) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, name, i));
  }
  CHECK(seen.size() == 300);
  CHECK(derive_seed(42, "sde", 3) == derive_seed(42, "sde", 3));
  CHECK(derive_seed(42, "sde", 3) != derive_seed(43, "sde", 3));
}

TEST_CASE("normal stream is a pure function of (seed, replica, step)", "[rng]") {
  NormalStream a(9, 1);
  NormalStream b(9, 1);
  NormalStream c(9, 2);
  std::vector<double> x(5);
  std::vector<double> y(5);
  std::vector<double> z(5);
  a.normals(17, x);
  b.normals(16, y);
  b.normals(17, y);
  c.normals(17, z);
  CHECK(x == y);
  CHECK(x != z);
}

TEST_CASE("normal and uniform draws have the right moments", "[rng]") {
  NormalStream s(123, 0);
  const int N = 200000;
  std::vector<double> v(2);
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double u1 = 0.0;
  double umin = 1.0;
  double umax = 0.0;
  for (int k = 0; k < N / 2; ++k) {
    s.normals(k, v);
    for (double x : v) {
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
    s.uniforms(k, v);
    for (double x : v) {
      u1 += x;
      umin = std::min(umin, x);
      umax = std::max(umax, x);
    }
  }
  CHECK(std::abs(m1 / N) < 5.0 / std::sqrt(N));
  CHECK(std::abs(m2 / N - 1.0) < 5.0 * std::sqrt(2.0 / N));
  CHECK(std::abs(m4 / N - 3.0) < 5.0 * std::sqrt(96.0 / N));
  CHECK(std::abs(u1 / N - 0.5) < 5.0 / std::sqrt(12.0 * N));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
}
