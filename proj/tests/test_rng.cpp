#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace exitctl;

TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open unit interval endpoints") {
  CHECK(bits_to_open_unit(0) > 0.0);
  CHECK(bits_to_open_unit((std::uint64_t{1} << 53) - 1) < 1.0);
}

TEST_CASE("inverse normal cdf round trip") {
  for (double p : {1e-300, 1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1 - 1e-6, 1 - 1e-12}) {
    const double z = inverse_normal_cdf(p);
    const double back = 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(std::abs(back - p) <= 1e-12 * p);
  }
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.2) == doctest::Approx(-inverse_normal_cdf(0.8)).epsilon(1e-14));
}

TEST_CASE("noise stream is a pure function of seed and step") {
  NoiseStream a(42), b(42), c(43);
  std::vector<double> x(5), y(5), z(5);
  a.uniforms(7, x);
  b.uniforms(7, y);
  c.uniforms(7, z);
  CHECK(x == y);
  CHECK(x != z);
  a.uniforms(8, y);
  CHECK(x != y);
  for (double v : x) CHECK((v > 0.0 && v < 1.0));
  // A prefix of a longer request matches a shorter request.
  std::vector<double> shorter(3);
  a.uniforms(7, shorter);
  for (int i = 0; i < 3; ++i) CHECK(shorter[i] == x[i]);
}

TEST_CASE("normal draws have unit moments") {
  NoiseStream s(2024);
  const int n = 200000;
  double m = 0, m2 = 0, m4 = 0;
  std::vector<double> z(2);
  for (int k = 0; k < n / 2; ++k) {
    s.normals(k, z);
    for (double v : z) m += v, m2 += v * v, m4 += v * v * v * v;
  }
  m /= n, m2 /= n, m4 /= n;
  CHECK(std::abs(m) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("mix_seed spreads nearby seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix_seed(i));
  CHECK(seen.size() == 1000);
  CHECK(mix_seed(1) != 1);
}
