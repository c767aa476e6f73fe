#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gaplabel/errors.hpp"
#include "gaplabel/solenoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace gaplabel;

namespace {

/// 2-adic integer with all W digits equal to 1, i.e. -1 mod 2^W.
auto minus_one(std::size_t w) -> Dyadic { return Dyadic::from_digits(std::vector<std::uint8_t>(w, 1)); }

auto coordinate(const SolPointS2 &p, std::size_t n) -> double { return p.coords.at(n).to_double(); }

} // namespace

TEST_CASE("Dyadic arithmetic is exact mod 2^W") {
  const auto a = Dyadic::from_int(5, 8);
  const auto b = Dyadic::from_int(-3, 8);
  CHECK(a + b == Dyadic::from_int(2, 8));
  CHECK(-a == Dyadic::from_int(-5, 8));
  CHECK(a - a == Dyadic::from_int(0, 8));
  CHECK(Dyadic::from_int(200, 8) + Dyadic::from_int(100, 8) == Dyadic::from_int(44, 8));
  CHECK(minus_one(8) == Dyadic::from_int(-1, 8));
  CHECK(Dyadic::from_int(3, 8).doubled() == Dyadic::from_int(6, 8));
  CHECK(Dyadic::from_int(6, 8).halved() == Dyadic::from_int(3, 7));
  CHECK_THROWS_AS((void)Dyadic::from_int(3, 8).halved(), std::domain_error);
  CHECK_THROWS_AS((void)Dyadic::from_int(3, 8).truncated(9), InsufficientHistory);
  CHECK(Dyadic::from_int(13, 8).truncated(2) == Dyadic::from_int(1, 2));
}

TEST_CASE("BinaryFraction round trips and shifts exactly") {
  for (double x : {0.0, 0.5, 0.75, 0.1, 1.0 / 3, 0.999}) {
    const auto f = BinaryFraction::from_double(x);
    CHECK(f.to_double() == x);
  }
  const auto f = BinaryFraction::from_double(0.75);
  CHECK(f.doubled().to_double() == 0.5);
  CHECK(f.halved(1).to_double() == 0.875);
  CHECK(f.halved(0).to_double() == 0.375);
  CHECK(f.scaled_integer_part(2) == Dyadic::from_int(3, 2));
  CHECK(f.scaled_fraction(1).to_double() == 0.5);
}

TEST_CASE("S1 doubling carries into the 2-adic part") {
  const auto p = SolPointS1::canonical(0.75, Dyadic::from_int(0, 64));
  const auto q = double_point(p);
  CHECK(q.r.to_double() == 0.5);
  CHECK(q.z == Dyadic::from_int(1, 64));
  // and T1^{-1} returns to the start
  const auto back = halve_point(q);
  CHECK(back.r == p.r);
  CHECK(back.z == p.z.truncated(63));
  CHECK(SolPointS1::canonical(2.25, Dyadic::from_int(-2, 64)) ==
        SolPointS1::canonical(0.25, Dyadic::from_int(0, 64)));
}

TEST_CASE("S2 zero point is fixed") {
  const auto zero = conj_g(0.0, Dyadic::from_int(0, 16));
  CHECK(double_point(zero) == zero);
  for (const auto &c : zero.coords) CHECK(c.to_double() == 0.0);
}

TEST_CASE("S3 doubling advances the backward angles") {
  const auto s = sample_solenoid(5);
  const auto t = double_point(s.s3);
  CHECK(t.backward_angles.size() == s.s3.backward_angles.size());
  CHECK(t.backward_angles[0] == s.s3.backward_angles[0].doubled());
  CHECK(t.backward_angles[1] == s.s3.backward_angles[0]);
  const double w0 = s.s3.backward_angles[0].to_double();
  CHECK(t.x == doctest::Approx(0.25 * s.s3.x + 0.5 * std::cos(2 * std::numbers::pi * w0)));
  CHECK(t.y == doctest::Approx(0.25 * s.s3.y + 0.5 * std::sin(2 * std::numbers::pi * w0)));
  CHECK(t.is_compatible());
}

TEST_CASE("conj_g examples") {
  SUBCASE("origin") {
    const auto p = conj_g(0.0, Dyadic::from_int(0, 10));
    for (const auto &c : p.coords) CHECK(c.to_double() == 0.0);
  }
  SUBCASE("r = 1/4, z = 1") {
    const auto p = conj_g(0.25, Dyadic::from_int(1, 10));
    CHECK(coordinate(p, 0) == 0.25);
    for (std::size_t n = 1; n <= 10; ++n) {
      CHECK(p.coords[n].modulus_exponent() == n);
      CHECK(coordinate(p, n) == 1.25);
    }
  }
  SUBCASE("kernel: (1, -1) maps to the origin") {
    const auto p = conj_g(1.0, minus_one(12));
    for (const auto &c : p.coords) CHECK(c.to_double() == 0.0);
  }
  SUBCASE("well defined on classes") {
    std::mt19937_64 rng(9);
    const auto z = Dyadic::random(rng, 32);
    const auto ref = conj_g(0.375, z);
    for (int a = -3; a <= 3; ++a) CHECK(conj_g(0.375 + a, z.plus_int(-a)) == ref);
  }
}

TEST_CASE("conj_h examples") {
  SUBCASE("all angles zero") {
    const auto s3 = SolPointS3::from_backward_angles(
        std::vector<BinaryFraction>(5, BinaryFraction::from_double(0.0)), 0.25);
    for (const auto &c : conj_h(s3).coords) CHECK(c.to_double() == 0.0);
  }
  SUBCASE("w0 = 1/2, w-1 = 1/4") {
    const auto s3 = SolPointS3::from_backward_angles(
        {BinaryFraction::from_double(0.5), BinaryFraction::from_double(0.25)}, 0.25);
    const auto h = conj_h(s3);
    CHECK(coordinate(h, 0) == 0.5);
    CHECK(h.coords[1].modulus_exponent() == 1);
    CHECK(coordinate(h, 1) == 0.5);
  }
  SUBCASE("insufficient history") {
    const auto s = sample_solenoid(1, 64, 10);
    CHECK_THROWS_AS(conj_h(s.s3, 12), InsufficientHistory);
    CHECK_NOTHROW(conj_h(s.s3, 11));
  }
  SUBCASE("one step of the conjugacy") {
    const auto s = sample_solenoid(2);
    CHECK(max_coordinate_distance(conj_h(double_point(s.s3)), double_point(conj_h(s.s3))) <= 1e-9);
  }
}

TEST_CASE("S3 fiber coordinates obey the truncation bound") {
  const auto s = sample_solenoid(4, 64, 40, 0.25);
  CHECK(s.s3.truncation_bound() < 1e-20);
  const auto longer = SolPointS3::from_backward_angles(backward_angles(s.s1, 60), 0.25);
  CHECK(std::abs(longer.x - s.s3.x) <= s.s3.truncation_bound());
  CHECK(std::abs(longer.y - s.s3.y) <= s.s3.truncation_bound());
  CHECK_THROWS_AS(SolPointS3::from_backward_angles({BinaryFraction{}}, 0.5), std::invalid_argument);
}

TEST_CASE("sampling") {
  const auto a = sample_solenoid(11);
  const auto b = sample_solenoid(11);
  CHECK(a.s1 == b.s1);
  CHECK(a.s2 == b.s2);
  CHECK(a.s2 == conj_g(a.s1));
  CHECK(a.s2.is_compatible());
  CHECK(a.s3.is_compatible());
  CHECK(a.s3.history() == 40);

  std::vector<double> r;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) r.push_back(sample_solenoid(seed, 64, 0).s1.r.to_double());
  std::sort(r.begin(), r.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    ks = std::max({ks, (i + 1) / 1e4 - r[i], r[i] - i / 1e4});
  CHECK(ks <= 0.02);
}

TEST_CASE("compatibility is preserved by T2 and both conjugacies") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_solenoid(seed);
    CHECK(double_point(s.s2).is_compatible());
    CHECK(conj_h(s.s3).is_compatible());
    CHECK(conj_g(double_point(s.s1)).is_compatible());
  }
}

TEST_CASE("iterated conjugacy identities") {
  const auto r = check_conjugacies(100, 20, 100);
  CHECK(r.g_passed());
  CHECK(r.h_passed());
}

TEST_CASE("dyadic characters: only zero is fixed by doubling") {
  CHECK(!(DyadicRational{3, 2}.doubled() == DyadicRational{3, 2}));
  CHECK(DyadicRational{3, 2}.doubled() == DyadicRational{3, 1});
  CHECK(DyadicRational{0, 4}.doubled() == DyadicRational{0, 0});
}

TEST_CASE("character values on S1") {
  // a = 1: chi(r, z) = r
  const auto p = SolPointS1::canonical(0.375, Dyadic::from_int(0, 8));
  CHECK(character_value(p, DyadicRational{1, 0}) == 0.375);
  // a = 1/2 needs z_0: (r + z_0) / 2
  const auto q = SolPointS1::canonical(0.5, Dyadic::from_int(1, 8));
  CHECK(character_value(q, DyadicRational{1, 1}) == 0.75);
  // invariance under the doubling map: chi_{2a}(w) = chi_a(T w)
  const auto s = sample_solenoid(6).s1;
  CHECK(character_value(double_point(s), DyadicRational{3, 4}) ==
        doctest::Approx(character_value(s, DyadicRational{3, 3})));
}
