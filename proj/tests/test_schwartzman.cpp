#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gaplabel/errors.hpp"
#include "gaplabel/schwartzman.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace gaplabel;

namespace {

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

auto rotation(TranslationCoordinate b) -> TorusAffineSystem { return {IntMatrix{{1}}, {b}}; }

auto cat_map() -> TorusAffineSystem {
  return {IntMatrix{{2, 1}, {1, 1}},
          {TranslationCoordinate::real(0.3), TranslationCoordinate::real(0.7)}};
}

} // namespace

TEST_CASE("fixed character lattice") {
  const TorusAffineSystem identity2(IntMatrix::identity(2), {TranslationCoordinate::real(0.1),
                                                             TranslationCoordinate::real(0.2)});
  CHECK(fixed_character_lattice(identity2).as_rows() == IntMatrix::identity(2));
  CHECK(fixed_character_lattice(cat_map()).empty());
  const TorusAffineSystem shear(IntMatrix{{1, 0}, {1, 1}}, {TranslationCoordinate::real(0.1),
                                                            TranslationCoordinate::real(0.2)});
  CHECK(fixed_character_lattice(shear).rank() == 1);
}

TEST_CASE("label group examples") {
  SUBCASE("golden rotation") {
    const auto g = label_group(rotation(TranslationCoordinate::real(golden)));
    CHECK(!g.is_discrete());
    CHECK(g.denominator() == 1);
    REQUIRE(g.irrational_generators().size() == 1);
    CHECK(g.irrational_generators()[0] == doctest::Approx(golden));
    CHECK(g.generators() == std::vector<double>{1.0, g.irrational_generators()[0]});
  }
  SUBCASE("cat map") {
    const auto g = label_group(cat_map());
    CHECK(g.rational_collapse() == 1);
    CHECK(g.to_string() == "ℤ");
    CHECK(g.provenance().size() == 1);
  }
  SUBCASE("rational rotation") {
    const auto g = label_group(rotation(TranslationCoordinate::exact(1, 3)));
    CHECK(g.rational_collapse() == 3);
    CHECK(g.to_string() == "(1/3)ℤ");
  }
  SUBCASE("frequency module of a 2-torus translation") {
    const TorusAffineSystem t(IntMatrix::identity(2),
                              {TranslationCoordinate::exact(1, 4), TranslationCoordinate::exact(1, 6)});
    CHECK(label_group(t).rational_collapse() == oracle::subgroup_order({{1, 4}, {1, 6}}));
  }
}

TEST_CASE("finite label groups") {
  CHECK(finite_label_group(FiniteCyclicSystem(3, 2, 0, {1, 2})).to_string() == "(1/2)ℤ");
  CHECK(finite_label_group(FiniteCyclicSystem(3, 2, 0, {0})).to_string() == "ℤ");
  CHECK(finite_label_group(FiniteCyclicSystem(5, 2, 0, {1, 2, 3, 4})).to_string() == "(1/4)ℤ");

  CHECK(finite_rhs_group(3, 2, 0).to_string() == "ℤ");
  CHECK(finite_rhs_group(5, 1, 1).to_string() == "(1/5)ℤ");
  // {m : 3m = m mod 4} = {0, 2}; with b = 0 every value m b / 4 vanishes
  CHECK(finite_rhs_group(4, 3, 0).to_string() == "ℤ");
  const auto g = finite_rhs_group(4, 3, 1);
  CHECK(g.to_string() == "(1/2)ℤ");
  REQUIRE(g.provenance().size() == 2);
  CHECK(g.provenance()[1].character == "m=2 (mod 4)");
  CHECK_THROWS_AS(finite_rhs_group(4, 2, 0), std::invalid_argument);
}

TEST_CASE("solenoid fixed dual") {
  CHECK(solenoid_fixed_dual().empty());
  CHECK(fixed_dyadic_characters(64, 6).empty());
  CHECK(solenoid_label_group().to_string() == "ℤ");
  CHECK(label_group(DynamicalSystem{CircleDoublingSystem{}}).to_string() == "ℤ");
}

TEST_CASE("label group JSON") {
  const auto j = finite_rhs_group(4, 3, 1).to_json();
  CHECK(j["rational_collapse"] == 2);
  CHECK(j["generators"] == nlohmann::json::array({0.5}));
  CHECK(j["provenance"][1]["exact"] == "1/2");
  const auto k = label_group(rotation(TranslationCoordinate::real(golden))).to_json();
  CHECK(k["rational_collapse"].is_null());
}

TEST_CASE("contains examples") {
  CHECK(contains(LabelGroup::integers(), 0.5, 1e-3, 10).kind == Membership::NonMember);
  const auto half = contains(LabelGroup::rational(2, "test"), 0.5, 1e-3, 10);
  CHECK(half.kind == Membership::Member);
  CHECK(half.witness == std::vector<std::int64_t>{1});

  const auto g = label_group(rotation(TranslationCoordinate::real(golden)));
  const auto v = contains(g, 0.381966, 1e-5, 10);
  CHECK(v.kind == Membership::Member);
  CHECK(v.witness == std::vector<std::int64_t>{1, -1});
  CHECK(contains(g, 0.1234567, 1e-9, 3).kind == Membership::Inconclusive);
  CHECK_THROWS_AS(contains(g, 0.1, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(contains(g, 0.1, 1e-3, 0), std::invalid_argument);
}

TEST_CASE("contains: witnesses recombine and verdicts are monotone in tol") {
  const auto g = label_group(rotation(TranslationCoordinate::real(golden)));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = uniform_unit(rng()) * 3.0 - 1.0;
    bool was_member = false;
    for (double tol : {1e-6, 1e-4, 1e-2, 1e-1}) {
      const auto v = contains(g, x, tol, 5);
      if (was_member) CHECK(v.kind == Membership::Member);
      if (v.kind == Membership::Member) {
        was_member = true;
        const double rebuilt = static_cast<double>(v.witness[0]) +
                               static_cast<double>(v.witness[1]) * g.irrational_generators()[0];
        CHECK(std::abs(rebuilt - x) < tol);
      }
    }
  }
}

TEST_CASE("label group does not depend on the kernel basis") {
  // A = I on T^2 with exact b: replace the standard basis by another unimodular one
  const std::vector<TranslationCoordinate> b{TranslationCoordinate::exact(1, 6),
                                             TranslationCoordinate::exact(1, 10)};
  const TorusAffineSystem t(IntMatrix::identity(2), b);
  const auto ref = label_group(t);
  LabelGroup other = LabelGroup::integers();
  const DynamicalSystem sys = t;
  for (const IntVector m : {IntVector{2, 1}, IntVector{1, 1}}) {
    const auto v = value_at_translation(TorusCharacter{m}, sys);
    other.add_generator({"alt", v.value, v.exact});
  }
  CHECK(other.denominator() == ref.denominator());
  for (double g : other.generators()) CHECK(contains(ref, g, 1e-12, 1).kind == Membership::Member);
  for (double g : ref.generators()) CHECK(contains(other, g, 1e-12, 1).kind == Membership::Member);
}

TEST_CASE("characters") {
  const DynamicalSystem cat = cat_map();
  const CharacterVector chi = TorusCharacter{{1, -1}};
  CHECK(evaluate(chi, cat, TorusPoint{{0.75, 0.5}}) == 0.25);
  CHECK(!is_fixed(chi, cat));
  CHECK(is_fixed(TorusCharacter{{0, 0}}, cat));
  CHECK_THROWS_AS(evaluate(ResidueCharacter{1}, cat, TorusPoint{{0.1, 0.2}}), InvalidObservable);
  CHECK_THROWS_AS(evaluate(TorusCharacter{{1}}, cat, TorusPoint{{0.1, 0.2}}), InvalidObservable);

  const DynamicalSystem fin = FiniteCyclicSystem(5, 1, 2, {0, 2, 4, 1, 3});
  CHECK(evaluate(ResidueCharacter{2}, fin, Residue{3}) == doctest::Approx(0.2));
  CHECK(is_fixed(ResidueCharacter{3}, fin));
  CHECK(value_at_translation(ResidueCharacter{3}, fin).exact == Rational{1, 5});

  const DynamicalSystem sol = SolenoidDoublingSystem{};
  CHECK(!is_fixed(DyadicRational{1, 2}, sol));
  CHECK(is_fixed(DyadicRational{0, 0}, sol));
}

TEST_CASE("suspension observable validation") {
  const DynamicalSystem rot = rotation(TranslationCoordinate::real(golden));
  CHECK_NOTHROW(SuspensionObservable(rot, TorusCharacter{{1}}, golden - 2));
  CHECK_THROWS_AS(SuspensionObservable(rot, TorusCharacter{{1}}, 0.5), std::invalid_argument);
  const DynamicalSystem cat = cat_map();
  CHECK_THROWS_AS(SuspensionObservable(cat, TorusCharacter{{1, 0}}, 0.3), std::invalid_argument);
  const SuspensionObservable g(rot, TorusCharacter{{1}}, golden);
  // continuity across the suspension identification [w, 1] ~ [T w, 0]
  const Point w = TorusPoint{{0.2}};
  CHECK(g(w, 1.0 - 1e-12) == doctest::Approx(g(step(rot, w), 0.0)).epsilon(1e-9));
}

TEST_CASE("estimator examples") {
  const DynamicalSystem rot = rotation(TranslationCoordinate::real(golden));
  const Point w = sample_ergodic(rot, 1);
  const SuspensionObservable g2(rot, TorusCharacter{{0}}, 2.0);
  CHECK(std::abs(schwartzman_estimate(rot, g2.as_function(), w) - 2.0) <= 2.0 / 1000);

  const CircleObservable constant = [](const Point &, double) { return 0.3; };
  CHECK(schwartzman_estimate(rot, constant, w) == 0.0);

  // a 2-cycle suspends to a circle of length 2, wound once
  const FiniteCyclicSystem f(3, 2, 0, {1, 2});
  const DynamicalSystem fin = f;
  const CircleObservable once = [&](const Point &p, double s) {
    return (static_cast<double>(f.orbit_index(std::get<Residue>(p).value)) + s) / 2.0;
  };
  CHECK(std::abs(schwartzman_estimate(fin, once, Residue{1}) - 0.5) <= 5.0 / 1000);
}

TEST_CASE("estimator errors") {
  const DynamicalSystem rot = rotation(TranslationCoordinate::real(golden));
  const SuspensionObservable fast(rot, TorusCharacter{{0}}, 80.0);
  CHECK_THROWS_AS(schwartzman_estimate(rot, fast.as_function(), TorusPoint{{0.1}}), UnwrapAmbiguity);
  CHECK_NOTHROW(schwartzman_estimate(rot, fast.as_function(), TorusPoint{{0.1}}, {100.0, 0.001}));
  const DynamicalSystem dbl = CircleDoublingSystem{};
  const CircleObservable zero = [](const Point &, double) { return 0.0; };
  CHECK_THROWS_AS(schwartzman_estimate(dbl, zero, sample_ergodic(dbl, 1)), NonInvertibleSystem);
}

TEST_CASE("estimates agree across the conjugacy of the 2-cycle with the rotation of Z/2Z") {
  const FiniteCyclicSystem f(3, 2, 0, {1, 2});
  const FiniteCyclicSystem r(2, 1, 1, {0, 1});
  const DynamicalSystem fs = f;
  const DynamicalSystem rs = r;
  // conjugacy phi(1) = 0, phi(2) = 1
  const CircleObservable on_f = [&](const Point &p, double s) {
    const double k = std::get<Residue>(p).value == 1 ? 0.0 : 1.0;
    return std::fmod((k + s) / 2.0 + 0.1, 1.0);
  };
  const CircleObservable on_r = [&](const Point &p, double s) {
    return std::fmod((static_cast<double>(std::get<Residue>(p).value) + s) / 2.0 + 0.1, 1.0);
  };
  const double a = schwartzman_estimate(fs, on_f, Residue{1});
  const double b = schwartzman_estimate(rs, on_r, Residue{0});
  CHECK(std::abs(a - b) <= 2.0 * 5.0 / 1000);
  CHECK(finite_label_group(f).to_string() == finite_label_group(r).to_string());
}
