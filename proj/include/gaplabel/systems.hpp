#pragma once

// Dynamical systems over compact abelian groups: affine torus maps, affine
// maps of Z/pZ restricted to one orbit, the circle doubling map, and the
// doubling map on the dyadic solenoid.

#include "gaplabel/intlin.hpp"
#include "gaplabel/solenoid.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gaplabel {

/// Reduced fraction with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static auto make(std::int64_t num, std::int64_t den) -> Rational;
  [[nodiscard]] auto to_double() const -> double;
  /// Representative of the class mod 1 in [0,1).
  [[nodiscard]] auto mod_one() const -> Rational;
  friend auto operator==(const Rational &, const Rational &) -> bool = default;
};

/// One coordinate of a translation vector: exact rational or a real number.
class TranslationCoordinate {
public:
  static auto exact(std::int64_t num, std::int64_t den) -> TranslationCoordinate;
  static auto real(double x) -> TranslationCoordinate;

  [[nodiscard]] auto value() const -> double { return value_; }
  [[nodiscard]] auto rational() const -> const std::optional<Rational> & {
    return rational_;
  }

private:
  double value_ = 0.0;
  std::optional<Rational> rational_;
};

/// T(w) = A w + b on the d-torus. A must be unimodular; ergodicity of the
/// chosen measure is asserted by the caller, not verified.
class TorusAffineSystem {
public:
  TorusAffineSystem(IntMatrix a, std::vector<TranslationCoordinate> b,
                    bool ergodic_hint = true);

  [[nodiscard]] auto dimension() const -> std::size_t { return translation_.size(); }
  [[nodiscard]] auto matrix() const -> const IntMatrix & { return matrix_; }
  [[nodiscard]] auto inverse_matrix() const -> const IntMatrix & { return inverse_; }
  [[nodiscard]] auto translation() const -> const std::vector<TranslationCoordinate> & {
    return translation_;
  }
  [[nodiscard]] auto ergodic_hint() const -> bool { return ergodic_hint_; }

  [[nodiscard]] auto apply(const std::vector<double> &w) const -> std::vector<double>;
  [[nodiscard]] auto apply_inverse(const std::vector<double> &w) const
      -> std::vector<double>;

private:
  IntMatrix matrix_;
  IntMatrix inverse_;
  std::vector<TranslationCoordinate> translation_;
  bool ergodic_hint_;
  std::vector<double> forward_; // row-major copies for the float path
  std::vector<double> backward_;
};

/// T(w) = A w + b on Z/pZ with the normalized counting measure on `support`,
/// which must be a single T-orbit.
class FiniteCyclicSystem {
public:
  FiniteCyclicSystem(std::int64_t modulus, std::int64_t multiplier,
                     std::int64_t shift, std::vector<std::int64_t> support);

  [[nodiscard]] auto modulus() const -> std::int64_t { return modulus_; }
  [[nodiscard]] auto multiplier() const -> std::int64_t { return multiplier_; }
  [[nodiscard]] auto shift() const -> std::int64_t { return shift_; }
  /// Support in orbit order: support()[k+1] = T(support()[k]).
  [[nodiscard]] auto support() const -> const std::vector<std::int64_t> & {
    return support_;
  }
  [[nodiscard]] auto apply(std::int64_t w) const -> std::int64_t;
  [[nodiscard]] auto apply_inverse(std::int64_t w) const -> std::int64_t;
  /// Position of w along the support orbit; throws if w is off the support.
  [[nodiscard]] auto orbit_index(std::int64_t w) const -> std::size_t;

private:
  std::int64_t modulus_;
  std::int64_t multiplier_;
  std::int64_t shift_;
  std::int64_t inverse_multiplier_;
  std::vector<std::int64_t> support_;
};

/// w -> 2w on the circle. Not invertible: half-line operators only. Points are
/// exact binary expansions; random points carry `sample_bits` digits, which
/// bounds the usable orbit length.
struct CircleDoublingSystem {
  std::size_t sample_bits = 4096;
};

/// T1[r,z] = [2r, 2z] on S1 with z known to `precision` 2-adic digits.
struct SolenoidDoublingSystem {
  std::size_t precision = 64;
};

using DynamicalSystem = std::variant<TorusAffineSystem, FiniteCyclicSystem,
                                     CircleDoublingSystem, SolenoidDoublingSystem>;

struct TorusPoint {
  std::vector<double> coords; // each in [0,1)
  friend auto operator==(const TorusPoint &, const TorusPoint &) -> bool = default;
};

struct Residue {
  std::int64_t value = 0;
  friend auto operator==(const Residue &, const Residue &) -> bool = default;
};

/// Torus systems use TorusPoint, finite systems Residue, the circle doubling
/// map BinaryFraction, and the solenoid SolPointS1.
using Point = std::variant<TorusPoint, Residue, BinaryFraction, SolPointS1>;

enum class Direction { Forward, Backward };

struct OrbitSample {
  Direction direction = Direction::Forward;
  std::vector<Point> points; // points[0] is the base point

  [[nodiscard]] auto size() const -> std::size_t { return points.size(); }
};

auto is_invertible(const DynamicalSystem &system) -> bool;
auto system_kind(const DynamicalSystem &system) -> std::string;

/// Throws std::invalid_argument when `point` is not a point of `system`.
void validate_point(const DynamicalSystem &system, const Point &point);

auto step(const DynamicalSystem &system, const Point &point) -> Point;
/// Throws NonInvertibleSystem for the circle doubling map.
auto step_inverse(const DynamicalSystem &system, const Point &point) -> Point;

auto orbit(const DynamicalSystem &system, const Point &base, std::size_t length,
           Direction direction = Direction::Forward) -> OrbitSample;

/// Draws from the canonical ergodic measure: Haar on the torus, uniform on the
/// finite support, Lebesgue for circle doubling, natural extension of
/// Lebesgue on the solenoid. Deterministic in `seed`.
auto sample_ergodic(const DynamicalSystem &system, std::uint64_t seed) -> Point;

/// Uniform double in [0,1) with 53 random bits; portable across standard libraries.
auto uniform_unit(std::uint64_t word) -> double;

} // namespace gaplabel
