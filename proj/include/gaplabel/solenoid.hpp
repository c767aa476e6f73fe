#pragma once

// The dyadic solenoid in three realizations and the doubling map on each:
//
//   S1 = (R x Z_2) / {(a,-a) : a in Z}          T1[r,z] = [2r, 2z]
//   S2 = inverse limit of R / 2^n Z             (T2 x)_n = 2 x_n
//   S3 = attractor of F on the solid torus      F(w,x,y) = (2w, lx + cos/2, ly + sin/2)
//
// plus the conjugacies g : S1 -> S2 and h : S3 -> S2. All angle and digit
// arithmetic is exact (binary expansions), so the conjugacy identities hold
// bit for bit rather than up to rounding.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gaplabel {

/// Truncated 2-adic integer z = sum_{j<W} z_j 2^j, arithmetic modulo 2^W.
class Dyadic {
public:
  explicit Dyadic(std::size_t width = 64);
  static auto from_int(std::int64_t value, std::size_t width = 64) -> Dyadic;
  static auto from_digits(std::vector<std::uint8_t> digits) -> Dyadic;
  static auto random(std::mt19937_64 &rng, std::size_t width) -> Dyadic;

  [[nodiscard]] auto width() const -> std::size_t { return digits_.size(); }
  [[nodiscard]] auto digit(std::size_t j) const -> int { return digits_.at(j); }
  [[nodiscard]] auto digits() const -> const std::vector<std::uint8_t> & {
    return digits_;
  }
  [[nodiscard]] auto is_zero() const -> bool;

  [[nodiscard]] auto operator+(const Dyadic &other) const -> Dyadic;
  [[nodiscard]] auto operator-(const Dyadic &other) const -> Dyadic;
  [[nodiscard]] auto operator-() const -> Dyadic;
  [[nodiscard]] auto plus_int(std::int64_t k) const -> Dyadic;

  /// 2z + carry_in modulo 2^W.
  [[nodiscard]] auto doubled(int carry_in = 0) const -> Dyadic;
  /// z / 2 for even z; the top digit becomes unknown, so the width drops by one.
  [[nodiscard]] auto halved() const -> Dyadic;
  /// z mod 2^n.
  [[nodiscard]] auto truncated(std::size_t n) const -> Dyadic;
  /// Low 64 digits as an unsigned integer.
  [[nodiscard]] auto low_word() const -> std::uint64_t;
  /// Digits most significant first, e.g. "...0101".
  [[nodiscard]] auto to_string() const -> std::string;

  friend auto operator==(const Dyadic &, const Dyadic &) -> bool = default;

private:
  std::vector<std::uint8_t> digits_; // least significant first
};

/// Exact binary fraction w = sum_{k=1}^{F} d_k 2^{-k} in [0,1).
class BinaryFraction {
public:
  BinaryFraction() = default;
  /// Exact conversion; x is reduced mod 1 first.
  static auto from_double(double x) -> BinaryFraction;
  /// Digits d_1, d_2, ... (most significant first).
  static auto from_digits(const std::vector<std::uint8_t> &msb_first)
      -> BinaryFraction;
  static auto random(std::mt19937_64 &rng, std::size_t bits) -> BinaryFraction;

  /// Number of stored digits F.
  [[nodiscard]] auto precision() const -> std::size_t { return digits_.size(); }
  /// d_k, k >= 1; zero beyond the stored precision.
  [[nodiscard]] auto digit(std::size_t k) const -> int;
  [[nodiscard]] auto to_double() const -> double;
  [[nodiscard]] auto is_zero() const -> bool;

  /// 2w mod 1; drops d_1. Returns d_1 (the carry out).
  auto double_in_place() -> int;
  [[nodiscard]] auto doubled() const -> BinaryFraction;
  /// (w + d) / 2 for d in {0,1}; exact, precision grows by one.
  void halve_in_place(int d);
  [[nodiscard]] auto halved(int d) const -> BinaryFraction;

  /// 2^n w = I + f with I in [0, 2^n): returns I as an n-digit Dyadic.
  [[nodiscard]] auto scaled_integer_part(std::size_t n) const -> Dyadic;
  /// The fractional part f of 2^n w.
  [[nodiscard]] auto scaled_fraction(std::size_t n) const -> BinaryFraction;

  friend auto operator==(const BinaryFraction &a, const BinaryFraction &b) -> bool;

private:
  std::vector<std::uint8_t> digits_; // d_F, ..., d_1 (d_1 at the back)
};

/// Element of R / 2^n Z as an exact n-digit integer part plus a fraction.
struct ScaledCoordinate {
  Dyadic integer_part;     // width n
  BinaryFraction fraction; // in [0,1)

  [[nodiscard]] auto modulus_exponent() const -> std::size_t {
    return integer_part.width();
  }
  [[nodiscard]] auto to_double() const -> double;
  [[nodiscard]] auto doubled() const -> ScaledCoordinate;
  friend auto operator==(const ScaledCoordinate &, const ScaledCoordinate &)
      -> bool = default;
};

/// Distance between two elements of R / 2^n Z (same n).
auto circular_distance(const ScaledCoordinate &a, const ScaledCoordinate &b) -> double;

struct SolPointS1 {
  BinaryFraction r; // canonical representative, r in [0,1)
  Dyadic z;

  /// Canonical class of (r, z): the integer part of r is shifted into z.
  static auto canonical(double r, const Dyadic &z) -> SolPointS1;
  friend auto operator==(const SolPointS1 &, const SolPointS1 &) -> bool = default;
};

struct SolPointS2 {
  std::vector<ScaledCoordinate> coords; // x_0, x_1, ..., x_n in R / 2^n Z

  /// sigma_n x_{n+1} = x_n for every stored n, within tol.
  [[nodiscard]] auto is_compatible(double tol = 1e-9) const -> bool;
  friend auto operator==(const SolPointS2 &, const SolPointS2 &) -> bool = default;
};

/// Max coordinatewise circular distance over the common coordinates.
auto max_coordinate_distance(const SolPointS2 &a, const SolPointS2 &b) -> double;

struct SolPointS3 {
  std::vector<BinaryFraction> backward_angles; // w_0, w_{-1}, ..., w_{-K}
  double lambda = 0.25;
  double x = 0.0;
  double y = 0.0;

  /// Builds the attractor point with fiber coordinates from the truncated
  /// geometric series sum_{k=1}^{K} lambda^{k-1} (cos, sin)(2 pi w_{-k}) / 2.
  static auto from_backward_angles(std::vector<BinaryFraction> angles,
                                   double lambda) -> SolPointS3;

  [[nodiscard]] auto history() const -> std::size_t {
    return backward_angles.empty() ? 0 : backward_angles.size() - 1;
  }
  /// Bound lambda^K / (2 (1 - lambda)) on the neglected tail of the series.
  [[nodiscard]] auto truncation_bound() const -> double;
  /// 2 w_{-(k+1)} = w_{-k} mod 1 for all stored k, exactly.
  [[nodiscard]] auto is_compatible() const -> bool;
};

/// Dyadic rational k / 2^n, an element of the dual group Z[1/2] of S1.
struct DyadicRational {
  std::int64_t numerator = 0;
  unsigned exponent = 0;

  [[nodiscard]] auto normalized() const -> DyadicRational;
  /// The dual doubling map a -> 2a.
  [[nodiscard]] auto doubled() const -> DyadicRational;
  [[nodiscard]] auto to_double() const -> double;
  friend auto operator==(const DyadicRational &a, const DyadicRational &b) -> bool;
};

/// Character of S1 indexed by a = k / 2^n: [r, z] -> k (r + (z mod 2^n)) / 2^n mod 1.
auto character_value(const SolPointS1 &point, const DyadicRational &a) -> double;

// Doubling maps.
auto double_point(const SolPointS1 &p) -> SolPointS1;
auto double_point(const SolPointS2 &p) -> SolPointS2;
/// F restricted to S3: the new angle 2 w_0 is prepended, the oldest angle is
/// dropped so the history length stays K, and (x,y) follow F itself.
auto double_point(const SolPointS3 &p) -> SolPointS3;

/// T1^{-1}; consumes the lowest 2-adic digit, so z loses one digit of width.
/// Throws InsufficientHistory when z has no digits left.
auto halve_point(const SolPointS1 &p) -> SolPointS1;

/// g(r, z)_n = r + sum_{j<n} z_j 2^j  (n = 0..W).
auto conj_g(double r, const Dyadic &z) -> SolPointS2;
auto conj_g(const SolPointS1 &p) -> SolPointS2;

/// h(w,x,y)_n = pi_n(T3^{-n}(w,x,y)) = 2^n w_{-n} mod 2^n, for n = 0..coords-1.
/// Throws InsufficientHistory when coords exceeds K + 1.
auto conj_h(const SolPointS3 &p, std::size_t coords) -> SolPointS2;
auto conj_h(const SolPointS3 &p) -> SolPointS2;

struct SolenoidSample {
  SolPointS1 s1;
  SolPointS2 s2;
  SolPointS3 s3;
};

/// Natural extension of Lebesgue measure: r uniform with W random bits, z
/// with W i.i.d. uniform digits; S2 = g(r,z) and S3 carries the backward
/// angles w_{-k} = (r + (z mod 2^k)) / 2^k, k = 0..K. Requires K <= W.
auto sample_solenoid(std::uint64_t seed, std::size_t width = 64,
                     std::size_t history = 40, double lambda = 0.25)
    -> SolenoidSample;

/// Backward angles w_{-k} of the S1 point, k = 0..history.
auto backward_angles(const SolPointS1 &p, std::size_t history)
    -> std::vector<BinaryFraction>;

struct ConjugacyReport {
  std::size_t samples = 0;
  std::size_t steps = 0;
  std::size_t g_mismatches = 0; // samples where T2 g != g T1 exactly
  double h_max_error = 0.0;     // worst coordinate distance of T2 h vs h T3
  double h_tolerance = 1e-9;

  [[nodiscard]] auto g_passed() const -> bool { return g_mismatches == 0; }
  [[nodiscard]] auto h_passed() const -> bool { return h_max_error <= h_tolerance; }
};

/// Iterates both sides of T2 o g = g o T1 and T2 o h = h o T3 for `steps`
/// steps on `samples` points drawn with seeds seed, seed + 1, ...
auto check_conjugacies(std::uint64_t seed, std::size_t samples = 100,
                       std::size_t steps = 100, std::size_t width = 64,
                       std::size_t history = 40, double lambda = 0.25) -> ConjugacyReport;

} // namespace gaplabel
