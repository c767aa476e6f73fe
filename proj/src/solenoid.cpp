#include "gaplabel/solenoid.hpp"

#include "gaplabel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gaplabel {

// ---------------------------------------------------------------- Dyadic

Dyadic::Dyadic(std::size_t width) : digits_(width, 0) {}

auto Dyadic::from_int(std::int64_t value, std::size_t width) -> Dyadic {
  Dyadic z(width);
  const auto bits = static_cast<std::uint64_t>(value);
  for (std::size_t j = 0; j < width; ++j)
    z.digits_[j] = j < 64 ? static_cast<std::uint8_t>((bits >> j) & 1U)
                          : static_cast<std::uint8_t>(value < 0 ? 1 : 0);
  return z;
}

auto Dyadic::from_digits(std::vector<std::uint8_t> digits) -> Dyadic {
  for (auto d : digits)
    if (d > 1) throw std::invalid_argument("Dyadic: digits must be 0 or 1");
  Dyadic z(0);
  z.digits_ = std::move(digits);
  return z;
}

auto Dyadic::random(std::mt19937_64 &rng, std::size_t width) -> Dyadic {
  Dyadic z(width);
  std::uint64_t word = 0;
  for (std::size_t j = 0; j < width; ++j) {
    if (j % 64 == 0) word = rng();
    z.digits_[j] = static_cast<std::uint8_t>((word >> (j % 64)) & 1U);
  }
  return z;
}

auto Dyadic::is_zero() const -> bool {
  return std::all_of(digits_.begin(), digits_.end(), [](auto d) { return d == 0; });
}

auto Dyadic::operator+(const Dyadic &other) const -> Dyadic {
  if (other.width() != width())
    throw std::invalid_argument("Dyadic: width mismatch in addition");
  Dyadic sum(width());
  int carry = 0;
  for (std::size_t j = 0; j < width(); ++j) {
    const int s = digits_[j] + other.digits_[j] + carry;
    sum.digits_[j] = static_cast<std::uint8_t>(s & 1);
    carry = s >> 1;
  }
  return sum;
}

auto Dyadic::operator-() const -> Dyadic {
  Dyadic flipped(width());
  for (std::size_t j = 0; j < width(); ++j)
    flipped.digits_[j] = static_cast<std::uint8_t>(1 - digits_[j]);
  return flipped + from_int(1, width());
}

auto Dyadic::operator-(const Dyadic &other) const -> Dyadic {
  return *this + (-other);
}

auto Dyadic::plus_int(std::int64_t k) const -> Dyadic {
  return *this + from_int(k, width());
}

auto Dyadic::doubled(int carry_in) const -> Dyadic {
  Dyadic out(width());
  if (width() == 0) return out;
  out.digits_[0] = static_cast<std::uint8_t>(carry_in & 1);
  for (std::size_t j = 1; j < width(); ++j) out.digits_[j] = digits_[j - 1];
  return out;
}

auto Dyadic::halved() const -> Dyadic {
  if (width() == 0) throw InsufficientHistory("Dyadic::halved: no digits left");
  if (digits_[0] != 0) throw std::domain_error("Dyadic::halved: odd value");
  return from_digits({digits_.begin() + 1, digits_.end()});
}

auto Dyadic::truncated(std::size_t n) const -> Dyadic {
  if (n > width())
    throw InsufficientHistory("Dyadic::truncated: requested " + std::to_string(n) +
                              " digits, only " + std::to_string(width()) + " known");
  return from_digits({digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(n)});
}

auto Dyadic::low_word() const -> std::uint64_t {
  std::uint64_t w = 0;
  for (std::size_t j = 0; j < std::min<std::size_t>(64, width()); ++j)
    w |= static_cast<std::uint64_t>(digits_[j]) << j;
  return w;
}

auto Dyadic::to_string() const -> std::string {
  std::string s = "...";
  for (std::size_t j = width(); j-- > 0;) s.push_back(digits_[j] ? '1' : '0');
  return s;
}

// -------------------------------------------------------- BinaryFraction

auto BinaryFraction::from_double(double x) -> BinaryFraction {
  if (!std::isfinite(x))
    throw std::invalid_argument("BinaryFraction: non-finite value");
  x -= std::floor(x);
  std::vector<std::uint8_t> msb_first;
  while (x != 0.0) { // terminates: x has a finite binary expansion
    x *= 2.0;
    const bool one = x >= 1.0;
    msb_first.push_back(one ? 1 : 0);
    if (one) x -= 1.0;
  }
  return from_digits(msb_first);
}

auto BinaryFraction::from_digits(const std::vector<std::uint8_t> &msb_first)
    -> BinaryFraction {
  BinaryFraction w;
  w.digits_.assign(msb_first.rbegin(), msb_first.rend());
  for (auto d : w.digits_)
    if (d > 1) throw std::invalid_argument("BinaryFraction: digits must be 0 or 1");
  return w;
}

auto BinaryFraction::random(std::mt19937_64 &rng, std::size_t bits) -> BinaryFraction {
  BinaryFraction w;
  w.digits_.resize(bits);
  std::uint64_t word = 0;
  for (std::size_t j = 0; j < bits; ++j) {
    if (j % 64 == 0) word = rng();
    w.digits_[j] = static_cast<std::uint8_t>((word >> (j % 64)) & 1U);
  }
  return w;
}

auto BinaryFraction::digit(std::size_t k) const -> int {
  if (k == 0) throw std::out_of_range("BinaryFraction::digit: k starts at 1");
  return k <= digits_.size() ? digits_[digits_.size() - k] : 0;
}

auto BinaryFraction::to_double() const -> double {
  double v = 0.0;
  for (std::size_t k = std::min<std::size_t>(precision(), 64); k >= 1; --k)
    v = (v + digit(k)) * 0.5;
  return v;
}

auto BinaryFraction::is_zero() const -> bool {
  return std::all_of(digits_.begin(), digits_.end(), [](auto d) { return d == 0; });
}

auto BinaryFraction::double_in_place() -> int {
  if (digits_.empty()) return 0;
  const int carry = digits_.back();
  digits_.pop_back();
  return carry;
}

auto BinaryFraction::doubled() const -> BinaryFraction {
  BinaryFraction w = *this;
  w.double_in_place();
  return w;
}

void BinaryFraction::halve_in_place(int d) {
  if (d != 0 && d != 1) throw std::invalid_argument("BinaryFraction: digit must be 0 or 1");
  digits_.push_back(static_cast<std::uint8_t>(d));
}

auto BinaryFraction::halved(int d) const -> BinaryFraction {
  BinaryFraction w = *this;
  w.halve_in_place(d);
  return w;
}

auto BinaryFraction::scaled_integer_part(std::size_t n) const -> Dyadic {
  std::vector<std::uint8_t> lsb_first(n);
  for (std::size_t j = 0; j < n; ++j)
    lsb_first[j] = static_cast<std::uint8_t>(digit(n - j));
  return Dyadic::from_digits(std::move(lsb_first));
}

auto BinaryFraction::scaled_fraction(std::size_t n) const -> BinaryFraction {
  BinaryFraction w;
  if (n < digits_.size())
    w.digits_.assign(digits_.begin(), digits_.end() - static_cast<std::ptrdiff_t>(n));
  return w;
}

auto operator==(const BinaryFraction &a, const BinaryFraction &b) -> bool {
  const std::size_t f = std::max(a.precision(), b.precision());
  for (std::size_t k = 1; k <= f; ++k)
    if (a.digit(k) != b.digit(k)) return false;
  return true;
}

// ------------------------------------------------------ ScaledCoordinate

auto ScaledCoordinate::to_double() const -> double {
  return static_cast<double>(integer_part.low_word()) + fraction.to_double();
}

auto ScaledCoordinate::doubled() const -> ScaledCoordinate {
  ScaledCoordinate out = *this;
  const int carry = out.fraction.double_in_place();
  out.integer_part = integer_part.doubled(carry);
  return out;
}

auto circular_distance(const ScaledCoordinate &a, const ScaledCoordinate &b) -> double {
  const std::size_t n = a.modulus_exponent();
  if (b.modulus_exponent() != n)
    throw std::invalid_argument("circular_distance: coordinates live in different groups");
  const double df = a.fraction.to_double() - b.fraction.to_double();
  if (n == 0) return std::abs(df - std::round(df));
  const Dyadic di = a.integer_part - b.integer_part;
  double best = 1.0; // integer parts more than one apart
  if (di.is_zero()) best = std::min(best, std::abs(df));
  if (di == Dyadic::from_int(1, n)) best = std::min(best, std::abs(1.0 + df));
  if (di == Dyadic::from_int(-1, n)) best = std::min(best, std::abs(df - 1.0));
  return best;
}

// ------------------------------------------------------------ S1, S2, S3

auto SolPointS1::canonical(double r, const Dyadic &z) -> SolPointS1 {
  const double k = std::floor(r);
  return {BinaryFraction::from_double(r - k), z.plus_int(static_cast<std::int64_t>(k))};
}

auto SolPointS2::is_compatible(double tol) const -> bool {
  for (std::size_t n = 0; n + 1 < coords.size(); ++n) {
    const ScaledCoordinate projected{coords[n + 1].integer_part.truncated(n),
                                     coords[n + 1].fraction};
    if (circular_distance(projected, coords[n]) > tol) return false;
  }
  return true;
}

auto max_coordinate_distance(const SolPointS2 &a, const SolPointS2 &b) -> double {
  double worst = 0.0;
  for (std::size_t n = 0; n < std::min(a.coords.size(), b.coords.size()); ++n)
    worst = std::max(worst, circular_distance(a.coords[n], b.coords[n]));
  return worst;
}

auto SolPointS3::from_backward_angles(std::vector<BinaryFraction> angles,
                                      double lambda) -> SolPointS3 {
  if (!(lambda > 0.0 && lambda < 0.5))
    throw std::invalid_argument("SolPointS3: lambda must lie in (0, 1/2)");
  if (angles.empty())
    throw std::invalid_argument("SolPointS3: at least the current angle is required");
  SolPointS3 p{std::move(angles), lambda, 0.0, 0.0};
  double weight = 1.0;
  for (std::size_t k = 1; k < p.backward_angles.size(); ++k) {
    const double theta = 2.0 * std::numbers::pi * p.backward_angles[k].to_double();
    p.x += weight * 0.5 * std::cos(theta);
    p.y += weight * 0.5 * std::sin(theta);
    weight *= lambda;
  }
  return p;
}

auto SolPointS3::truncation_bound() const -> double {
  return std::pow(lambda, static_cast<double>(history())) / (2.0 * (1.0 - lambda));
}

auto SolPointS3::is_compatible() const -> bool {
  for (std::size_t k = 0; k + 1 < backward_angles.size(); ++k)
    if (!(backward_angles[k + 1].doubled() == backward_angles[k])) return false;
  return true;
}

// -------------------------------------------------------- DyadicRational

auto DyadicRational::normalized() const -> DyadicRational {
  DyadicRational a = *this;
  if (a.numerator == 0) return {0, 0};
  while (a.exponent > 0 && a.numerator % 2 == 0) {
    a.numerator /= 2;
    --a.exponent;
  }
  return a;
}

auto DyadicRational::doubled() const -> DyadicRational {
  const auto a = normalized();
  if (a.exponent > 0) return {a.numerator, a.exponent - 1};
  if (a.numerator > INT64_MAX / 2 || a.numerator < INT64_MIN / 2)
    throw std::overflow_error("DyadicRational::doubled: numerator overflow");
  return {2 * a.numerator, 0};
}

auto DyadicRational::to_double() const -> double {
  return std::ldexp(static_cast<double>(numerator), -static_cast<int>(exponent));
}

auto operator==(const DyadicRational &a, const DyadicRational &b) -> bool {
  const auto na = a.normalized();
  const auto nb = b.normalized();
  return na.numerator == nb.numerator && na.exponent == nb.exponent;
}

auto character_value(const SolPointS1 &point, const DyadicRational &a) -> double {
  const auto n = a.normalized();
  if (n.exponent > point.z.width())
    throw InsufficientHistory("character_value: character needs " +
                              std::to_string(n.exponent) + " 2-adic digits");
  BinaryFraction v = point.r;
  for (std::size_t j = 0; j < n.exponent; ++j) v.halve_in_place(point.z.digit(j));
  const double t = static_cast<double>(n.numerator) * v.to_double();
  const double out = t - std::floor(t);
  return out >= 1.0 ? 0.0 : out;
}

// ------------------------------------------------------------- dynamics

auto double_point(const SolPointS1 &p) -> SolPointS1 {
  SolPointS1 out = p;
  const int carry = out.r.double_in_place();
  out.z = p.z.doubled(carry);
  return out;
}

auto double_point(const SolPointS2 &p) -> SolPointS2 {
  SolPointS2 out;
  out.coords.reserve(p.coords.size());
  for (const auto &c : p.coords) out.coords.push_back(c.doubled());
  return out;
}

auto double_point(const SolPointS3 &p) -> SolPointS3 {
  SolPointS3 out;
  out.lambda = p.lambda;
  const auto &w0 = p.backward_angles.front();
  out.backward_angles.reserve(p.backward_angles.size());
  out.backward_angles.push_back(w0.doubled());
  out.backward_angles.insert(out.backward_angles.end(), p.backward_angles.begin(),
                             p.backward_angles.end() - 1);
  if (p.backward_angles.size() == 1) out.backward_angles.resize(1);
  const double theta = 2.0 * std::numbers::pi * w0.to_double();
  out.x = p.lambda * p.x + 0.5 * std::cos(theta);
  out.y = p.lambda * p.y + 0.5 * std::sin(theta);
  return out;
}

auto halve_point(const SolPointS1 &p) -> SolPointS1 {
  if (p.z.width() == 0)
    throw InsufficientHistory("halve_point: no 2-adic digits left for T1^{-1}");
  const int z0 = p.z.digit(0);
  // (r, z) ~ (r + z0, z - z0), and z - z0 is even
  std::vector<std::uint8_t> rest(p.z.digits().begin() + 1, p.z.digits().end());
  return {p.r.halved(z0), Dyadic::from_digits(std::move(rest))};
}

auto conj_g(const SolPointS1 &p) -> SolPointS2 {
  SolPointS2 out;
  out.coords.reserve(p.z.width() + 1);
  for (std::size_t n = 0; n <= p.z.width(); ++n)
    out.coords.push_back({p.z.truncated(n), p.r});
  return out;
}

auto conj_g(double r, const Dyadic &z) -> SolPointS2 {
  return conj_g(SolPointS1::canonical(r, z));
}

auto conj_h(const SolPointS3 &p, std::size_t coords) -> SolPointS2 {
  if (coords > p.backward_angles.size())
    throw InsufficientHistory("conj_h: " + std::to_string(coords) +
                              " coordinates need that many backward angles, have " +
                              std::to_string(p.backward_angles.size()));
  SolPointS2 out;
  out.coords.reserve(coords);
  for (std::size_t n = 0; n < coords; ++n) {
    const auto &w = p.backward_angles[n];
    out.coords.push_back({w.scaled_integer_part(n), w.scaled_fraction(n)});
  }
  return out;
}

auto conj_h(const SolPointS3 &p) -> SolPointS2 {
  return conj_h(p, p.backward_angles.size());
}

auto backward_angles(const SolPointS1 &p, std::size_t history)
    -> std::vector<BinaryFraction> {
  if (history > p.z.width())
    throw InsufficientHistory("backward_angles: history exceeds 2-adic precision");
  std::vector<BinaryFraction> angles;
  angles.reserve(history + 1);
  angles.push_back(p.r);
  for (std::size_t k = 1; k <= history; ++k)
    angles.push_back(angles.back().halved(p.z.digit(k - 1)));
  return angles;
}

auto sample_solenoid(std::uint64_t seed, std::size_t width, std::size_t history,
                     double lambda) -> SolenoidSample {
  if (history > width)
    throw std::invalid_argument("sample_solenoid: history K must not exceed width W");
  std::mt19937_64 rng(seed);
  SolPointS1 s1{BinaryFraction::random(rng, std::max<std::size_t>(width, 53)),
                Dyadic::random(rng, width)};
  auto s2 = conj_g(s1);
  auto s3 = SolPointS3::from_backward_angles(backward_angles(s1, history), lambda);
  return {std::move(s1), std::move(s2), std::move(s3)};
}

auto check_conjugacies(std::uint64_t seed, std::size_t samples, std::size_t steps,
                       std::size_t width, std::size_t history, double lambda)
    -> ConjugacyReport {
  ConjugacyReport report;
  report.samples = samples;
  report.steps = steps;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto sample = sample_solenoid(seed + s, width, history, lambda);

    SolPointS1 x1 = sample.s1;
    SolPointS2 lhs = conj_g(x1);
    for (std::size_t k = 0; k < steps; ++k) {
      lhs = double_point(lhs);
      x1 = double_point(x1);
    }
    if (!(lhs == conj_g(x1))) ++report.g_mismatches;

    SolPointS3 x3 = sample.s3;
    SolPointS2 hl = conj_h(x3);
    for (std::size_t k = 0; k < steps; ++k) {
      hl = double_point(hl);
      x3 = double_point(x3);
    }
    report.h_max_error = std::max(report.h_max_error, max_coordinate_distance(hl, conj_h(x3)));
  }
  return report;
}

} // namespace gaplabel

