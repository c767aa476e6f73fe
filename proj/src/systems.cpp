#include "gaplabel/systems.hpp"

#include "gaplabel/detail/overloaded.hpp"
#include "gaplabel/detail/wide.hpp"
#include "gaplabel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

namespace gaplabel {

namespace {

using detail::overloaded;

auto wrap_unit(double x) -> double {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

auto mod_positive(detail::Wide a, std::int64_t p) -> std::int64_t {
  const auto r = static_cast<std::int64_t>(a % p);
  return r < 0 ? r + p : r;
}

auto to_doubles(const IntMatrix &m) -> std::vector<double> {
  std::vector<double> out;
  out.reserve(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out.push_back(static_cast<double>(to_int64(m(r, c))));
  return out;
}

auto modular_inverse(std::int64_t a, std::int64_t p) -> std::int64_t {
  // extended Euclid on (a, p)
  std::int64_t old_r = mod_positive(a, p), r = p;
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
  }
  return mod_positive(old_s, p);
}

} // namespace

auto Rational::make(std::int64_t num, std::int64_t den) -> Rational {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

auto Rational::to_double() const -> double {
  return static_cast<double>(num) / static_cast<double>(den);
}

auto Rational::mod_one() const -> Rational {
  return {mod_positive(num, den), den};
}

auto TranslationCoordinate::exact(std::int64_t num, std::int64_t den)
    -> TranslationCoordinate {
  TranslationCoordinate t;
  t.rational_ = Rational::make(num, den).mod_one();
  t.value_ = t.rational_->to_double();
  return t;
}

auto TranslationCoordinate::real(double x) -> TranslationCoordinate {
  if (!std::isfinite(x))
    throw std::invalid_argument("TranslationCoordinate: non-finite value");
  TranslationCoordinate t;
  t.value_ = wrap_unit(x);
  return t;
}

TorusAffineSystem::TorusAffineSystem(IntMatrix a,
                                     std::vector<TranslationCoordinate> b,
                                     bool ergodic_hint)
    : matrix_(std::move(a)), inverse_(IntMatrix::identity(1)),
      translation_(std::move(b)), ergodic_hint_(ergodic_hint) {
  if (!matrix_.is_square() || matrix_.rows() != translation_.size())
    throw std::invalid_argument("TorusAffineSystem: A must be d x d with b in T^d");
  const Integer det = determinant(matrix_);
  if (det != 1 && det != -1)
    throw std::invalid_argument("TorusAffineSystem: |det A| must be 1, got " +
                                det.str());
  inverse_ = unimodular_inverse(matrix_);
  forward_ = to_doubles(matrix_);
  backward_ = to_doubles(inverse_);
}

auto TorusAffineSystem::apply(const std::vector<double> &w) const
    -> std::vector<double> {
  const std::size_t d = dimension();
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = translation_[i].value();
    for (std::size_t j = 0; j < d; ++j) acc += forward_[i * d + j] * w[j];
    out[i] = wrap_unit(acc);
  }
  return out;
}

auto TorusAffineSystem::apply_inverse(const std::vector<double> &w) const
    -> std::vector<double> {
  const std::size_t d = dimension();
  std::vector<double> shifted(d);
  for (std::size_t i = 0; i < d; ++i) shifted[i] = w[i] - translation_[i].value();
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += backward_[i * d + j] * shifted[j];
    out[i] = wrap_unit(acc);
  }
  return out;
}

FiniteCyclicSystem::FiniteCyclicSystem(std::int64_t modulus, std::int64_t multiplier,
                                       std::int64_t shift,
                                       std::vector<std::int64_t> support)
    : modulus_(modulus), multiplier_(0), shift_(0), inverse_multiplier_(0) {
  if (modulus < 1) throw std::invalid_argument("FiniteCyclicSystem: p must be >= 1");
  multiplier_ = mod_positive(multiplier, modulus);
  shift_ = mod_positive(shift, modulus);
  if (std::gcd(multiplier_, modulus_) != 1 && modulus_ != 1)
    throw std::invalid_argument("FiniteCyclicSystem: A must be a unit mod p");
  inverse_multiplier_ = modulus_ == 1 ? 0 : modular_inverse(multiplier_, modulus_);
  if (support.empty())
    throw std::invalid_argument("FiniteCyclicSystem: empty support");
  for (auto &s : support) {
    if (s < 0 || s >= modulus_)
      throw std::invalid_argument("FiniteCyclicSystem: support residue out of range");
  }
  std::vector<std::int64_t> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("FiniteCyclicSystem: repeated support residue");

  // the support must be exactly the orbit of its first element
  std::vector<std::int64_t> orbit_order{support.front()};
  for (std::int64_t w = apply(support.front()); w != support.front(); w = apply(w))
    orbit_order.push_back(w);
  std::vector<std::int64_t> orbit_sorted = orbit_order;
  std::sort(orbit_sorted.begin(), orbit_sorted.end());
  if (orbit_sorted != sorted)
    throw std::invalid_argument(
        "FiniteCyclicSystem: support is not a single T-orbit, so the counting "
        "measure on it is not ergodic");
  support_ = std::move(orbit_order);
}

auto FiniteCyclicSystem::apply(std::int64_t w) const -> std::int64_t {
  return mod_positive(static_cast<detail::Wide>(multiplier_) * w + shift_, modulus_);
}

auto FiniteCyclicSystem::apply_inverse(std::int64_t w) const -> std::int64_t {
  return mod_positive(static_cast<detail::Wide>(inverse_multiplier_) *
                          mod_positive(static_cast<detail::Wide>(w) - shift_, modulus_),
                      modulus_);
}

auto FiniteCyclicSystem::orbit_index(std::int64_t w) const -> std::size_t {
  const auto it = std::find(support_.begin(), support_.end(), w);
  if (it == support_.end())
    throw std::invalid_argument("FiniteCyclicSystem: residue " + std::to_string(w) +
                                " is not in the support");
  return static_cast<std::size_t>(it - support_.begin());
}

auto is_invertible(const DynamicalSystem &system) -> bool {
  return !std::holds_alternative<CircleDoublingSystem>(system);
}

auto system_kind(const DynamicalSystem &system) -> std::string {
  return std::visit(overloaded{
                        [](const TorusAffineSystem &) { return std::string("torus_affine"); },
                        [](const FiniteCyclicSystem &) { return std::string("finite_cyclic"); },
                        [](const CircleDoublingSystem &) { return std::string("circle_doubling"); },
                        [](const SolenoidDoublingSystem &) {
                          return std::string("solenoid_doubling");
                        },
                    },
                    system);
}

void validate_point(const DynamicalSystem &system, const Point &point) {
  const bool ok = std::visit(
      overloaded{
          [&](const TorusAffineSystem &s) {
            const auto *p = std::get_if<TorusPoint>(&point);
            return p && p->coords.size() == s.dimension() &&
                   std::all_of(p->coords.begin(), p->coords.end(),
                               [](double x) { return x >= 0.0 && x < 1.0; });
          },
          [&](const FiniteCyclicSystem &s) {
            const auto *p = std::get_if<Residue>(&point);
            return p && p->value >= 0 && p->value < s.modulus();
          },
          [&](const CircleDoublingSystem &) {
            return std::holds_alternative<BinaryFraction>(point);
          },
          [&](const SolenoidDoublingSystem &) {
            return std::holds_alternative<SolPointS1>(point);
          },
      },
      system);
  if (!ok)
    throw std::invalid_argument("point does not belong to the " + system_kind(system) +
                                " system");
}

auto step(const DynamicalSystem &system, const Point &point) -> Point {
  validate_point(system, point);
  return std::visit(
      overloaded{
          [&](const TorusAffineSystem &s) -> Point {
            return TorusPoint{s.apply(std::get<TorusPoint>(point).coords)};
          },
          [&](const FiniteCyclicSystem &s) -> Point {
            return Residue{s.apply(std::get<Residue>(point).value)};
          },
          [&](const CircleDoublingSystem &) -> Point {
            return std::get<BinaryFraction>(point).doubled();
          },
          [&](const SolenoidDoublingSystem &) -> Point {
            return double_point(std::get<SolPointS1>(point));
          },
      },
      system);
}

auto step_inverse(const DynamicalSystem &system, const Point &point) -> Point {
  validate_point(system, point);
  return std::visit(
      overloaded{
          [&](const TorusAffineSystem &s) -> Point {
            return TorusPoint{s.apply_inverse(std::get<TorusPoint>(point).coords)};
          },
          [&](const FiniteCyclicSystem &s) -> Point {
            return Residue{s.apply_inverse(std::get<Residue>(point).value)};
          },
          [&](const CircleDoublingSystem &) -> Point {
            throw NonInvertibleSystem(
                "the circle doubling map is not invertible: only forward orbits "
                "and half-line operators are available");
          },
          [&](const SolenoidDoublingSystem &) -> Point {
            return halve_point(std::get<SolPointS1>(point));
          },
      },
      system);
}

auto orbit(const DynamicalSystem &system, const Point &base, std::size_t length,
           Direction direction) -> OrbitSample {
  if (direction == Direction::Backward && !is_invertible(system))
    throw NonInvertibleSystem(
        "backward orbit requested for a non-invertible map; whole-line "
        "operators cannot be defined over it");
  validate_point(system, base);
  OrbitSample sample{direction, {}};
  if (length == 0) return sample;
  sample.points.reserve(length);
  sample.points.push_back(base);
  for (std::size_t n = 1; n < length; ++n)
    sample.points.push_back(direction == Direction::Forward
                                ? step(system, sample.points.back())
                                : step_inverse(system, sample.points.back()));
  return sample;
}

auto uniform_unit(std::uint64_t word) -> double {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

auto sample_ergodic(const DynamicalSystem &system, std::uint64_t seed) -> Point {
  std::mt19937_64 rng(seed);
  return std::visit(
      overloaded{
          [&](const TorusAffineSystem &s) -> Point {
            TorusPoint p;
            p.coords.reserve(s.dimension());
            for (std::size_t i = 0; i < s.dimension(); ++i)
              p.coords.push_back(uniform_unit(rng()));
            return p;
          },
          [&](const FiniteCyclicSystem &s) -> Point {
            const auto n = static_cast<std::uint64_t>(s.support().size());
            return Residue{s.support()[static_cast<std::size_t>(rng() % n)]};
          },
          [&](const CircleDoublingSystem &s) -> Point {
            return BinaryFraction::random(rng, s.sample_bits);
          },
          [&](const SolenoidDoublingSystem &s) -> Point {
            return sample_solenoid(seed, s.precision, 0).s1;
          },
      },
      system);
}

} // namespace gaplabel
