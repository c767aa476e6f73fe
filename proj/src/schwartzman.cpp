#include "gaplabel/schwartzman.hpp"

#include "gaplabel/detail/overloaded.hpp"
#include "gaplabel/detail/wide.hpp"
#include "gaplabel/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gaplabel {

namespace {

using detail::overloaded;
using ExactRational = boost::multiprecision::cpp_rational;

auto wrap_unit(double x) -> double {
  const double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

auto wrap_half(double x) -> double { return x - std::round(x); }

auto exact_to_rational(const ExactRational &q) -> Rational {
  return Rational::make(to_int64(boost::multiprecision::numerator(q)),
                        to_int64(boost::multiprecision::denominator(q)));
}

auto format_rational(const Rational &r) -> std::string {
  return r.den == 1 ? fmt::format("{}", r.num) : fmt::format("{}/{}", r.num, r.den);
}

void require_fit(bool ok, const CharacterVector &chi, const DynamicalSystem &system) {
  if (!ok)
    throw InvalidObservable("character " + to_string(chi) + " is not a character of the " +
                            system_kind(system) + " system");
}

} // namespace

auto to_string(const CharacterVector &chi) -> std::string {
  return std::visit(overloaded{
                        [](const TorusCharacter &c) {
                          std::string s = "(";
                          for (std::size_t i = 0; i < c.m.size(); ++i)
                            s += (i ? "," : "") + c.m[i].str();
                          return s + ")";
                        },
                        [](const ResidueCharacter &c) { return fmt::format("m={}", c.m); },
                        [](const DyadicRational &a) {
                          const auto n = a.normalized();
                          return n.exponent == 0
                                     ? fmt::format("{}", n.numerator)
                                     : fmt::format("{}/2^{}", n.numerator, n.exponent);
                        },
                    },
                    chi);
}

auto evaluate(const CharacterVector &chi, const DynamicalSystem &system, const Point &w)
    -> double {
  return std::visit(
      overloaded{
          [&](const TorusCharacter &c, const TorusAffineSystem &s) {
            require_fit(c.m.size() == s.dimension(), chi, system);
            const auto &x = std::get<TorusPoint>(w).coords;
            double acc = 0.0;
            for (std::size_t i = 0; i < c.m.size(); ++i)
              acc += static_cast<double>(to_int64(c.m[i])) * x[i];
            return wrap_unit(acc);
          },
          [&](const TorusCharacter &c, const CircleDoublingSystem &) {
            require_fit(c.m.size() == 1, chi, system);
            return wrap_unit(static_cast<double>(to_int64(c.m[0])) *
                             std::get<BinaryFraction>(w).to_double());
          },
          [&](const ResidueCharacter &c, const FiniteCyclicSystem &s) {
            const auto p = s.modulus();
            const auto v = std::get<Residue>(w).value;
            const auto prod = static_cast<std::int64_t>(
                (static_cast<detail::Wide>(c.m) * v) % p);
            return static_cast<double>(prod < 0 ? prod + p : prod) / static_cast<double>(p);
          },
          [&](const DyadicRational &a, const SolenoidDoublingSystem &) {
            return character_value(std::get<SolPointS1>(w), a);
          },
          [&](const auto &, const auto &) -> double {
            require_fit(false, chi, system);
            return 0.0;
          },
      },
      chi, system);
}

auto is_fixed(const CharacterVector &chi, const DynamicalSystem &system) -> bool {
  return std::visit(
      overloaded{
          [&](const TorusCharacter &c, const TorusAffineSystem &s) {
            require_fit(c.m.size() == s.dimension(), chi, system);
            return s.matrix().transpose() * c.m == c.m;
          },
          [&](const TorusCharacter &c, const CircleDoublingSystem &) {
            require_fit(c.m.size() == 1, chi, system);
            return c.m[0] == 0; // 2m = m
          },
          [&](const ResidueCharacter &c, const FiniteCyclicSystem &s) {
            const auto p = s.modulus();
            const auto diff = static_cast<detail::Wide>(s.multiplier() - 1) * c.m;
            return diff % p == 0;
          },
          [&](const DyadicRational &a, const SolenoidDoublingSystem &) {
            return a.doubled() == a;
          },
          [&](const auto &, const auto &) -> bool {
            require_fit(false, chi, system);
            return false;
          },
      },
      chi, system);
}

auto value_at_translation(const CharacterVector &chi, const DynamicalSystem &system)
    -> CharacterValue {
  return std::visit(
      overloaded{
          [&](const TorusCharacter &c, const TorusAffineSystem &s) {
            require_fit(c.m.size() == s.dimension(), chi, system);
            double acc = 0.0;
            ExactRational exact = 0;
            bool is_exact = true;
            for (std::size_t i = 0; i < c.m.size(); ++i) {
              if (c.m[i] == 0) continue;
              const auto &b = s.translation()[i];
              acc += static_cast<double>(to_int64(c.m[i])) * b.value();
              if (b.rational())
                exact += ExactRational(c.m[i]) * ExactRational(b.rational()->num, b.rational()->den);
              else
                is_exact = false;
            }
            CharacterValue out;
            if (is_exact) {
              out.exact = exact_to_rational(exact).mod_one();
              out.value = out.exact->to_double();
            } else {
              out.value = wrap_unit(acc);
            }
            return out;
          },
          [&](const ResidueCharacter &c, const FiniteCyclicSystem &s) {
            const auto p = s.modulus();
            auto prod = static_cast<std::int64_t>((static_cast<detail::Wide>(c.m) * s.shift()) % p);
            if (prod < 0) prod += p;
            CharacterValue out;
            out.exact = Rational::make(prod, p);
            out.value = out.exact->to_double();
            return out;
          },
          [&](const auto &c, const auto &) {
            // circle and solenoid doubling have no translation part
            CharacterVector copy = c;
            is_fixed(copy, system); // validates the pairing
            return CharacterValue{0.0, Rational{0, 1}};
          },
      },
      chi, system);
}

// ------------------------------------------------------------ LabelGroup

auto LabelGroup::integers() -> LabelGroup {
  LabelGroup g;
  g.provenance_.push_back({"0", 0.0, Rational{0, 1}});
  return g;
}

auto LabelGroup::rational(std::int64_t q, std::string certificate) -> LabelGroup {
  if (q < 1) throw std::invalid_argument("LabelGroup::rational: Q must be >= 1");
  LabelGroup g;
  g.denominator_ = q;
  g.provenance_.push_back({std::move(certificate), 1.0 / static_cast<double>(q),
                           Rational::make(1, q)});
  return g;
}

void LabelGroup::add_generator(const GeneratorCertificate &certificate) {
  if (certificate.exact) {
    const Rational r = certificate.exact->mod_one();
    if (r.num != 0) denominator_ = std::lcm(denominator_, r.den);
  } else {
    const double g = wrap_unit(certificate.value);
    if (g != 0.0) irrational_.push_back(g);
  }
  provenance_.push_back(certificate);
}

auto LabelGroup::rational_collapse() const -> std::optional<std::int64_t> {
  if (!is_discrete()) return std::nullopt;
  return denominator_;
}

auto LabelGroup::generators() const -> std::vector<double> {
  std::vector<double> g{1.0 / static_cast<double>(denominator_)};
  g.insert(g.end(), irrational_.begin(), irrational_.end());
  return g;
}

auto LabelGroup::to_string() const -> std::string {
  std::string s = denominator_ == 1 ? "ℤ" : fmt::format("(1/{})ℤ", denominator_);
  for (double g : irrational_) s += fmt::format(" + ℤ·{:.12g}", g);
  return s;
}

auto LabelGroup::to_json() const -> nlohmann::json {
  nlohmann::json j;
  if (auto q = rational_collapse())
    j["rational_collapse"] = *q;
  else
    j["rational_collapse"] = nullptr;
  j["generators"] = generators();
  j["text"] = to_string();
  auto &prov = j["provenance"] = nlohmann::json::array();
  for (const auto &c : provenance_) {
    nlohmann::json e{{"character", c.character}, {"value", c.value}};
    e["exact"] = c.exact ? nlohmann::json(format_rational(*c.exact)) : nlohmann::json(nullptr);
    prov.push_back(std::move(e));
  }
  return j;
}

// ------------------------------------------------------ group computations

auto fixed_character_lattice(const TorusAffineSystem &system) -> LatticeBasis {
  const auto &a = system.matrix();
  return integer_kernel(a.transpose() - IntMatrix::identity(a.rows()));
}

auto label_group(const TorusAffineSystem &system) -> LabelGroup {
  LabelGroup g = LabelGroup::integers();
  const DynamicalSystem wrapped = system;
  for (const auto &m : fixed_character_lattice(system).vectors) {
    const CharacterVector chi = TorusCharacter{m};
    const auto v = value_at_translation(chi, wrapped);
    g.add_generator({to_string(chi), v.value, v.exact});
  }
  return g;
}

auto finite_label_group(const FiniteCyclicSystem &system) -> LabelGroup {
  const auto p = static_cast<std::int64_t>(system.support().size());
  return LabelGroup::rational(p, fmt::format("ergodic orbit of size {}", p));
}

auto finite_rhs_group(std::int64_t modulus, std::int64_t multiplier, std::int64_t shift)
    -> LabelGroup {
  if (modulus < 1) throw std::invalid_argument("finite_rhs_group: p must be >= 1");
  const auto a = ((multiplier % modulus) + modulus) % modulus;
  if (modulus > 1 && std::gcd(a, modulus) != 1)
    throw std::invalid_argument("finite_rhs_group: A must be a unit mod p");
  const auto b = ((shift % modulus) + modulus) % modulus;
  LabelGroup g = LabelGroup::integers();
  for (std::int64_t m = 1; m < modulus; ++m) {
    if ((static_cast<detail::Wide>(a - 1) * m) % modulus != 0) continue;
    const auto num = static_cast<std::int64_t>((static_cast<detail::Wide>(m) * b) % modulus);
    const Rational v = Rational::make(num, modulus);
    g.add_generator({fmt::format("m={} (mod {})", m, modulus), v.to_double(), v});
  }
  return g;
}

auto solenoid_fixed_dual() -> LatticeBasis { return LatticeBasis{1, {}}; }

auto fixed_dyadic_characters(std::int64_t max_numerator, unsigned max_exponent)
    -> std::vector<DyadicRational> {
  std::vector<DyadicRational> fixed;
  for (unsigned n = 0; n <= max_exponent; ++n)
    for (std::int64_t k = -max_numerator; k <= max_numerator; ++k) {
      const DyadicRational a{k, n};
      if (a.normalized().numerator != 0 && a.doubled() == a) fixed.push_back(a);
    }
  return fixed;
}

auto solenoid_label_group() -> LabelGroup {
  // the only character with 2a = a is a = 0, contributing Z
  LabelGroup g = LabelGroup::integers();
  if (!solenoid_fixed_dual().empty())
    throw std::logic_error("solenoid dual has a nontrivial fixed character");
  return g;
}

auto label_group(const DynamicalSystem &system) -> LabelGroup {
  return std::visit(overloaded{
                        [](const TorusAffineSystem &s) { return label_group(s); },
                        [](const FiniteCyclicSystem &s) { return finite_label_group(s); },
                        [](const CircleDoublingSystem &) { return solenoid_label_group(); },
                        [](const SolenoidDoublingSystem &) { return solenoid_label_group(); },
                    },
                    system);
}

// ------------------------------------------------------------ membership

auto to_string(Membership m) -> std::string {
  switch (m) {
  case Membership::Member: return "member";
  case Membership::NonMember: return "non_member";
  case Membership::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

auto contains(const LabelGroup &group, double x, double tol, std::int64_t coeff_bound)
    -> MembershipVerdict {
  if (!(tol > 0.0)) throw std::invalid_argument("contains: tol must be positive");
  if (coeff_bound < 1) throw std::invalid_argument("contains: coeff_bound must be >= 1");
  const auto &gens = group.irrational_generators();
  const auto q = static_cast<double>(group.denominator());
  const std::size_t k = gens.size();
  const double side = 2.0 * static_cast<double>(coeff_bound) + 1.0;
  if (std::pow(side, static_cast<double>(k)) > 5e7)
    throw std::invalid_argument("contains: coefficient search space too large");

  std::vector<std::int64_t> coeffs(k, -coeff_bound);
  std::vector<std::int64_t> best;
  double best_residual = std::numeric_limits<double>::infinity();
  std::int64_t best_l1 = std::numeric_limits<std::int64_t>::max();
  for (;;) {
    double rest = x;
    std::int64_t l1 = 0;
    for (std::size_t i = 0; i < k; ++i) {
      rest -= static_cast<double>(coeffs[i]) * gens[i];
      l1 += std::abs(coeffs[i]);
    }
    const auto c0 = static_cast<std::int64_t>(std::llround(rest * q));
    const double residual = std::abs(rest - static_cast<double>(c0) / q);
    l1 += std::abs(c0);
    if (residual < best_residual - 1e-15 ||
        (std::abs(residual - best_residual) <= 1e-15 && l1 < best_l1)) {
      best_residual = residual;
      best_l1 = l1;
      best.assign(1, c0);
      best.insert(best.end(), coeffs.begin(), coeffs.end());
    }
    // odometer over [-B, B]^k
    std::size_t i = 0;
    while (i < k && coeffs[i] == coeff_bound) coeffs[i++] = -coeff_bound;
    if (i == k) break;
    ++coeffs[i];
  }

  MembershipVerdict v;
  v.residual = best_residual;
  if (best_residual < tol) {
    v.kind = Membership::Member;
    v.witness = std::move(best);
  } else {
    v.kind = group.is_discrete() ? Membership::NonMember : Membership::Inconclusive;
  }
  return v;
}

// ------------------------------------------------- suspension observables

SuspensionObservable::SuspensionObservable(const DynamicalSystem &system,
                                           CharacterVector chi, double beta)
    : system_(system), chi_(std::move(chi)), beta_(beta) {
  if (!is_fixed(chi_, system_))
    throw std::invalid_argument("SuspensionObservable: character " + to_string(chi_) +
                                " is not fixed by the dual automorphism");
  const double offset = beta_ - value_at_translation(chi_, system_).value;
  if (std::abs(wrap_half(offset)) > 1e-9)
    throw std::invalid_argument(fmt::format(
        "SuspensionObservable: beta = {} is not congruent to chi(b) mod 1", beta_));
}

auto SuspensionObservable::operator()(const Point &w, double s) const -> double {
  return wrap_unit(evaluate(chi_, system_, w) + beta_ * s);
}

auto SuspensionObservable::as_function() const -> CircleObservable {
  return [self = *this](const Point &w, double s) { return self(w, s); };
}

auto schwartzman_estimate(const DynamicalSystem &system, const CircleObservable &observable,
                          const Point &w, EstimatorOptions options) -> double {
  if (!is_invertible(system))
    throw NonInvertibleSystem("schwartzman_estimate: the suspension needs an invertible map");
  if (!(options.dt > 0.0) || !(options.t_max > options.dt))
    throw std::invalid_argument("schwartzman_estimate: need 0 < dt < t_max");
  validate_point(system, w);

  const auto steps = static_cast<std::int64_t>(std::llround(options.t_max / options.dt));
  Point current = w;
  std::int64_t current_floor = 0;
  auto phase = [&](double t) {
    const auto n = static_cast<std::int64_t>(std::floor(t));
    while (current_floor < n) {
      current = step(system, current);
      ++current_floor;
    }
    return observable(current, t - static_cast<double>(n));
  };

  double lift = 0.0;
  double previous = phase(0.0);
  for (std::int64_t k = 1; k <= steps; ++k) {
    const double mid = phase((static_cast<double>(k) - 0.5) * options.dt);
    const double next = phase(static_cast<double>(k) * options.dt);
    const double full = wrap_half(next - previous);
    const double halves = wrap_half(mid - previous) + wrap_half(next - mid);
    // the half-step refinement disagrees exactly when the true increment is
    // at least 1/2 in size
    if (std::abs(full) >= 0.5 - 1e-12 || std::abs(halves - full) > 1e-9)
      throw UnwrapAmbiguity(fmt::format(
          "phase increment near t = {} cannot be unwrapped; reduce dt (now {})",
          static_cast<double>(k) * options.dt, options.dt));
    lift += full;
    previous = next;
  }
  return lift / (static_cast<double>(steps) * options.dt);
}

} // namespace gaplabel
