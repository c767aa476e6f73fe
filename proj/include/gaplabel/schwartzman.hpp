#pragma once

// Label groups of affine automorphisms and numerical Schwartzman winding rates.
//
// For T(w) = A w + b on a compact connected abelian group the label group is
//
//     union over characters chi with chi o A = chi of  { beta : beta = chi(b) mod 1 },
//
// i.e. Z + sum_i Z chi_i(b) for a basis chi_i of the fixed character lattice.
// On finite Z/pZ with an ergodic orbit of size p the group is (1/p)Z instead.

#include "gaplabel/intlin.hpp"
#include "gaplabel/solenoid.hpp"
#include "gaplabel/systems.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gaplabel {

/// Torus character w -> m . w mod 1 (also the circle, d = 1).
struct TorusCharacter {
  IntVector m;
};

/// Character of Z/pZ: w -> m w / p mod 1.
struct ResidueCharacter {
  std::int64_t m = 0;
};

/// Characters of the supported groups; solenoid characters are dyadic rationals.
using CharacterVector = std::variant<TorusCharacter, ResidueCharacter, DyadicRational>;

auto to_string(const CharacterVector &chi) -> std::string;

/// chi(w) in [0,1). Throws InvalidObservable when chi does not fit the system.
auto evaluate(const CharacterVector &chi, const DynamicalSystem &system,
              const Point &w) -> double;

/// chi o A = chi, i.e. chi is fixed by the dual automorphism.
auto is_fixed(const CharacterVector &chi, const DynamicalSystem &system) -> bool;

/// chi(b) for the translation part b; exact when b is exact on the support of chi.
struct CharacterValue {
  double value = 0.0; // in [0,1)
  std::optional<Rational> exact;
};
auto value_at_translation(const CharacterVector &chi, const DynamicalSystem &system)
    -> CharacterValue;

/// Which character produced which generator.
struct GeneratorCertificate {
  std::string character;
  double value = 0.0;
  std::optional<Rational> exact;
};

/// Subgroup (1/Q) Z + Z g_1 + ... + Z g_k of the reals. Always contains Z.
class LabelGroup {
public:
  /// The integers, certified by the trivial character.
  static auto integers() -> LabelGroup;
  /// (1/q) Z with a single free-text certificate.
  static auto rational(std::int64_t q, std::string certificate) -> LabelGroup;

  /// Adds the generator chi(b); exact values fold into the denominator Q.
  void add_generator(const GeneratorCertificate &certificate);

  [[nodiscard]] auto denominator() const -> std::int64_t { return denominator_; }
  [[nodiscard]] auto irrational_generators() const -> const std::vector<double> & {
    return irrational_;
  }
  [[nodiscard]] auto provenance() const -> const std::vector<GeneratorCertificate> & {
    return provenance_;
  }
  /// Discrete iff every generator is rational: the group is then (1/Q) Z.
  [[nodiscard]] auto is_discrete() const -> bool { return irrational_.empty(); }
  [[nodiscard]] auto rational_collapse() const -> std::optional<std::int64_t>;
  /// Z-module generators: 1/Q followed by the irrational generators.
  [[nodiscard]] auto generators() const -> std::vector<double>;
  [[nodiscard]] auto to_string() const -> std::string;
  [[nodiscard]] auto to_json() const -> nlohmann::json;

private:
  std::int64_t denominator_ = 1;
  std::vector<double> irrational_;
  std::vector<GeneratorCertificate> provenance_;
};

/// Basis of { m in Z^d : A^T m = m } (the characters fixed by the dual map).
auto fixed_character_lattice(const TorusAffineSystem &system) -> LatticeBasis;

/// Z + sum_i Z (m_i . b) over a basis m_i of the fixed character lattice.
auto label_group(const TorusAffineSystem &system) -> LabelGroup;

/// (1/#support) Z: the group of a finite system with an ergodic orbit.
auto finite_label_group(const FiniteCyclicSystem &system) -> LabelGroup;

/// Union over residues m with A m = m (mod p) of the preimages of m b / p.
/// This is what the affine formula would predict on the disconnected group Z/pZ.
auto finite_rhs_group(std::int64_t modulus, std::int64_t multiplier, std::int64_t shift)
    -> LabelGroup;

/// Fixed part of the dual of the solenoid under a -> 2a: always trivial.
auto solenoid_fixed_dual() -> LatticeBasis;

/// Nonzero dyadic rationals k/2^n, |k| <= max_numerator, n <= max_exponent, with 2a = a.
auto fixed_dyadic_characters(std::int64_t max_numerator, unsigned max_exponent)
    -> std::vector<DyadicRational>;

/// Z, certified by the trivial fixed dual of the solenoid.
auto solenoid_label_group() -> LabelGroup;

/// Label group appropriate to any supported system. The circle doubling map
/// uses the group of its invertible extension, the solenoid.
auto label_group(const DynamicalSystem &system) -> LabelGroup;

enum class Membership { Member, NonMember, Inconclusive };

auto to_string(Membership m) -> std::string;

struct MembershipVerdict {
  Membership kind = Membership::Inconclusive;
  /// x ~ witness[0] / Q + sum_i witness[i] g_i (empty unless Member).
  std::vector<std::int64_t> witness;
  /// Distance from x to the best combination found.
  double residual = 0.0;
};

/// Membership of x in G. Discrete groups are decided exactly up to tol;
/// dense groups are searched over |c_i| <= coeff_bound and can only report
/// Member or Inconclusive.
auto contains(const LabelGroup &group, double x, double tol, std::int64_t coeff_bound)
    -> MembershipVerdict;

/// A continuous map from the suspension to the circle, as (w, s) -> value mod 1
/// for the point [w, s], s in [0,1).
using CircleObservable = std::function<double(const Point &, double)>;

/// g([w, t]) = chi(w) + beta t mod 1, well defined when beta = chi(b) mod 1.
class SuspensionObservable {
public:
  /// Throws std::invalid_argument unless chi is fixed and beta - chi(b) is an
  /// integer within 1e-9.
  SuspensionObservable(const DynamicalSystem &system, CharacterVector chi, double beta);

  [[nodiscard]] auto character() const -> const CharacterVector & { return chi_; }
  [[nodiscard]] auto winding() const -> double { return beta_; }
  [[nodiscard]] auto operator()(const Point &w, double s) const -> double;
  [[nodiscard]] auto as_function() const -> CircleObservable;

private:
  DynamicalSystem system_;
  CharacterVector chi_;
  double beta_;
};

struct EstimatorOptions {
  double t_max = 1000.0;
  double dt = 0.01;
};

/// Winding rate lift(T)/T of the observable along the suspension orbit of
/// [w, 0]. Throws UnwrapAmbiguity when a sampled phase increment is not
/// resolvable (reduce dt), NonInvertibleSystem for the circle doubling map.
auto schwartzman_estimate(const DynamicalSystem &system, const CircleObservable &observable,
                          const Point &w, EstimatorOptions options = {}) -> double;

} // namespace gaplabel
