#pragma once

// Finite sections of ergodic Jacobi operators
//
//     (J u)(n) = p(T^{n-1} w) u(n-1) + q(T^n w) u(n) + p(T^n w) u(n+1),
//
// their eigenvalue counts, integrated density of states, gaps and gap labels.

#include "gaplabel/schwartzman.hpp"
#include "gaplabel/systems.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gaplabel {

/// amplitude * cos(2 pi (chi(w) + phase)).
struct CosineTerm {
  CharacterVector character;
  double amplitude = 1.0;
  double phase = 0.0;
};

/// constant + sum of cosine terms.
struct TrigPolynomial {
  double constant = 0.0;
  std::vector<CosineTerm> terms;
};

/// coefficient * exp(2 pi i chi(w)).
struct ExponentialTerm {
  CharacterVector character;
  std::complex<double> coefficient{1.0, 0.0};
};

/// constant + sum of exponential terms.
struct ExpPolynomial {
  std::complex<double> constant{0.0, 0.0};
  std::vector<ExponentialTerm> terms;
};

/// Values on the residues of a finite system; must cover its support.
template <typename T> struct ResidueTable {
  std::map<std::int64_t, T> values;
};

using RealObservable = std::variant<TrigPolynomial, ResidueTable<double>>;
using ComplexObservable = std::variant<ExpPolynomial, ResidueTable<std::complex<double>>>;

/// Diagonal q and off-diagonal p. Defaults to the free Laplacian q = 0, p = 1.
struct CoefficientSpec {
  RealObservable q = TrigPolynomial{};
  ComplexObservable p = ExpPolynomial{{1.0, 0.0}, {}};
};

auto evaluate(const RealObservable &q, const DynamicalSystem &system, const Point &w)
    -> double;
auto evaluate(const ComplexObservable &p, const DynamicalSystem &system, const Point &w)
    -> std::complex<double>;

/// Throws InvalidObservable when a term does not fit the system, a table misses
/// a support residue, or a coefficient is not finite.
void validate_spec(const DynamicalSystem &system, const CoefficientSpec &spec);

enum class Boundary { Auto, WholeLineWindow, HalfLine };

auto to_string(Boundary b) -> std::string;

/// Real symmetric tridiagonal matrix with nonnegative off-diagonals.
class JacobiTruncation {
public:
  /// Throws std::invalid_argument unless offdiagonal has size N-1, N >= 1, all
  /// entries are finite and off-diagonals are nonnegative.
  JacobiTruncation(std::vector<double> diagonal, std::vector<double> offdiagonal,
                   Boundary boundary = Boundary::HalfLine,
                   std::vector<std::complex<double>> hopping = {});

  [[nodiscard]] auto size() const -> std::size_t { return diagonal_.size(); }
  [[nodiscard]] auto diagonal() const -> const std::vector<double> & { return diagonal_; }
  [[nodiscard]] auto offdiagonal() const -> const std::vector<double> & {
    return offdiagonal_;
  }
  /// The complex off-diagonal before gauge reduction (empty if built from reals).
  [[nodiscard]] auto hopping() const -> const std::vector<std::complex<double>> & {
    return hopping_;
  }
  [[nodiscard]] auto boundary() const -> Boundary { return boundary_; }
  /// Squared off-diagonals and the smallest admissible pivot of the Sturm recurrence.
  [[nodiscard]] auto offdiagonal_squared() const -> const std::vector<double> & {
    return offdiag_sq_;
  }
  [[nodiscard]] auto pivmin() const -> double { return pivmin_; }
  /// Gershgorin interval containing every eigenvalue.
  [[nodiscard]] auto gershgorin() const -> std::pair<double, double>;

private:
  std::vector<double> diagonal_;
  std::vector<double> offdiagonal_;
  std::vector<std::complex<double>> hopping_;
  Boundary boundary_;
  std::vector<double> offdiag_sq_;
  double pivmin_ = 0.0;
};

/// Samples q and |p| along the orbit of w. Whole-line windows cover the sites
/// -N/2 .. N/2 - 1 and need an invertible system; half-line sections cover
/// 0 .. N-1. Auto picks the window for invertible systems.
auto build_truncation(const DynamicalSystem &system, const CoefficientSpec &spec,
                      const Point &w, std::size_t n, Boundary boundary = Boundary::Auto)
    -> JacobiTruncation;

/// #{eigenvalues <= E} from the LDL^T inertia of J - E. The matrix is split
/// into blocks at zero off-diagonals; a pivot smaller than pivmin() in
/// magnitude is replaced by -pivmin().
auto eig_count_leq(const JacobiTruncation &t, double energy) -> std::size_t;

/// All eigenvalues in ascending order, by bisection to absolute width `tol`.
auto eigenvalues(const JacobiTruncation &t, double tol = 1e-10) -> std::vector<double>;

/// eig_count_leq / N.
auto ids(const JacobiTruncation &t, double energy) -> double;

struct Gap {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count_below = 0; // eigenvalues <= lower
  double label = 0.0;          // count_below / N

  [[nodiscard]] auto width() const -> double { return upper - lower; }
};

/// Spacings wider than min_width between consecutive eigenvalues. Throws
/// std::invalid_argument unless min_width > 0.
auto detect_gaps(const std::vector<double> &eigs, double min_width) -> std::vector<Gap>;

/// 20 * (hull width) / N.
auto default_min_width(const std::vector<double> &eigs) -> double;

struct LabelledGap {
  Gap gap;
  MembershipVerdict verdict;
};

struct ReportParameters {
  std::size_t n = 0;
  std::vector<std::uint64_t> seeds;
  Boundary boundary = Boundary::Auto;
  double eigen_tol = 1e-10;
  double min_width = 0.0;
  double label_tol = 0.0;
  std::int64_t coeff_bound = 10;
};

struct SpectralReport {
  std::vector<double> eigenvalues;
  std::vector<LabelledGap> gaps;
  LabelGroup group;
  ReportParameters parameters;

  [[nodiscard]] auto to_json(bool include_eigenvalues = true) const -> nlohmann::json;
};

/// Annotates every gap with its membership verdict in G.
auto verify_labels(std::vector<double> eigs, const std::vector<Gap> &gaps,
                   const LabelGroup &group, double tol, std::int64_t coeff_bound,
                   ReportParameters parameters = {}) -> SpectralReport;

struct AnalysisOptions {
  std::size_t n = 1000;
  Boundary boundary = Boundary::Auto;
  double eigen_tol = 1e-10;
  std::optional<double> min_width; // default_min_width when empty
  std::optional<double> label_tol; // 5/N when empty
  std::int64_t coeff_bound = 10;
};

/// Truncation, spectrum, gaps and verified labels for one orbit sample.
auto analyze_spectrum(const DynamicalSystem &system, const CoefficientSpec &spec,
                      const Point &w, const LabelGroup &group,
                      const AnalysisOptions &options) -> SpectralReport;

/// (E, k(E)) samples on `points` equally spaced energies spanning [lo, hi].
auto ids_curve(const JacobiTruncation &t, double lo, double hi, std::size_t points)
    -> std::vector<std::pair<double, double>>;

/// "E,k(E)" header followed by one row per sample.
auto ids_csv(const std::vector<std::pair<double, double>> &curve) -> std::string;

enum class CandidateStatus { Persistent, Spurious };

auto to_string(CandidateStatus s) -> std::string;

struct GapObservation {
  std::size_t n = 0;
  Gap gap;
};

struct GapCandidate {
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::vector<GapObservation> track; // one entry per N reached
  CandidateStatus status = CandidateStatus::Spurious;
  std::string reason;
  double extrapolated_width = 0.0;
  MembershipVerdict verdict; // label at the largest N against the label group
  bool contradiction = false;
};

struct ScanOptions {
  std::vector<std::size_t> n_schedule{1000, 2000, 4000};
  std::size_t samples = 3;
  std::uint64_t seed = 1;
  Boundary boundary = Boundary::Auto;
  std::optional<double> min_width; // default_min_width at the smallest N
  double label_tol_factor = 5.0;   // tolerance factor / N
  std::int64_t coeff_bound = 10;
  double eigen_tol = 1e-10;
};

struct ScanReport {
  LabelGroup group;
  double min_width = 0.0;
  ScanOptions options;
  std::vector<GapCandidate> candidates;

  [[nodiscard]] auto persistent_count() const -> std::size_t;
  [[nodiscard]] auto contradiction() const -> bool;
  [[nodiscard]] auto to_json() const -> nlohmann::json;
};

/// Tracks gap candidates across the N schedule for several orbit samples.
/// A candidate that disappears, whose width extrapolates to below half of
/// min_width as N grows, or whose label drifts by more than
/// tol(N_0) + tol(N_j) is SPURIOUS; the rest are PERSISTENT. A PERSISTENT
/// candidate whose label is a non-member of a discrete label group is a
/// contradiction.
auto connectedness_scan(const DynamicalSystem &system, const CoefficientSpec &spec,
                        const ScanOptions &options) -> ScanReport;

} // namespace gaplabel
