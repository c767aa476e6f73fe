#include "gaplabel/jacobi.hpp"

#include "gaplabel/detail/overloaded.hpp"
#include "gaplabel/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace gaplabel {

namespace {

using detail::overloaded;

constexpr double two_pi = 2.0 * std::numbers::pi;

template <typename T>
auto table_lookup(const ResidueTable<T> &table, const DynamicalSystem &system,
                  const Point &w) -> T {
  const auto *r = std::get_if<Residue>(&w);
  if (!std::holds_alternative<FiniteCyclicSystem>(system) || r == nullptr)
    throw InvalidObservable("residue tables need a finite cyclic system");
  const auto it = table.values.find(r->value);
  if (it == table.values.end())
    throw InvalidObservable(fmt::format("residue table has no value for {}", r->value));
  return it->second;
}

void require_finite(double x, const char *what) {
  if (!std::isfinite(x)) throw InvalidObservable(fmt::format("{} is not finite", what));
}

auto resolve(Boundary boundary, const DynamicalSystem &system) -> Boundary {
  if (boundary == Boundary::Auto)
    return is_invertible(system) ? Boundary::WholeLineWindow : Boundary::HalfLine;
  if (boundary == Boundary::WholeLineWindow && !is_invertible(system))
    throw NonInvertibleSystem(
        "whole-line operators need an invertible map; use the half-line section");
  return boundary;
}

/// Inertia count of rows [lo, hi) of J - E, ignoring the coupling to row lo - 1.
auto count_block(const JacobiTruncation &t, std::size_t lo, std::size_t hi, double energy)
    -> std::size_t {
  const auto &a = t.diagonal();
  const auto &b2 = t.offdiagonal_squared();
  const double pivmin = t.pivmin();
  std::size_t count = 0;
  double d = 1.0;
  for (std::size_t i = lo; i < hi; ++i) {
    d = (a[i] - energy) - (i == lo ? 0.0 : b2[i - 1] / d);
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

/// Maximal index ranges with nonzero coupling inside.
auto blocks(const JacobiTruncation &t) -> std::vector<std::pair<std::size_t, std::size_t>> {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t.offdiagonal()[i] == 0.0) {
      out.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  out.emplace_back(start, t.size());
  return out;
}

void bisect_block(const JacobiTruncation &t, std::size_t lo, std::size_t hi, double tol,
                  std::vector<double> &out) {
  const auto &a = t.diagonal();
  const auto &b = t.offdiagonal();
  double gl = INFINITY;
  double gu = -INFINITY;
  for (std::size_t i = lo; i < hi; ++i) {
    double radius = 0.0;
    if (i > lo) radius += b[i - 1];
    if (i + 1 < hi) radius += b[i];
    gl = std::min(gl, a[i] - radius);
    gu = std::max(gu, a[i] + radius);
  }
  const double slack =
      2.0 * DBL_EPSILON * std::max(std::abs(gl), std::abs(gu)) * static_cast<double>(hi - lo) +
      2.0 * t.pivmin();
  gl -= slack;
  gu += slack;

  struct Interval {
    double lower, upper;
    std::size_t count_lower, count_upper;
  };
  // depth-first, left intervals first, so eigenvalues come out sorted
  std::vector<Interval> stack{{gl, gu, 0, hi - lo}};
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    const std::size_t inside = iv.count_upper - iv.count_lower;
    if (inside == 0) continue;
    const double mid = 0.5 * (iv.lower + iv.upper);
    if (iv.upper - iv.lower <= tol || mid <= iv.lower || mid >= iv.upper) {
      out.insert(out.end(), inside, mid);
      continue;
    }
    const std::size_t c = count_block(t, lo, hi, mid);
    stack.push_back({mid, iv.upper, c, iv.count_upper});
    stack.push_back({iv.lower, mid, iv.count_lower, c});
  }
}

auto format_number(double x) -> std::string { return fmt::format("{:.12g}", x); }

} // namespace

// ------------------------------------------------------------ observables

auto evaluate(const RealObservable &q, const DynamicalSystem &system, const Point &w)
    -> double {
  return std::visit(overloaded{
                        [&](const TrigPolynomial &poly) {
                          double v = poly.constant;
                          for (const auto &term : poly.terms)
                            v += term.amplitude *
                                 std::cos(two_pi * (evaluate(term.character, system, w) +
                                                    term.phase));
                          return v;
                        },
                        [&](const ResidueTable<double> &table) {
                          return table_lookup(table, system, w);
                        },
                    },
                    q);
}

auto evaluate(const ComplexObservable &p, const DynamicalSystem &system, const Point &w)
    -> std::complex<double> {
  return std::visit(overloaded{
                        [&](const ExpPolynomial &poly) {
                          std::complex<double> v = poly.constant;
                          for (const auto &term : poly.terms)
                            v += term.coefficient *
                                 std::polar(1.0, two_pi * evaluate(term.character, system, w));
                          return v;
                        },
                        [&](const ResidueTable<std::complex<double>> &table) {
                          return table_lookup(table, system, w);
                        },
                    },
                    p);
}

void validate_spec(const DynamicalSystem &system, const CoefficientSpec &spec) {
  std::visit(overloaded{
                 [](const TrigPolynomial &poly) {
                   require_finite(poly.constant, "q constant");
                   for (const auto &t : poly.terms) {
                     require_finite(t.amplitude, "q amplitude");
                     require_finite(t.phase, "q phase");
                   }
                 },
                 [](const ResidueTable<double> &table) {
                   for (const auto &[k, v] : table.values) require_finite(v, "q table value");
                 },
             },
             spec.q);
  std::visit(overloaded{
                 [](const ExpPolynomial &poly) {
                   require_finite(std::abs(poly.constant), "p constant");
                   for (const auto &t : poly.terms)
                     require_finite(std::abs(t.coefficient), "p coefficient");
                 },
                 [](const ResidueTable<std::complex<double>> &table) {
                   for (const auto &[k, v] : table.values)
                     require_finite(std::abs(v), "p table value");
                 },
             },
             spec.p);

  // evaluation checks that every character and table fits the system
  std::vector<Point> probes;
  if (const auto *f = std::get_if<FiniteCyclicSystem>(&system)) {
    for (auto r : f->support()) probes.emplace_back(Residue{r});
  } else {
    probes.push_back(sample_ergodic(system, 0));
  }
  for (const auto &w : probes) {
    require_finite(evaluate(spec.q, system, w), "q value");
    require_finite(std::abs(evaluate(spec.p, system, w)), "p value");
  }
}

auto to_string(Boundary b) -> std::string {
  switch (b) {
  case Boundary::Auto: return "auto";
  case Boundary::WholeLineWindow: return "whole_line_window";
  case Boundary::HalfLine: return "half_line";
  }
  return "unknown";
}

// ------------------------------------------------------- JacobiTruncation

JacobiTruncation::JacobiTruncation(std::vector<double> diagonal,
                                   std::vector<double> offdiagonal, Boundary boundary,
                                   std::vector<std::complex<double>> hopping)
    : diagonal_(std::move(diagonal)), offdiagonal_(std::move(offdiagonal)),
      hopping_(std::move(hopping)), boundary_(boundary) {
  if (diagonal_.empty()) throw std::invalid_argument("JacobiTruncation: N must be >= 1");
  if (offdiagonal_.size() + 1 != diagonal_.size())
    throw std::invalid_argument("JacobiTruncation: need N - 1 off-diagonal entries");
  if (!hopping_.empty() && hopping_.size() != offdiagonal_.size())
    throw std::invalid_argument("JacobiTruncation: hopping size mismatch");
  for (double a : diagonal_)
    if (!std::isfinite(a)) throw std::invalid_argument("JacobiTruncation: non-finite diagonal");
  double max_b2 = 0.0;
  offdiag_sq_.reserve(offdiagonal_.size());
  for (double b : offdiagonal_) {
    if (!std::isfinite(b) || b < 0.0)
      throw std::invalid_argument("JacobiTruncation: off-diagonals must be finite and >= 0");
    offdiag_sq_.push_back(b * b);
    max_b2 = std::max(max_b2, b * b);
  }
  pivmin_ = DBL_MIN * std::max(1.0, max_b2);
}

auto JacobiTruncation::gershgorin() const -> std::pair<double, double> {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = 0; i < size(); ++i) {
    double radius = 0.0;
    if (i > 0) radius += offdiagonal_[i - 1];
    if (i + 1 < size()) radius += offdiagonal_[i];
    lo = std::min(lo, diagonal_[i] - radius);
    hi = std::max(hi, diagonal_[i] + radius);
  }
  return {lo, hi};
}

auto build_truncation(const DynamicalSystem &system, const CoefficientSpec &spec,
                      const Point &w, std::size_t n, Boundary boundary) -> JacobiTruncation {
  if (n < 2) throw std::invalid_argument("build_truncation: N must be >= 2");
  validate_point(system, w);
  validate_spec(system, spec);
  const Boundary resolved = resolve(boundary, system);
  if (const auto *x = std::get_if<BinaryFraction>(&w); x && x->precision() < n + 52)
    throw InsufficientHistory(fmt::format(
        "the base point carries {} binary digits, an orbit of length {} needs {}",
        x->precision(), n, n + 52));

  Point current = w;
  if (resolved == Boundary::WholeLineWindow)
    for (std::size_t k = 0; k < n / 2; ++k) current = step_inverse(system, current);

  std::vector<double> diag(n);
  std::vector<double> offdiag(n - 1);
  std::vector<std::complex<double>> hopping(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    diag[k] = evaluate(spec.q, system, current);
    if (k + 1 < n) {
      hopping[k] = evaluate(spec.p, system, current);
      offdiag[k] = std::abs(hopping[k]);
      current = step(system, current);
    }
  }
  return {std::move(diag), std::move(offdiag), resolved, std::move(hopping)};
}

// -------------------------------------------------------------- spectrum

auto eig_count_leq(const JacobiTruncation &t, double energy) -> std::size_t {
  std::size_t count = 0;
  for (const auto &[lo, hi] : blocks(t)) count += count_block(t, lo, hi, energy);
  return count;
}

auto eigenvalues(const JacobiTruncation &t, double tol) -> std::vector<double> {
  if (!(tol > 0.0)) throw std::invalid_argument("eigenvalues: tol must be positive");
  std::vector<double> out;
  out.reserve(t.size());
  for (const auto &[lo, hi] : blocks(t)) bisect_block(t, lo, hi, tol, out);
  std::sort(out.begin(), out.end());
  return out;
}

auto ids(const JacobiTruncation &t, double energy) -> double {
  return static_cast<double>(eig_count_leq(t, energy)) / static_cast<double>(t.size());
}

auto detect_gaps(const std::vector<double> &eigs, double min_width) -> std::vector<Gap> {
  if (!(min_width > 0.0)) throw std::invalid_argument("detect_gaps: min_width must be > 0");
  std::vector<Gap> gaps;
  const auto n = static_cast<double>(eigs.size());
  for (std::size_t i = 0; i + 1 < eigs.size(); ++i) {
    if (eigs[i + 1] - eigs[i] > min_width)
      gaps.push_back({eigs[i], eigs[i + 1], i + 1, static_cast<double>(i + 1) / n});
  }
  return gaps;
}

auto default_min_width(const std::vector<double> &eigs) -> double {
  if (eigs.size() < 2) throw std::invalid_argument("default_min_width: need two eigenvalues");
  const double hull = eigs.back() - eigs.front();
  const double w = 20.0 * hull / static_cast<double>(eigs.size());
  return w > 0.0 ? w : DBL_MIN;
}

// ---------------------------------------------------------------- labels

auto SpectralReport::to_json(bool include_eigenvalues) const -> nlohmann::json {
  nlohmann::json j;
  j["parameters"] = {
      {"n", parameters.n},
      {"seeds", parameters.seeds},
      {"boundary", to_string(parameters.boundary)},
      {"eigenvalue_tolerance", parameters.eigen_tol},
      {"min_width", parameters.min_width},
      {"label_tolerance", parameters.label_tol},
      {"coefficient_bound", parameters.coeff_bound},
  };
  j["group"] = group.to_json();
  j["eigenvalue_count"] = eigenvalues.size();
  if (include_eigenvalues) j["eigenvalues"] = eigenvalues;
  auto &arr = j["gaps"] = nlohmann::json::array();
  for (const auto &g : gaps) {
    arr.push_back({
        {"lower", g.gap.lower},
        {"upper", g.gap.upper},
        {"width", g.gap.width()},
        {"energy_tolerance", parameters.eigen_tol},
        {"count_below", g.gap.count_below},
        {"label", g.gap.label},
        {"label_tolerance", parameters.label_tol},
        {"verdict", to_string(g.verdict.kind)},
        {"witness", g.verdict.witness},
        {"residual", g.verdict.residual},
    });
  }
  return j;
}

auto verify_labels(std::vector<double> eigs, const std::vector<Gap> &gaps,
                   const LabelGroup &group, double tol, std::int64_t coeff_bound,
                   ReportParameters parameters) -> SpectralReport {
  SpectralReport report{std::move(eigs), {}, group, std::move(parameters)};
  report.parameters.label_tol = tol;
  report.parameters.coeff_bound = coeff_bound;
  if (report.parameters.n == 0) report.parameters.n = report.eigenvalues.size();
  report.gaps.reserve(gaps.size());
  for (const auto &g : gaps)
    report.gaps.push_back({g, contains(group, g.label, tol, coeff_bound)});
  return report;
}

auto analyze_spectrum(const DynamicalSystem &system, const CoefficientSpec &spec,
                      const Point &w, const LabelGroup &group,
                      const AnalysisOptions &options) -> SpectralReport {
  const auto t = build_truncation(system, spec, w, options.n, options.boundary);
  auto eigs = eigenvalues(t, options.eigen_tol);
  const double min_width = options.min_width.value_or(default_min_width(eigs));
  const double tol = options.label_tol.value_or(5.0 / static_cast<double>(options.n));
  const auto gaps = detect_gaps(eigs, min_width);
  ReportParameters params;
  params.n = options.n;
  params.boundary = t.boundary();
  params.eigen_tol = options.eigen_tol;
  params.min_width = min_width;
  return verify_labels(std::move(eigs), gaps, group, tol, options.coeff_bound, params);
}

auto ids_curve(const JacobiTruncation &t, double lo, double hi, std::size_t points)
    -> std::vector<std::pair<double, double>> {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("ids_curve: need lo < hi, 2+ points");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double e =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    curve.emplace_back(e, ids(t, e));
  }
  return curve;
}

auto ids_csv(const std::vector<std::pair<double, double>> &curve) -> std::string {
  std::string out = "E,k(E)\n";
  for (const auto &[e, k] : curve) out += format_number(e) + "," + format_number(k) + "\n";
  return out;
}

// ------------------------------------------------------ connectedness scan

auto to_string(CandidateStatus s) -> std::string {
  return s == CandidateStatus::Persistent ? "PERSISTENT" : "SPURIOUS";
}

auto ScanReport::persistent_count() const -> std::size_t {
  return static_cast<std::size_t>(std::count_if(
      candidates.begin(), candidates.end(),
      [](const auto &c) { return c.status == CandidateStatus::Persistent; }));
}

auto ScanReport::contradiction() const -> bool {
  return std::any_of(candidates.begin(), candidates.end(),
                     [](const auto &c) { return c.contradiction; });
}

auto ScanReport::to_json() const -> nlohmann::json {
  nlohmann::json j;
  j["group"] = group.to_json();
  j["min_width"] = min_width;
  j["n_schedule"] = options.n_schedule;
  j["samples"] = options.samples;
  j["seed"] = options.seed;
  j["label_tolerance_factor"] = options.label_tol_factor;
  j["persistent"] = persistent_count();
  j["contradiction"] = contradiction();
  auto &arr = j["candidates"] = nlohmann::json::array();
  for (const auto &c : candidates) {
    nlohmann::json track = nlohmann::json::array();
    for (const auto &o : c.track)
      track.push_back({{"n", o.n},
                       {"lower", o.gap.lower},
                       {"upper", o.gap.upper},
                       {"label", o.gap.label},
                       {"label_tolerance", options.label_tol_factor / static_cast<double>(o.n)}});
    arr.push_back({{"sample", c.sample},
                   {"seed", c.seed},
                   {"status", to_string(c.status)},
                   {"reason", c.reason},
                   {"extrapolated_width", c.extrapolated_width},
                   {"verdict", to_string(c.verdict.kind)},
                   {"witness", c.verdict.witness},
                   {"contradiction", c.contradiction},
                   {"track", std::move(track)}});
  }
  return j;
}

auto connectedness_scan(const DynamicalSystem &system, const CoefficientSpec &spec,
                        const ScanOptions &options) -> ScanReport {
  if (options.n_schedule.empty() || options.samples == 0)
    throw std::invalid_argument("connectedness_scan: empty N schedule or no samples");
  ScanReport report{label_group(system), 0.0, options, {}};
  auto &schedule = report.options.n_schedule;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

  // spectra[s][j]: sample s at N = schedule[j]
  std::vector<std::vector<std::vector<double>>> spectra(options.samples);
  for (std::size_t s = 0; s < options.samples; ++s) {
    const Point w = sample_ergodic(system, options.seed + s);
    for (auto n : schedule)
      spectra[s].push_back(
          eigenvalues(build_truncation(system, spec, w, n, options.boundary), options.eigen_tol));
  }
  report.min_width = options.min_width.value_or(default_min_width(spectra[0][0]));
  const double tolf = options.label_tol_factor;

  for (std::size_t s = 0; s < options.samples; ++s) {
    std::vector<std::vector<Gap>> gaps;
    for (const auto &eigs : spectra[s]) gaps.push_back(detect_gaps(eigs, report.min_width));

    for (const auto &first : gaps[0]) {
      GapCandidate c;
      c.sample = s;
      c.seed = options.seed + s;
      c.track.push_back({schedule[0], first});
      for (std::size_t j = 1; j < schedule.size(); ++j) {
        const Gap &prev = c.track.back().gap;
        const Gap *best = nullptr;
        double best_overlap = 0.0;
        for (const auto &g : gaps[j]) {
          const double overlap = std::min(g.upper, prev.upper) - std::max(g.lower, prev.lower);
          if (overlap > best_overlap) {
            best_overlap = overlap;
            best = &g;
          }
        }
        if (best == nullptr) {
          c.reason = fmt::format("vanished at N = {}", schedule[j]);
          break;
        }
        c.track.push_back({schedule[j], *best});
      }

      // least-squares fit width = w_inf + slope / N
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto &o : c.track) {
        const double x = 1.0 / static_cast<double>(o.n);
        sx += x;
        sy += o.gap.width();
        sxx += x * x;
        sxy += x * o.gap.width();
      }
      const auto m = static_cast<double>(c.track.size());
      const double denom = m * sxx - sx * sx;
      c.extrapolated_width = c.track.size() < 2 || denom <= 0.0
                                 ? sy / m
                                 : (sy * sxx - sx * sxy) / denom;

      if (c.reason.empty() && c.extrapolated_width < 0.5 * report.min_width)
        c.reason = fmt::format("width closes as N grows (extrapolated {:.3g})",
                               c.extrapolated_width);
      if (c.reason.empty()) {
        const double n0 = static_cast<double>(c.track.front().n);
        for (const auto &o : c.track) {
          const double drift = std::abs(o.gap.label - c.track.front().gap.label);
          if (drift > tolf / n0 + tolf / static_cast<double>(o.n)) {
            c.reason = fmt::format("label drifts by {:.3g} at N = {}", drift, o.n);
            break;
          }
        }
      }
      c.status = c.reason.empty() ? CandidateStatus::Persistent : CandidateStatus::Spurious;
      const auto &last = c.track.back();
      c.verdict = contains(report.group, last.gap.label, tolf / static_cast<double>(last.n),
                           options.coeff_bound);
      c.contradiction =
          c.status == CandidateStatus::Persistent && c.verdict.kind == Membership::NonMember;
      report.candidates.push_back(std::move(c));
    }
  }
  return report;
}

} // namespace gaplabel
