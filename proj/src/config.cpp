#include "gaplabel/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace gaplabel {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string &where, const std::string &what) {
  throw ConfigError(fmt::format("{}: {}", where.empty() ? "/" : where, what));
}

/// Object accessor that remembers which keys were consumed.
class Reader {
public:
  Reader(const json &node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) fail(where_, "expected an object");
  }

  [[nodiscard]] auto path(const std::string &key) const -> std::string {
    return where_ + "/" + key;
  }
  [[nodiscard]] auto has(const std::string &key) const -> bool {
    return node_.contains(key) && !node_.at(key).is_null();
  }
  auto get(const std::string &key) -> const json & {
    seen_.insert(key);
    if (!node_.contains(key)) fail(path(key), "required key is missing");
    return node_.at(key);
  }
  auto find(const std::string &key) -> const json * {
    seen_.insert(key);
    return has(key) ? &node_.at(key) : nullptr;
  }
  /// Rejects keys that were never looked at.
  void finish() const {
    for (const auto &item : node_.items())
      if (!seen_.count(item.key())) fail(path(item.key()), "unknown key");
  }

private:
  const json &node_;
  std::string where_;
  std::set<std::string> seen_;
};

auto as_number(const json &v, const std::string &where) -> double {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

auto as_int(const json &v, const std::string &where) -> std::int64_t {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  if (v.is_number_unsigned() &&
      v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    fail(where, "integer out of range");
  return v.get<std::int64_t>();
}

auto as_count(const json &v, const std::string &where, std::int64_t minimum) -> std::size_t {
  const auto k = as_int(v, where);
  if (k < minimum) fail(where, fmt::format("must be >= {}", minimum));
  return static_cast<std::size_t>(k);
}

auto as_seed(const json &v, const std::string &where) -> std::uint64_t {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

auto as_string(const json &v, const std::string &where) -> std::string {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

auto as_positive(const json &v, const std::string &where) -> double {
  const double x = as_number(v, where);
  if (!(x > 0.0)) fail(where, "must be positive");
  return x;
}

auto as_complex(const json &v, const std::string &where) -> std::complex<double> {
  if (v.is_number()) return {as_number(v, where), 0.0};
  if (v.is_array() && v.size() == 2)
    return {as_number(v[0], where + "/0"), as_number(v[1], where + "/1")};
  fail(where, "expected a number or a [re, im] pair");
}

auto parse_translation(const json &v, const std::string &where) -> TranslationCoordinate {
  if (v.is_number()) return TranslationCoordinate::real(as_number(v, where));
  Reader r(v, where);
  const auto num = as_int(r.get("num"), r.path("num"));
  const auto den = as_int(r.get("den"), r.path("den"));
  r.finish();
  if (den == 0) fail(r.path("den"), "zero denominator");
  return TranslationCoordinate::exact(num, den);
}

auto parse_system(const json &v, const std::string &where) -> DynamicalSystem {
  Reader r(v, where);
  const auto kind = as_string(r.get("kind"), r.path("kind"));
  try {
    if (kind == "torus_affine") {
      const auto &rows = r.get("matrix");
      if (!rows.is_array() || rows.empty()) fail(r.path("matrix"), "expected a nonempty array");
      std::vector<std::vector<std::int64_t>> entries;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto at = fmt::format("{}/{}", r.path("matrix"), i);
        if (!rows[i].is_array() || rows[i].size() != rows.size())
          fail(at, "matrix must be square");
        std::vector<std::int64_t> row;
        for (std::size_t j = 0; j < rows[i].size(); ++j)
          row.push_back(as_int(rows[i][j], fmt::format("{}/{}", at, j)));
        entries.push_back(std::move(row));
      }
      const auto &b = r.get("translation");
      if (!b.is_array() || b.size() != rows.size())
        fail(r.path("translation"), "expected one entry per dimension");
      std::vector<TranslationCoordinate> translation;
      for (std::size_t i = 0; i < b.size(); ++i)
        translation.push_back(parse_translation(b[i], fmt::format("{}/{}", r.path("translation"), i)));
      r.finish();
      return TorusAffineSystem(IntMatrix::from_rows(entries), std::move(translation));
    }
    if (kind == "finite_cyclic") {
      const auto p = as_int(r.get("modulus"), r.path("modulus"));
      const auto a = as_int(r.get("multiplier"), r.path("multiplier"));
      const auto b = as_int(r.get("shift"), r.path("shift"));
      const auto &s = r.get("support");
      if (!s.is_array()) fail(r.path("support"), "expected an array of residues");
      std::vector<std::int64_t> support;
      for (std::size_t i = 0; i < s.size(); ++i)
        support.push_back(as_int(s[i], fmt::format("{}/{}", r.path("support"), i)));
      r.finish();
      return FiniteCyclicSystem(p, a, b, std::move(support));
    }
    if (kind == "circle_doubling") {
      CircleDoublingSystem d;
      if (const auto *bits = r.find("sample_bits"))
        d.sample_bits = as_count(*bits, r.path("sample_bits"), 64);
      r.finish();
      return d;
    }
    if (kind == "solenoid_doubling") {
      SolenoidDoublingSystem d;
      if (const auto *prec = r.find("precision"))
        d.precision = as_count(*prec, r.path("precision"), 1);
      r.finish();
      return d;
    }
  } catch (const std::invalid_argument &e) {
    fail(where, e.what());
  }
  fail(r.path("kind"), "unknown system kind '" + kind + "'");
}

auto parse_character(const json &v, const std::string &where, const DynamicalSystem &system)
    -> CharacterVector {
  if (std::holds_alternative<FiniteCyclicSystem>(system))
    return ResidueCharacter{as_int(v, where)};
  if (std::holds_alternative<SolenoidDoublingSystem>(system)) {
    Reader r(v, where);
    const auto k = as_int(r.get("numerator"), r.path("numerator"));
    const auto n = as_count(r.get("exponent"), r.path("exponent"), 0);
    r.finish();
    return DyadicRational{k, static_cast<unsigned>(n)};
  }
  const std::size_t d =
      std::holds_alternative<TorusAffineSystem>(system)
          ? std::get<TorusAffineSystem>(system).dimension()
          : 1;
  if (!v.is_array() || v.size() != d)
    fail(where, fmt::format("expected an integer vector of length {}", d));
  IntVector m;
  for (std::size_t i = 0; i < d; ++i) m.emplace_back(as_int(v[i], fmt::format("{}/{}", where, i)));
  return TorusCharacter{std::move(m)};
}

template <typename T, typename Convert>
auto parse_table(const json &v, const std::string &where, Convert convert) -> ResidueTable<T> {
  if (!v.is_object() || v.empty()) fail(where, "expected a nonempty object of residues");
  ResidueTable<T> table;
  for (const auto &item : v.items()) {
    const auto at = where + "/" + item.key();
    std::size_t used = 0;
    std::int64_t key = 0;
    try {
      key = std::stoll(item.key(), &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != item.key().size()) fail(at, "table keys must be integers");
    table.values[key] = convert(item.value(), at);
  }
  return table;
}

auto parse_q(const json &v, const std::string &where, const DynamicalSystem &system)
    -> RealObservable {
  Reader r(v, where);
  if (const auto *t = r.find("table")) {
    if (r.has("constant") || r.has("terms")) fail(where, "'table' excludes 'constant' and 'terms'");
    auto table = parse_table<double>(*t, r.path("table"), as_number);
    r.finish();
    return table;
  }
  TrigPolynomial poly;
  if (const auto *c = r.find("constant")) poly.constant = as_number(*c, r.path("constant"));
  if (const auto *terms = r.find("terms")) {
    if (!terms->is_array()) fail(r.path("terms"), "expected an array");
    for (std::size_t i = 0; i < terms->size(); ++i) {
      Reader t((*terms)[i], fmt::format("{}/{}", r.path("terms"), i));
      CosineTerm term{parse_character(t.get("character"), t.path("character"), system)};
      if (const auto *a = t.find("amplitude")) term.amplitude = as_number(*a, t.path("amplitude"));
      if (const auto *p = t.find("phase")) term.phase = as_number(*p, t.path("phase"));
      t.finish();
      poly.terms.push_back(std::move(term));
    }
  }
  r.finish();
  return poly;
}

auto parse_p(const json &v, const std::string &where, const DynamicalSystem &system)
    -> ComplexObservable {
  Reader r(v, where);
  if (const auto *t = r.find("table")) {
    if (r.has("constant") || r.has("terms")) fail(where, "'table' excludes 'constant' and 'terms'");
    auto table = parse_table<std::complex<double>>(*t, r.path("table"), as_complex);
    r.finish();
    return table;
  }
  ExpPolynomial poly{{0.0, 0.0}, {}};
  if (const auto *c = r.find("constant")) poly.constant = as_complex(*c, r.path("constant"));
  if (const auto *terms = r.find("terms")) {
    if (!terms->is_array()) fail(r.path("terms"), "expected an array");
    for (std::size_t i = 0; i < terms->size(); ++i) {
      Reader t((*terms)[i], fmt::format("{}/{}", r.path("terms"), i));
      ExponentialTerm term{parse_character(t.get("character"), t.path("character"), system)};
      if (const auto *c = t.find("coefficient"))
        term.coefficient = as_complex(*c, t.path("coefficient"));
      t.finish();
      poly.terms.push_back(std::move(term));
    }
  }
  r.finish();
  return poly;
}

auto parse_boundary(const json &v, const std::string &where) -> Boundary {
  const auto s = as_string(v, where);
  if (s == "auto") return Boundary::Auto;
  if (s == "whole_line_window") return Boundary::WholeLineWindow;
  if (s == "half_line") return Boundary::HalfLine;
  fail(where, "expected one of auto, whole_line_window, half_line");
}

auto parse_sizes(const json &v, const std::string &where) -> std::vector<std::size_t> {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of sizes");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_count(v[i], fmt::format("{}/{}", where, i), 2));
  return out;
}

} // namespace

auto parse_config(const json &document) -> ExperimentConfig {
  Reader root(document, "");
  const auto version = as_int(root.get("schema_version"), "/schema_version");
  if (version != config_schema_version)
    fail("/schema_version", fmt::format("unsupported version {} (expected {})", version,
                                        config_schema_version));

  ExperimentConfig cfg{"", CircleDoublingSystem{}, {}, {}, {}, {}, {}, {}};
  if (const auto *name = root.find("name")) cfg.name = as_string(*name, "/name");
  cfg.system = parse_system(root.get("system"), "/system");

  if (const auto *coeffs = root.find("coefficients")) {
    Reader c(*coeffs, "/coefficients");
    if (const auto *q = c.find("q")) cfg.coefficients.q = parse_q(*q, c.path("q"), cfg.system);
    if (const auto *p = c.find("p")) cfg.coefficients.p = parse_p(*p, c.path("p"), cfg.system);
    c.finish();
  }

  if (const auto *solver = root.find("solver")) {
    Reader s(*solver, "/solver");
    auto &out = cfg.solver;
    if (const auto *n = s.find("n")) out.n = as_count(*n, s.path("n"), 2);
    if (const auto *b = s.find("boundary")) out.boundary = parse_boundary(*b, s.path("boundary"));
    if (const auto *t = s.find("eigen_tolerance")) out.eigen_tol = as_positive(*t, s.path("eigen_tolerance"));
    if (const auto *w = s.find("min_width")) out.min_width = as_positive(*w, s.path("min_width"));
    if (const auto *t = s.find("label_tolerance")) out.label_tol = as_positive(*t, s.path("label_tolerance"));
    if (const auto *b = s.find("coefficient_bound"))
      out.coeff_bound = static_cast<std::int64_t>(as_count(*b, s.path("coefficient_bound"), 1));
    if (const auto *seeds = s.find("seeds")) {
      if (!seeds->is_array() || seeds->empty()) fail(s.path("seeds"), "expected a nonempty array");
      out.seeds.clear();
      for (std::size_t i = 0; i < seeds->size(); ++i)
        out.seeds.push_back(as_seed((*seeds)[i], fmt::format("{}/{}", s.path("seeds"), i)));
    }
    s.finish();
  }

  if (const auto *scan = root.find("scan")) {
    Reader s(*scan, "/scan");
    ScanConfig out;
    if (const auto *n = s.find("n_schedule")) out.n_schedule = parse_sizes(*n, s.path("n_schedule"));
    if (const auto *k = s.find("samples")) out.samples = as_count(*k, s.path("samples"), 1);
    if (const auto *seed = s.find("seed")) out.seed = as_seed(*seed, s.path("seed"));
    if (const auto *w = s.find("min_width")) out.min_width = as_positive(*w, s.path("min_width"));
    s.finish();
    cfg.scan = out;
  }

  if (const auto *est = root.find("estimate")) {
    Reader e(*est, "/estimate");
    EstimateConfig out;
    out.character = parse_character(e.get("character"), e.path("character"), cfg.system);
    out.beta = as_number(e.get("beta"), e.path("beta"));
    if (const auto *t = e.find("t_max")) out.t_max = as_positive(*t, e.path("t_max"));
    if (const auto *dt = e.find("dt")) out.dt = as_positive(*dt, e.path("dt"));
    if (const auto *seed = e.find("seed")) out.seed = as_seed(*seed, e.path("seed"));
    e.finish();
    cfg.estimate = out;
  }

  if (const auto *ids = root.find("ids")) {
    Reader i(*ids, "/ids");
    if (const auto *p = i.find("points")) cfg.ids.points = as_count(*p, i.path("points"), 2);
    if (const auto *lo = i.find("lower")) cfg.ids.lower = as_number(*lo, i.path("lower"));
    if (const auto *hi = i.find("upper")) cfg.ids.upper = as_number(*hi, i.path("upper"));
    i.finish();
    if (cfg.ids.lower && cfg.ids.upper && !(*cfg.ids.upper > *cfg.ids.lower))
      fail("/ids", "upper must exceed lower");
  }

  if (const auto *outputs = root.find("outputs")) {
    Reader o(*outputs, "/outputs");
    if (const auto *d = o.find("dir")) cfg.outputs.dir = as_string(*d, o.path("dir"));
    if (const auto *f = o.find("formats")) {
      if (!f->is_array() || f->empty()) fail(o.path("formats"), "expected a nonempty array");
      cfg.outputs.formats.clear();
      for (std::size_t i = 0; i < f->size(); ++i) {
        const auto at = fmt::format("{}/{}", o.path("formats"), i);
        const auto s = as_string((*f)[i], at);
        if (s != "csv" && s != "json") fail(at, "expected csv or json");
        cfg.outputs.formats.push_back(s);
      }
    }
    o.finish();
  }
  root.finish();

  // the doubling map needs enough binary digits for the longest orbit
  if (auto *d = std::get_if<CircleDoublingSystem>(&cfg.system)) {
    std::size_t longest = cfg.solver.n;
    if (cfg.scan)
      longest = std::max(longest, *std::max_element(cfg.scan->n_schedule.begin(),
                                                    cfg.scan->n_schedule.end()));
    d->sample_bits = std::max(d->sample_bits, longest + 128);
  }

  try {
    validate_spec(cfg.system, cfg.coefficients);
  } catch (const std::invalid_argument &e) {
    fail("/coefficients", e.what());
  }
  if (cfg.estimate) {
    try {
      SuspensionObservable(cfg.system, cfg.estimate->character, cfg.estimate->beta);
    } catch (const std::invalid_argument &e) {
      fail("/estimate", e.what());
    }
  }
  return cfg;
}

auto load_config(const std::string &path) -> ExperimentConfig {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError(fmt::format("{}: not valid JSON: {}", path, e.what()));
  }
  return parse_config(document);
}

} // namespace gaplabel
