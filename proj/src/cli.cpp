#include "gaplabel/cli.hpp"

#include "gaplabel/config.hpp"
#include "gaplabel/errors.hpp"
#include "gaplabel/jacobi.hpp"
#include "gaplabel/schwartzman.hpp"
#include "gaplabel/solenoid.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace gaplabel {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::size_t> n;
  bool quiet = false;
  std::size_t samples = 100; // solenoid-check only
  std::size_t steps = 100;   // solenoid-check only
};

/// Thrown by a stage whose numbers contradict the predicted label group.
struct Contradiction {
  std::string what;
};

void add_common(CLI::App &cmd, CommonOptions &o, bool needs_config) {
  auto *config = cmd.add_option("--config", o.config, "experiment config (JSON)");
  if (needs_config) config->required()->check(CLI::ExistingFile);
  cmd.add_option("--seed", o.seed, "override the orbit seeds with a single seed");
  cmd.add_option("--out-dir", o.out_dir, "directory for report files");
  cmd.add_option("--format", o.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
  cmd.add_option("--n", o.n, "override the truncation size")->check(CLI::Range(2, 1 << 24));
  cmd.add_flag("--quiet", o.quiet, "suppress the summary on stdout");
}

auto load(const CommonOptions &o) -> ExperimentConfig {
  auto cfg = load_config(o.config);
  if (o.seed) {
    cfg.solver.seeds = {*o.seed};
    if (cfg.scan) cfg.scan->seed = *o.seed;
    if (cfg.estimate) cfg.estimate->seed = *o.seed;
  }
  if (o.n) cfg.solver.n = *o.n;
  if (auto *d = std::get_if<CircleDoublingSystem>(&cfg.system))
    d->sample_bits = std::max(d->sample_bits, cfg.solver.n + 128);
  if (o.format) cfg.outputs.formats = {*o.format};
  if (o.out_dir) cfg.outputs.dir = *o.out_dir;
  return cfg;
}

auto wants(const ExperimentConfig &cfg, const std::string &format) -> bool {
  const auto &f = cfg.outputs.formats;
  return std::find(f.begin(), f.end(), format) != f.end();
}

void write_file(const fs::path &path, const std::string &content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

auto dump(const json &j) -> std::string { return j.dump(2) + "\n"; }

auto number(double x) -> std::string { return fmt::format("{:.6f}", x); }

// ---------------------------------------------------------------- stages

struct GroupStage {
  LabelGroup group;
  std::optional<LabelGroup> finite_rhs;
  std::optional<LatticeBasis> fixed_lattice;
  json document;
  std::string text;
};

auto group_stage(const ExperimentConfig &cfg) -> GroupStage {
  GroupStage s{label_group(cfg.system), {}, {}, {}, {}};
  s.document["system"] = system_kind(cfg.system);
  s.document["label_group"] = s.group.to_json();
  s.text += fmt::format("label group: {}\n", s.group.to_string());
  std::string gens;
  for (double g : s.group.generators()) gens += (gens.empty() ? "" : ", ") + fmt::format("{:.12g}", g);
  s.text += fmt::format("generators: {{{}}}\n", gens);

  if (const auto *t = std::get_if<TorusAffineSystem>(&cfg.system)) {
    s.fixed_lattice = fixed_character_lattice(*t);
    json basis = json::array();
    std::string listing;
    for (const auto &m : s.fixed_lattice->vectors) {
      basis.push_back(to_string(CharacterVector{TorusCharacter{m}}));
      listing += " " + basis.back().get<std::string>();
    }
    s.document["fixed_character_lattice"] = basis;
    s.text += fmt::format("fixed character lattice: {}\n",
                          basis.empty() ? std::string("empty (ker(A^T - I) = 0)") : listing.substr(1));
  }
  if (const auto *f = std::get_if<FiniteCyclicSystem>(&cfg.system)) {
    s.finite_rhs = finite_rhs_group(f->modulus(), f->multiplier(), f->shift());
    s.document["affine_formula_group"] = s.finite_rhs->to_json();
    s.text += fmt::format("affine formula on Z/{}Z: {}{}\n", f->modulus(), s.finite_rhs->to_string(),
                          s.finite_rhs->to_string() == s.group.to_string() ? "" : "  (differs)");
  }
  if (std::holds_alternative<CircleDoublingSystem>(cfg.system) ||
      std::holds_alternative<SolenoidDoublingSystem>(cfg.system))
    s.text += "fixed dual of the solenoid: empty\n";
  for (const auto &c : s.group.provenance())
    s.text += fmt::format("  character {} -> {:.12g}\n", c.character, c.value);
  return s;
}

auto analysis_options(const ExperimentConfig &cfg) -> AnalysisOptions {
  AnalysisOptions o;
  o.n = cfg.solver.n;
  o.boundary = cfg.solver.boundary;
  o.eigen_tol = cfg.solver.eigen_tol;
  o.min_width = cfg.solver.min_width;
  o.label_tol = cfg.solver.label_tol;
  o.coeff_bound = cfg.solver.coeff_bound;
  return o;
}

auto spectral_stage(const ExperimentConfig &cfg, const LabelGroup &group, std::uint64_t seed)
    -> SpectralReport {
  auto report = analyze_spectrum(cfg.system, cfg.coefficients, sample_ergodic(cfg.system, seed),
                                 group, analysis_options(cfg));
  report.parameters.seeds = {seed};
  return report;
}

auto ids_stage(const ExperimentConfig &cfg, std::uint64_t seed) -> std::string {
  const auto t = build_truncation(cfg.system, cfg.coefficients, sample_ergodic(cfg.system, seed),
                                  cfg.solver.n, cfg.solver.boundary);
  auto [lo, hi] = t.gershgorin();
  const double pad = 0.05 * std::max(hi - lo, 1.0);
  return ids_csv(ids_curve(t, cfg.ids.lower.value_or(lo - pad), cfg.ids.upper.value_or(hi + pad),
                           cfg.ids.points));
}

auto gap_table_header() -> std::string {
  return fmt::format("  {:<6} {:<6} {:<27} {:<9} {:<9} {:<13} {}\n", "seed", "N", "gap",
                                "label", "tol", "verdict", "witness");
}

auto gap_table(const SpectralReport &r) -> std::string {
  std::string out;
  for (const auto &g : r.gaps) {
    std::string witness;
    for (auto c : g.verdict.witness) witness += (witness.empty() ? "" : ",") + std::to_string(c);
    out += fmt::format("  {:<6} {:<6} {:<27} {:<9} {:<9.2g} {:<13} [{}]\n", r.parameters.seeds.at(0),
                       r.parameters.n,
                       fmt::format("[{}, {}]", number(g.gap.lower), number(g.gap.upper)),
                       number(g.gap.label), r.parameters.label_tol, to_string(g.verdict.kind),
                       witness);
  }
  if (r.gaps.empty())
    out += fmt::format("  {:<6} {:<6} no gaps wider than {:.3g}\n", r.parameters.seeds.at(0),
                       r.parameters.n, r.parameters.min_width);
  return out;
}

auto non_members(const SpectralReport &r) -> std::size_t {
  return static_cast<std::size_t>(std::count_if(r.gaps.begin(), r.gaps.end(), [](const auto &g) {
    return g.verdict.kind == Membership::NonMember;
  }));
}

auto scan_stage(const ExperimentConfig &cfg) -> ScanReport {
  ScanOptions o;
  o.n_schedule = cfg.scan->n_schedule;
  o.samples = cfg.scan->samples;
  o.seed = cfg.scan->seed;
  o.boundary = cfg.solver.boundary;
  o.min_width = cfg.scan->min_width;
  o.coeff_bound = cfg.solver.coeff_bound;
  o.eigen_tol = cfg.solver.eigen_tol;
  DynamicalSystem system = cfg.system;
  if (auto *d = std::get_if<CircleDoublingSystem>(&system))
    d->sample_bits = std::max(d->sample_bits,
                              *std::max_element(o.n_schedule.begin(), o.n_schedule.end()) + 128);
  return connectedness_scan(system, cfg.coefficients, o);
}

auto estimate_stage(const ExperimentConfig &cfg) -> json {
  const auto &e = *cfg.estimate;
  const SuspensionObservable g(cfg.system, e.character, e.beta);
  const double value = schwartzman_estimate(cfg.system, g.as_function(),
                                            sample_ergodic(cfg.system, e.seed), {e.t_max, e.dt});
  return {{"character", to_string(e.character)},
          {"beta", e.beta},
          {"estimate", value},
          {"tolerance", 5.0 / e.t_max},
          {"t_max", e.t_max},
          {"dt", e.dt},
          {"seed", e.seed},
          {"within_tolerance", std::abs(value - e.beta) <= 5.0 / e.t_max}};
}

auto estimate_text(const json &j) -> std::string {
  return fmt::format("estimate: {:.6f} +/- {:.3g} (beta = {}, T_max = {}, dt = {})\n",
                     j["estimate"].get<double>(), j["tolerance"].get<double>(),
                     j["beta"].get<double>(), j["t_max"].get<double>(), j["dt"].get<double>());
}

// ------------------------------------------------------------ subcommands

auto cmd_group(const CommonOptions &o, std::ostream &out) -> int {
  const auto cfg = load(o);
  const auto s = group_stage(cfg);
  const bool as_json = o.format && *o.format == "json";
  if (!o.quiet) out << (as_json ? dump(s.document) : s.text);
  if (o.out_dir) write_file(fs::path(*o.out_dir) / "group.json", dump(s.document));
  return exit_ok;
}

auto cmd_ids(const CommonOptions &o, std::ostream &out) -> int {
  const auto cfg = load(o);
  for (auto seed : cfg.solver.seeds) {
    const auto csv = ids_stage(cfg, seed);
    if (!o.quiet) out << csv;
    if (o.out_dir) write_file(fs::path(*o.out_dir) / fmt::format("ids_seed{}.csv", seed), csv);
  }
  return exit_ok;
}

auto cmd_gaps(const CommonOptions &o, std::ostream &out) -> int {
  const auto cfg = load(o);
  const auto group = label_group(cfg.system);
  std::size_t bad = 0;
  for (auto seed : cfg.solver.seeds) {
    const auto report = spectral_stage(cfg, group, seed);
    bad += non_members(report);
    const auto text = dump(report.to_json());
    if (!o.quiet) out << text;
    if (o.out_dir) write_file(fs::path(*o.out_dir) / fmt::format("gaps_seed{}.json", seed), text);
  }
  if (bad) throw Contradiction{fmt::format("{} gap label(s) outside the label group", bad)};
  return exit_ok;
}

auto cmd_estimate(const CommonOptions &o, std::ostream &out) -> int {
  const auto cfg = load(o);
  if (!cfg.estimate) throw ConfigError("/estimate: the config has no estimate section");
  const auto j = estimate_stage(cfg);
  if (!o.quiet) out << (o.format && *o.format == "json" ? dump(j) : estimate_text(j));
  if (o.out_dir) write_file(fs::path(*o.out_dir) / "estimate.json", dump(j));
  return exit_ok;
}

auto cmd_solenoid_check(const CommonOptions &o, std::ostream &out) -> int {
  const auto r = check_conjugacies(o.seed.value_or(1), o.samples, o.steps);
  std::string text;
  text += fmt::format("{} T2 o g = g o T1: exact mod 2^64, {} samples x {} steps, {} mismatches\n",
                      r.g_passed() ? "PASS" : "FAIL", r.samples, r.steps, r.g_mismatches);
  text += fmt::format("{} T2 o h = h o T3: max coordinate error {:.3g} <= {:.0e}, lambda = 0.25, K = 40\n",
                      r.h_passed() ? "PASS" : "FAIL", r.h_max_error, r.h_tolerance);
  if (!o.quiet) out << text;
  if (o.out_dir)
    write_file(fs::path(*o.out_dir) / "solenoid_check.json",
               dump({{"samples", r.samples},
                     {"steps", r.steps},
                     {"g_mismatches", r.g_mismatches},
                     {"h_max_error", r.h_max_error},
                     {"h_tolerance", r.h_tolerance},
                     {"passed", r.g_passed() && r.h_passed()}}));
  if (!(r.g_passed() && r.h_passed())) throw Contradiction{"conjugacy identity failed"};
  return exit_ok;
}

auto cmd_run(const CommonOptions &o, std::ostream &out) -> int {
  const auto cfg = load(o);
  const fs::path dir(cfg.outputs.dir);
  const bool csv = wants(cfg, "csv");
  const bool js = wants(cfg, "json");

  std::string summary = fmt::format("experiment: {}\nsystem: {}\n",
                                    cfg.name.empty() ? std::string("(unnamed)") : cfg.name,
                                    system_kind(cfg.system));
  const auto g = group_stage(cfg);
  summary += g.text;
  if (js) write_file(dir / "group.json", dump(g.document));

  std::size_t bad = 0;
  summary += "gaps:\n" + gap_table_header();
  for (auto seed : cfg.solver.seeds) {
    const auto report = spectral_stage(cfg, g.group, seed);
    bad += non_members(report);
    summary += gap_table(report);
    if (js) write_file(dir / fmt::format("gaps_seed{}.json", seed), dump(report.to_json()));
    if (csv) write_file(dir / fmt::format("ids_seed{}.csv", seed), ids_stage(cfg, seed));
  }

  bool contradiction = false;
  if (cfg.scan) {
    const auto scan = scan_stage(cfg);
    contradiction = scan.contradiction();
    summary += fmt::format("connectedness scan: {} candidates, {} persistent, {}\n",
                           scan.candidates.size(), scan.persistent_count(),
                           contradiction ? "CONTRADICTION" : "no contradiction");
    if (js) write_file(dir / "scan.json", dump(scan.to_json()));
  }
  if (cfg.estimate) {
    const auto j = estimate_stage(cfg);
    summary += estimate_text(j);
    if (js) write_file(dir / "estimate.json", dump(j));
  }
  write_file(dir / "summary.txt", summary);
  if (!o.quiet) out << summary;
  if (bad || contradiction)
    throw Contradiction{fmt::format("{} non-member label(s){}", bad,
                                    contradiction ? ", persistent gap with a forbidden label" : "")};
  return exit_ok;
}

} // namespace

auto run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) -> int {
  CLI::App app{"Gap labels of ergodic Jacobi operators over affine dynamical systems", "gaplabel"};
  app.require_subcommand(1);
  CommonOptions o;

  auto *run = app.add_subcommand("run", "full pipeline: label group, spectra, verification");
  auto *group = app.add_subcommand("group", "print the label group");
  auto *ids = app.add_subcommand("ids", "emit the IDS curve as CSV (E,k(E))");
  auto *gaps = app.add_subcommand("gaps", "emit the spectral report as JSON");
  auto *sol = app.add_subcommand("solenoid-check", "verify the solenoid conjugacies");
  auto *est = app.add_subcommand("estimate", "winding-rate estimate of the configured observable");
  for (auto *cmd : {run, group, ids, gaps, est}) add_common(*cmd, o, true);
  add_common(*sol, o, false);
  sol->add_option("--samples", o.samples, "number of random solenoid points")->check(CLI::PositiveNumber);
  sol->add_option("--steps", o.steps, "iterations per identity")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (group->parsed()) return cmd_group(o, out);
    if (ids->parsed()) return cmd_ids(o, out);
    if (gaps->parsed()) return cmd_gaps(o, out);
    if (est->parsed()) return cmd_estimate(o, out);
    if (sol->parsed()) return cmd_solenoid_check(o, out);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const NonInvertibleSystem &e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const Contradiction &c) {
    err << "contradiction: " << c.what << "\n";
    return exit_contradiction;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}

} // namespace gaplabel
