#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "qbic/config.hpp"
#include "qbic/ladder.hpp"
#include "qbic/propagation.hpp"
#include "qbic/spectrum.hpp"
#include "qbic/sweep.hpp"
#include "qbic/wavefunction.hpp"

namespace {

using namespace qbic;
using json = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kMaxXmax = 100000;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long, std::string>;

/// One emitted table: leading metadata, a header, rows, and trailing report lines.
struct Table {
  std::vector<std::pair<std::string, Cell>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> report;
  std::vector<std::string> warnings;
};

std::string csv_number(double v) {
  if (v == 0.0) return "0.00000000";
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (std::abs(v) >= 1e-3) return fmt::format("{:.8f}", v);
  return fmt::format("{:.8e}", v);
}

std::string csv_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return csv_number(*d);
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

json json_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* l = std::get_if<long>(&c)) return *l;
  return std::get<std::string>(c);
}

std::string render(const Table& t, OutputFormat format) {
  if (format == OutputFormat::json) {
    json j;
    json meta = json::object();
    for (const auto& [k, v] : t.meta) meta[k] = json_cell(v);
    j["meta"] = meta;
    j["columns"] = t.columns;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json o = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = json_cell(r[i]);
      rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    json report = json::object();
    for (const auto& [k, v] : t.report) report[k] = json_cell(v);
    j["report"] = report;
    j["warnings"] = t.warnings;
    return j.dump(2) + "\n";
  }
  std::string s;
  for (const auto& [k, v] : t.meta) s += "# " + k + "=" + csv_cell(v) + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + csv_cell(r[i]);
    s += "\n";
  }
  for (const auto& [k, v] : t.report) s += "# " + k + "=" + csv_cell(v) + "\n";
  for (const auto& w : t.warnings) s += "# warning: " + w + "\n";
  return s;
}

void add_params(Table& t, const ModelParams& p) {
  t.meta.emplace_back("th", p.t_h());
  t.meta.emplace_back("tp", p.tp_h());
  t.meta.emplace_back("g", p.g());
  t.meta.emplace_back("ed", p.e_d());
}

std::string valid_labels(const std::vector<Eigenstate>& states) {
  std::string s;
  for (const auto& st : states) s += (s.empty() ? "" : " ") + st.label;
  return s;
}

const Eigenstate& require_label(const std::vector<Eigenstate>& states, const std::string& label) {
  if (const Eigenstate* s = find_state(states, label)) return *s;
  throw UsageError("unknown state label '" + label + "'; valid labels: " + valid_labels(states));
}

std::vector<Cell> state_row(const Eigenstate& s) {
  return {s.label,
          s.energy.real(),
          s.energy.imag(),
          s.k_plus.k.real(),
          s.k_plus.k.imag(),
          s.k_minus.k.real(),
          s.k_minus.k.imag(),
          std::string(to_string(s.sheet)),
          s.residual,
          std::string(to_string(s.kind))};
}



struct Globals {
  double th = 1.0;
  double tp = 0.345;
  double g = 0.1;
  double ed = 0.3;
  std::string format = "csv";
  std::string out;
  std::optional<double> tol;
};

SpectrumOptions spectrum_options(const Globals& g) {
  SpectrumOptions o;
  if (g.tol) o.refine_tol = *g.tol;
  return o;
}

Table cmd_solve(const ModelParams& p, const SpectrumOptions& opts) {
  Table t;
  add_params(t, p);
  if (p.g() == 0.0) {
    t.meta.emplace_back("note", std::string("decoupled limit: the twelve roots collapse onto the dot level and the band edges"));
    t.columns = {"origin", "energy", "multiplicity", "re_centroid", "im_centroid"};
    for (const auto& c : decoupled_clusters(p, opts.roots)) {
      t.rows.push_back({c.origin, c.energy, static_cast<long>(c.multiplicity), c.centroid.real(), c.centroid.imag()});
    }
    return t;
  }
  const auto states = solve_spectrum(p, opts);
  t.columns = {"label", "re_e", "im_e", "re_k_plus", "im_k_plus", "re_k_minus", "im_k_minus", "sheet", "residual", "kind"};
  for (const auto& s : states) t.rows.push_back(state_row(s));
  return t;
}

struct WavefunctionArgs {
  std::string state;
  long xmax = 100;
  std::string normalization = "dot_unity";
  bool allow_large = false;
};

Table cmd_wavefunction(const ModelParams& p, const SpectrumOptions& opts, const WavefunctionArgs& a) {
  if (a.xmax < 0) throw UsageError("--xmax must be non-negative");
  if (a.xmax > kMaxXmax && !a.allow_large) {
    throw UsageError(fmt::format("--xmax above {} needs --allow-large-xmax", kMaxXmax));
  }
  Normalization norm = Normalization::dot_unity;
  if (a.normalization == "max_unity" || a.normalization == "max") norm = Normalization::max_unity;
  else if (a.normalization != "dot_unity" && a.normalization != "dot") {
    throw UsageError("--normalization must be dot_unity or max_unity");
  }
  if (!(p.g() > 0.0)) throw UsageError("wavefunction needs g > 0");
  const auto states = solve_spectrum(p, opts);
  const Eigenstate& s = require_label(states, a.state);
  const auto x = static_cast<int>(a.xmax);
  const WavefunctionProfile prof = build_profile(p, s, -x, x, norm);

  Table t;
  add_params(t, p);
  t.meta.emplace_back("state", s.label);
  t.meta.emplace_back("re_e", s.energy.real());
  t.meta.emplace_back("im_e", s.energy.imag());
  t.meta.emplace_back("sheet", std::string(to_string(s.sheet)));
  t.meta.emplace_back("normalization", std::string(to_string(norm)));
  t.meta.emplace_back("abs_psi_dot", std::abs(prof.psi_dot));
  t.columns = {"x", "abs_psi_leg1", "abs_psi_leg2", "abs_psi_plus", "abs_psi_minus"};
  t.rows.reserve(prof.samples.size());
  for (const auto& smp : prof.samples) {
    t.rows.push_back({static_cast<long>(smp.x), std::abs(smp.leg1), std::abs(smp.leg2), std::abs(smp.plus),
                      std::abs(smp.minus)});
  }
  return t;
}

struct SweepArgs {
  std::string param;
  double from = 0.0;
  double to = 0.0;
  long steps = 0;
  std::string state;
};

void add_sweep_rows(Table& t, const SweepResult& r, SweepParam param, const std::string& only) {
  for (const auto& rec : r.records) {
    if (!only.empty() && rec.track_label != only) continue;
    t.rows.push_back({rec.param_value, static_cast<long>(rec.track_id), rec.track_label, rec.state.energy.real(),
                      rec.state.energy.imag(), std::string(to_string(rec.state.sheet))});
  }
  for (const auto& s : r.splits) {
    t.warnings.push_back(fmt::format("{}={}: {}", to_string(param), csv_number(s.param_value), s.diagnostic));
  }
}

/// Fills t; returns false (with partial rows) when tracking fails.
bool cmd_sweep(Table& t, const ModelParams& p, const SpectrumOptions& opts, const SweepArgs& a, std::string& error) {
  const auto param = parse_sweep_param(a.param);
  if (!param) throw UsageError("--param must be ed, g or tp");
  if (a.steps < 2) throw UsageError("--steps must be at least 2");
  if (!(a.from < a.to)) throw UsageError("--from must be smaller than --to");
  if (*param == SweepParam::g && !(a.from > 0.0)) throw UsageError("a g sweep needs --from > 0");
  add_params(t, p);
  t.meta.emplace_back("param", std::string(to_string(*param)));
  t.columns = {"param_value", "track_id", "label", "re_e", "im_e", "sheet"};
  SweepOptions so;
  so.spectrum = opts;
  const auto grid = linear_grid(a.from, a.to, static_cast<std::size_t>(a.steps));
  try {
    const SweepResult r = sweep_parameter(p, *param, grid, so);
    if (!a.state.empty() && !r.track_id(a.state)) {
      std::string labels;
      for (const auto& l : r.track_labels) labels += (labels.empty() ? "" : " ") + l;
      throw UsageError("unknown state label '" + a.state + "'; valid labels: " + labels);
    }
    add_sweep_rows(t, r, *param, a.state);
    return true;
  } catch (const TrackingError& e) {
    add_sweep_rows(t, e.partial(), *param, a.state);
    error = fmt::format("tracking failed at grid index {} ({}={}): {}", e.grid_index(), to_string(*param),
                        csv_number(e.param_value()), e.what());
    t.warnings.push_back(error);
    return false;
  }
}

struct ScalingArgs {
  std::string state;
  double gmin = 0.05;
  double gmax = 0.2;
  long points = 7;
};

Table cmd_scaling(const ModelParams& p, const SpectrumOptions& opts, const ScalingArgs& a) {
  if (a.points < 5) throw UsageError("--points must be at least 5");
  if (!(a.gmin > 0.0) || !(a.gmin < a.gmax)) throw UsageError("need 0 < --gmin < --gmax");
  std::vector<double> grid(static_cast<std::size_t>(a.points));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = a.gmin * std::pow(a.gmax / a.gmin, f);
  }
  grid.front() = a.gmin;
  grid.back() = a.gmax;
  SweepOptions so;
  so.spectrum = opts;
  const ScalingFit fit = fit_g_scaling(p, a.state, grid, so);

  Table t;
  add_params(t, p);
  t.meta.emplace_back("state", a.state);
  t.columns = {"g", "abs_im_e", "included"};
  long used = 0;
  for (std::size_t i = 0; i < fit.g_grid.size(); ++i) {
    t.rows.push_back({fit.g_grid[i], fit.im_e[i], static_cast<long>(fit.included[i])});
    used += fit.included[i];
  }
  t.report.emplace_back("exponent", fit.exponent);
  t.report.emplace_back("prefactor", fit.prefactor);
  t.report.emplace_back("r_squared", fit.r_squared);
  t.report.emplace_back("points_used", used);
  return t;
}

struct EvolveArgs {
  long length = 1500;
  double tmax = 300.0;
  double dt = 1.0;
  std::string initial = "dot";
  std::string integrator = "chebyshev";
  std::optional<double> fit_from;
  std::optional<double> fit_to;
  std::optional<long> window;
};

const Eigenstate* nearest_resonance(const std::vector<Eigenstate>& states, cplx target,
                                    std::optional<SheetId> sheet = std::nullopt) {
  const Eigenstate* best = nullptr;
  for (const auto& s : states) {
    if (s.kind != StateKind::resonant || (sheet && s.sheet != *sheet)) continue;
    if (!best || std::abs(s.energy - target) < std::abs(best->energy - target)) best = &s;
  }
  return best;
}

Table cmd_evolve(const ModelParams& p, const SpectrumOptions& opts, const EvolveArgs& a) {
  if (a.length < 1) throw UsageError("--length must be at least 1");
  if (!(a.dt > 0.0)) throw UsageError("--dt must be positive");
  if (!(a.tmax > 0.0)) throw UsageError("--tmax must be positive");
  EvolveOptions eo;
  if (a.integrator == "crank-nicolson" || a.integrator == "cn") eo.integrator = Integrator::crank_nicolson;
  else if (a.integrator != "chebyshev") throw UsageError("--integrator must be chebyshev or crank-nicolson");

  const FiniteLadder h = build_finite_ladder(p, static_cast<int>(a.length));
  std::vector<Eigenstate> states;
  if (p.g() > 0.0) states = solve_spectrum(p, opts);

  StateVector initial;
  cplx target = p.e_d();
  if (a.initial == "dot") {
    initial = dot_state(h);
    eo.initial_kind = InitialKind::dot;
  } else if (a.initial.rfind("state:", 0) == 0) {
    if (states.empty()) throw UsageError("a state initial condition needs g > 0");
    const Eigenstate& s = require_label(states, a.initial.substr(6));
    const long window = a.window.value_or(a.length / 2);
    if (window < 1 || window > a.length) throw UsageError("--window must lie in [1, length]");
    initial = truncated_eigenstate(h, s, static_cast<int>(window));
    eo.initial_kind = InitialKind::truncated_eigenstate;
    eo.initial_label = s.label;
    target = s.energy;
  } else {
    throw UsageError("--initial must be dot or state:LABEL");
  }

  const SurvivalTrace trace = evolve_survival(h, initial, a.tmax, a.dt, eo);

  Table t;
  add_params(t, p);
  t.meta.emplace_back("length", a.length);
  t.meta.emplace_back("initial", a.initial);
  t.meta.emplace_back("integrator", a.integrator);
  t.meta.emplace_back("reflection_horizon", trace.reflection_horizon);
  t.columns = {"t", "survival"};
  for (std::size_t i = 0; i < trace.times.size(); ++i) t.rows.push_back({trace.times[i], trace.probability[i]});
  t.warnings = trace.warnings;

  const double t_end = std::min(trace.times.back(), trace.reflection_horizon);
  const double lo = a.fit_from.value_or(t_end / 6.0);
  const double hi = a.fit_to.value_or(t_end);
  t.report.emplace_back("norm_drift", trace.norm_drift);
  t.report.emplace_back("energy_drift", trace.energy_drift);
  t.report.emplace_back("fit_from", lo);
  t.report.emplace_back("fit_to", hi);
  const DecayFit fit = fit_decay_rate(trace, lo, hi);
  t.report.emplace_back("fitted_rate", fit.rate);
  t.report.emplace_back("r_squared", fit.r_squared);
  if (fit.warning) t.warnings.push_back(*fit.warning);

  if (const Eigenstate* near = nearest_resonance(states, target)) {
    const double ref = 2.0 * std::abs(near->energy.imag());
    t.report.emplace_back("reference_label", near->label);
    t.report.emplace_back("reference_rate", ref);
    t.report.emplace_back("ratio", fit.rate / ref);
  } else {
    t.report.emplace_back("reference_label", std::string("none"));
  }
  // The pole the survival amplitude actually continues onto across the real axis.
  const SheetId sheet = continuation_sheet(p, target.real());
  if (const Eigenstate* phys = nearest_resonance(states, target, sheet)) {
    const double ref = 2.0 * std::abs(phys->energy.imag());
    t.report.emplace_back("continuation_label", phys->label);
    t.report.emplace_back("continuation_rate", ref);
    t.report.emplace_back("continuation_ratio", fit.rate / ref);
  }
  return t;
}

const std::set<std::string> kGlobalValueFlags = {"--th", "--tp", "--g", "--ed", "--format", "--out", "--config", "--tol"};
const std::set<std::string> kCommands = {"solve", "wavefunction", "sweep", "scaling", "evolve"};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Rewrites the command line so that values from --config come first and command-line flags,
/// parsed later with last-wins semantics, override them.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  std::optional<std::size_t> command_at;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      continue;
    }
    if (!command_at && kCommands.count(a)) command_at = rest.size();
    rest.push_back(a);
    if (!command_at && kGlobalValueFlags.count(a) && i + 1 < args.size()) rest.push_back(args[++i]);
  }
  if (!path) return rest;

  const RunConfig file = RunConfig::from_text(read_file(*path));
  std::vector<std::string> globals = {"--th=" + exact_decimal(file.params.t_h()), "--tp=" + exact_decimal(file.params.tp_h()),
                                      "--g=" + exact_decimal(file.params.g()), "--ed=" + exact_decimal(file.params.e_d()),
                                      std::string("--format=") + to_string(file.output_format)};
  if (file.output_path) globals.push_back("--out=" + *file.output_path);
  if (file.tol) globals.push_back("--tol=" + exact_decimal(*file.tol));
  std::vector<std::string> local;
  for (const auto& [k, v] : file.options) local.push_back("--" + k + "=" + v);

  std::vector<std::string> out = globals;
  if (!command_at) {
    if (file.command.empty()) throw UsageError("no subcommand given");
    out.insert(out.end(), rest.begin(), rest.end());
    out.push_back(file.command);
    out.insert(out.end(), local.begin(), local.end());
    return out;
  }
  if (!file.command.empty() && file.command != rest[*command_at]) {
    throw UsageError("config file is for '" + file.command + "', not '" + rest[*command_at] + "'");
  }
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<long>(*command_at) + 1);
  out.insert(out.end(), local.begin(), local.end());
  out.insert(out.end(), rest.begin() + static_cast<long>(*command_at) + 1, rest.end());
  return out;
}

RunConfig effective_config(const CLI::App& sub, const Globals& g) {
  RunConfig c;
  c.command = sub.get_name();
  c.params = ModelParams(g.th, g.tp, g.g, g.ed);
  c.output_format = *parse_output_format(g.format);
  if (!g.out.empty()) c.output_path = g.out;
  c.tol = g.tol;
  for (const CLI::Option* o : sub.get_options()) {
    if (o->count() == 0 || o->get_name() == "--help") continue;
    std::string name = o->get_name(false, true);
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    if (name == "print-config") continue;
    c.options[name] = o->get_expected_min() == 0 ? std::string("true") : o->as<std::string>();
  }
  return c;
}

int run(int argc, char** argv) {
  Globals g;
  WavefunctionArgs wf;
  SweepArgs sw;
  ScalingArgs sc;
  EvolveArgs ev;
  bool print_config = false;

  CLI::App app{"Discrete spectrum, eigenfunctions and dynamics of a quantum dot side-coupled to a two-leg ladder"};
  app.name("qbic");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--th", g.th, "leg hopping t_h")->capture_default_str();
  app.add_option("--tp", g.tp, "rung hopping t'_h")->capture_default_str();
  app.add_option("--g", g.g, "dot coupling")->capture_default_str();
  app.add_option("--ed", g.ed, "dot level E_d")->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--out", g.out, "output file (default: standard output)");
  app.add_option("--config", "flat key=value file mirroring the flags; flags override it");
  app.add_option("--tol", g.tol, "Newton refinement tolerance");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  CLI::App* solve = app.add_subcommand("solve", "all twelve discrete eigenvalues with wave numbers and sheets");

  CLI::App* wave = app.add_subcommand("wavefunction", "eigenfunction moduli along the ladder");
  wave->add_option("--state", wf.state, "state label, e.g. Q2")->required();
  wave->add_option("--xmax", wf.xmax, "sample x in [-xmax, xmax]")->capture_default_str();
  wave->add_option("--normalization", wf.normalization, "dot_unity or max_unity")->capture_default_str();
  wave->add_flag("--allow-large-xmax", wf.allow_large, "permit --xmax above 100000");

  CLI::App* sweep = app.add_subcommand("sweep", "track the spectrum along one parameter");
  sweep->add_option("--param", sw.param, "ed, g or tp")->required();
  sweep->add_option("--from", sw.from, "first value")->required();
  sweep->add_option("--to", sw.to, "last value")->required();
  sweep->add_option("--steps", sw.steps, "number of grid points (>= 2)")->required();
  sweep->add_option("--state", sw.state, "keep only this track (label at the first grid point)");

  CLI::App* scaling = app.add_subcommand("scaling", "power-law fit of |Im E| against g");
  scaling->add_option("--state", sc.state, "state label at --gmax")->required();
  scaling->add_option("--gmin", sc.gmin)->capture_default_str();
  scaling->add_option("--gmax", sc.gmax)->capture_default_str();
  scaling->add_option("--points", sc.points, "log-spaced g values (>= 5)")->capture_default_str();

  CLI::App* evolve = app.add_subcommand("evolve", "survival probability on a finite ladder");
  evolve->add_option("--length", ev.length, "half length L (sites -L..L)")->capture_default_str();
  evolve->add_option("--tmax", ev.tmax)->capture_default_str();
  evolve->add_option("--dt", ev.dt, "sampling step")->capture_default_str();
  evolve->add_option("--initial", ev.initial, "dot or state:LABEL")->capture_default_str();
  evolve->add_option("--integrator", ev.integrator, "chebyshev or crank-nicolson")->capture_default_str();
  evolve->add_option("--fit-from", ev.fit_from, "start of the fit window");
  evolve->add_option("--fit-to", ev.fit_to, "end of the fit window");
  evolve->add_option("--window", ev.window, "truncation half width for state:LABEL (default L/2)");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  ModelParams p;
  try {
    p = ModelParams(g.th, g.tp, g.g, g.ed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (print_config) {
    std::cout << effective_config(*active, g).to_text();
    return kOk;
  }
  const OutputFormat format = *parse_output_format(g.format);
  const SpectrumOptions opts = spectrum_options(g);

  Table table;
  int status = kOk;
  try {
    if (active == solve) table = cmd_solve(p, opts);
    else if (active == wave) table = cmd_wavefunction(p, opts, wf);
    else if (active == sweep) {
      std::string error;
      if (!cmd_sweep(table, p, opts, sw, error)) status = kFailure;
    } else if (active == scaling) table = cmd_scaling(p, opts, sc);
    else table = cmd_evolve(p, opts, ev);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ClassificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << fmt::format("  root {:.16g}{:+.16g}i, residuals per sheet I..IV:", e.energy().real(), e.energy().imag());
    for (const double r : e.residuals()) std::cerr << fmt::format(" {:.3e}", r);
    std::cerr << "\n";
    return kFailure;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << fmt::format(" (residual {:.3e})\n", e.residual());
    for (const auto& z : e.best_iterates()) std::cerr << fmt::format("  best iterate {:.16g}{:+.16g}i\n", z.real(), z.imag());
    return kFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }

  for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = render(table, format);
  if (g.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(g.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << g.out << "\n";
      return kFailure;
    }
    out << text;
  }
  if (status != kOk) std::cerr << "error: sweep incomplete; partial output written\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
