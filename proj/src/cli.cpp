#include "casimir/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

namespace casimir::cli {

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::optional<double> tol;
  std::optional<double> tau_min, tau_max;
  std::optional<std::size_t> tau_steps;
  bool log = false;
  std::optional<double> omega_min, omega_max;
  std::optional<std::size_t> omega_steps;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<double> fresnel;
};

void add_common_options(CLI::App& sub, Options& o) {
  sub.add_option("--config", o.config_path, "JSON run configuration")->required();
  sub.add_option("--tol", o.tol, "relative quadrature tolerance");
  sub.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "structured"}));
  sub.add_option("--out", o.out, "write the table to PATH instead of stdout");
}

void add_tau_options(CLI::App& sub, Options& o) {
  sub.add_option("--tau-min", o.tau_min, "first cavity time of flight");
  sub.add_option("--tau-max", o.tau_max, "last cavity time of flight");
  sub.add_option("--tau-steps", o.tau_steps, "number of grid points");
  sub.add_flag("--log", o.log, "logarithmic tau spacing");
}

void add_omega_options(CLI::App& sub, Options& o) {
  sub.add_option("--omega-min", o.omega_min, "first frequency");
  sub.add_option("--omega-max", o.omega_max, "last frequency");
  sub.add_option("--omega-steps", o.omega_steps, "number of grid points");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double read_tolerance_env() {
  const char* raw = std::getenv(kToleranceEnv);
  if (!raw) return QuadratureSpec{}.rel_tol;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0)) throw ConfigError(kToleranceEnv, "expected a positive number");
  return v;
}

// Command-line values are in the configuration's unit system.
void apply_overrides(RunConfig& cfg, const Options& o) {
  const Units& u = cfg.cavity.units;
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ConfigError("--tol", "tolerance > 0 violated");
    cfg.quadrature.rel_tol = *o.tol;
  } else if (!cfg.rel_tol_set) {
    cfg.quadrature.rel_tol = read_tolerance_env();
  }
  if (o.format) cfg.format = *o.format == "csv" ? OutputFormat::Csv : OutputFormat::Structured;
  if (o.out) cfg.output_path = *o.out;
  if (o.fresnel) {
    if (!(*o.fresnel >= 0.0)) throw ConfigError("--fresnel", "Fresnel number >= 0 violated");
    cfg.fresnel_number = *o.fresnel;
  }

  if (o.tau_min || o.tau_max || o.tau_steps || o.log) {
    TauGrid g = cfg.sweep.value_or(TauGrid{});
    if (o.tau_min) g.min = *o.tau_min / u.time_scale();
    if (o.tau_max) g.max = *o.tau_max / u.time_scale();
    if (o.tau_steps) g.steps = *o.tau_steps;
    if (o.log) g.log = true;
    cfg.sweep = g;
  }
  if (cfg.sweep) {
    const TauGrid& g = *cfg.sweep;
    if (!(g.min > 0.0)) throw ConfigError("--tau-min", "tau_min > 0 violated");
    if (g.steps == 0) throw ConfigError("--tau-steps", "steps >= 1 violated");
    if (g.steps > 1 && !(g.max > g.min)) throw ConfigError("--tau-max", "tau_max > tau_min violated");
  }

  if (o.omega_min || o.omega_max || o.omega_steps) {
    OmegaGrid g = cfg.spectrum.value_or(OmegaGrid{});
    if (o.omega_min) g.min = *o.omega_min / u.frequency_scale();
    if (o.omega_max) g.max = *o.omega_max / u.frequency_scale();
    if (o.omega_steps) g.steps = *o.omega_steps;
    cfg.spectrum = g;
  }
  if (cfg.spectrum) {
    const OmegaGrid& g = *cfg.spectrum;
    if (!(g.min > 0.0)) throw ConfigError("--omega-min", "omega_min > 0 violated");
    if (g.steps == 0) throw ConfigError("--omega-steps", "steps >= 1 violated");
    if (g.steps > 1 && !(g.max > g.min)) throw ConfigError("--omega-max", "omega_max > omega_min violated");
  }
}

bool dielectric_pair(const CavityConfig& c) { return c.mirror1.is_dielectric() && c.mirror2.is_dielectric(); }

void write_table(const RunConfig& cfg, const std::string& table, std::ostream& out) {
  if (!cfg.output_path) {
    out << table;
    return;
  }
  std::ofstream file(*cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError(*cfg.output_path, "cannot write output file");
  file << table;
  if (!file) throw ConfigError(*cfg.output_path, "cannot write output file");
}

int run_force(const RunConfig& cfg, bool table_on_stdout, std::ostream& out, std::ostream& err) {
  ForceReport report;
  report.force = force_imag(cfg.cavity, cfg.quadrature);
  report.gradient = force_gradient(cfg.cavity, cfg.quadrature);
  if (cfg.fresnel_number) report.fresnel = fresnel_scale(report.force.force, *cfg.fresnel_number);

  const std::string table = emit_force(report, cfg.format, cfg.cavity.units);
  if (cfg.output_path) {
    write_table(cfg, table, out);
    out << force_summary(report, cfg.cavity.units);
  } else {
    out << (table_on_stdout ? table : force_summary(report, cfg.cavity.units));
  }

  int code = kOk;
  if (!report.force.bounds.within_perfect) {
    err << "bound violated: |F| exceeds the perfect-mirror force\n";
    code = kBoundViolation;
  }
  if (dielectric_pair(cfg.cavity)) {
    if (!report.force.bounds.attractive) {
      err << "bound violated: dielectric mirrors must attract\n";
      code = kBoundViolation;
    }
    if (report.gradient.gradient > 10.0 * report.gradient.error_estimate) {
      err << "bound violated: dF/dtau > 0 for dielectric mirrors\n";
      code = kBoundViolation;
    }
  }
  return code;
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) throw ConfigError("/sweep", "sweep needs a tau grid (config \"sweep\" or --tau-min/--tau-max/--tau-steps)");
  const auto grid = make_grid(*cfg.sweep);
  const SweepResult sweep = sweep_force(cfg.cavity, grid, cfg.quadrature);
  write_table(cfg, emit_sweep(sweep, cfg.format, cfg.cavity.units), out);

  int code = kOk;
  for (const auto& pt : sweep.points) {
    if (!pt.result) {
      err << fmt::format("tau = {}: {}\n", pt.tau * cfg.cavity.units.time_scale(), pt.error);
      code = kNumericError;
    }
  }
  bool violated = false;
  for (const auto& pt : sweep.points) {
    if (!pt.result) continue;
    if (!pt.result->bounds.within_perfect) {
      err << fmt::format("bound violated at tau = {}: |F| exceeds the perfect-mirror force\n",
                         pt.tau * cfg.cavity.units.time_scale());
      violated = true;
    }
    if (dielectric_pair(cfg.cavity) && !pt.result->bounds.attractive) {
      err << fmt::format("bound violated at tau = {}: dielectric mirrors must attract\n",
                         pt.tau * cfg.cavity.units.time_scale());
      violated = true;
    }
  }
  if (dielectric_pair(cfg.cavity) && !sweep.non_increasing) {
    err << "bound violated: force is not non-increasing in tau for dielectric mirrors\n";
    violated = true;
  }
  return violated ? kBoundViolation : code;
}

int run_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.spectrum)
    throw ConfigError("/spectrum", "spectrum needs an omega grid (config \"spectrum\" or --omega-min/--omega-max/--omega-steps)");
  const auto grid = make_grid(*cfg.spectrum);
  const auto samples = spectrum(cfg.cavity, grid);
  write_table(cfg, emit_spectrum(samples, cfg.format, cfg.cavity.units), out);
  int code = kOk;
  for (const auto& s : samples) {
    if (!s.ok()) {
      err << fmt::format("omega = {}: {}\n", s.omega * cfg.cavity.units.frequency_scale(), s.error);
      code = kNumericError;
    }
  }
  return code;
}

int run_theta(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<ThetaRow> rows;
  int code = kOk;
  for (const auto& [name, stack] : {std::pair{"mirror1", &cfg.cavity.mirror1}, std::pair{"mirror2", &cfg.cavity.mirror2}}) {
    ThetaRow row{name, std::nullopt, std::nullopt};
    try {
      row.theta_static = theta_static(*stack);
    } catch (const UnsupportedError& e) {
      err << fmt::format("{}: theta_static not applicable: {}\n", name, e.what());
    }
    try {
      row.theta_dispersion = theta_dispersion(*stack);
    } catch (const UnsupportedError& e) {
      err << fmt::format("{}: theta_dispersion not applicable: {}\n", name, e.what());
    } catch (const AccuracyError& e) {
      err << fmt::format("{}: {} (partial value {})\n", name, e.what(), e.best_estimate());
      code = kNumericError;
    }
    rows.push_back(row);
  }
  write_table(cfg, emit_theta(rows, cfg.format, cfg.cavity.units), out);
  return code;
}

int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = default_passivity_grid();
  const auto report = check_passivity(cfg.cavity.mirror1, cfg.cavity.mirror2, grid);
  write_table(cfg, emit_check(report, cfg.format, cfg.cavity.units), out);
  if (report.passed) return kOk;
  const double f = cfg.cavity.units.frequency_scale();
  for (const auto& [name, r] : {std::pair{"mirror1", &report.mirror1}, std::pair{"mirror2", &report.mirror2}}) {
    if (r->passed) continue;
    const auto p = r->violation_at.value_or(0.0);
    err << fmt::format("{}: passivity violated at p = ({:.6g}, {:.6g}), min eigenvalue of 1 - S S^+ = {:.6g}\n", name,
                       p.real() * f, p.imag() * f, r->min_eigenvalue);
  }
  if (report.max_loop_gain > 1.0 + kPassivityTolerance)
    err << fmt::format("cavity: loop gain |r1 r2| = {:.6g} exceeds 1\n", report.max_loop_gain);
  return kBoundViolation;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Casimir force between frequency-dependent mirrors in a 1D cavity", "casimir"};
  app.require_subcommand(1);

  auto* force = app.add_subcommand("force", "force, perfect-mirror reference, ratio and bound flags");
  add_common_options(*force, o);
  force->add_option("--fresnel", o.fresnel, "number of coupled transverse modes");
  auto* sweep = app.add_subcommand("sweep", "force over a tau grid");
  add_common_options(*sweep, o);
  add_tau_options(*sweep, o);
  auto* spec = app.add_subcommand("spectrum", "Airy function, loop function and force density over an omega grid");
  add_common_options(*spec, o);
  add_omega_options(*spec, o);
  auto* theta = app.add_subcommand("theta", "narrow-band coefficient of each mirror");
  add_common_options(*theta, o);
  auto* check = app.add_subcommand("check", "passivity report for both mirrors");
  add_common_options(*check, o);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  o.command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    ParseOptions parse_options;
    parse_options.passivity_prescreen = o.command != "check";
    cfg = parse_config(read_file(o.config_path), parse_options);
    apply_overrides(cfg, o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (o.command == "force") return run_force(cfg, o.format.has_value(), out, err);
    if (o.command == "sweep") return run_sweep(cfg, out, err);
    if (o.command == "spectrum") return run_spectrum(cfg, out, err);
    if (o.command == "theta") return run_theta(cfg, out, err);
    return run_check(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const AccuracyError& e) {
    err << fmt::format("accuracy error: {} (best estimate {}, error estimate {})\n", e.what(), e.best_estimate(),
                       e.error_estimate());
    return kNumericError;
  } catch (const Error& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace casimir::cli
