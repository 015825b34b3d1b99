#pragma once

// JSON run configuration for the command-line front end.
//
//   {
//     "units":   {"system": "natural" | "si", "tau0": 1e-15},
//     "cavity":  {"tau": 1.0, "mirror1": STACK, "mirror2": STACK},
//     "quadrature": {"rel_tol": 1e-10, "abs_tol": 0, "max_subdivisions": 1000, "u_max": 60},
//     "sweep":   {"tau_min": 0.1, "tau_max": 10, "steps": 50, "log": true},
//     "spectrum": {"omega_min": 0.1, "omega_max": 10, "steps": 1000},
//     "output":  {"format": "csv" | "structured", "path": "out.csv"},
//     "fresnel_number": 100
//   }
//
// STACK is {"layers": [{"model": MODEL, "thickness_time": l/c}, ...]} or
// {"analytic": {"type": "perfect" | "constant" | "gain" | "magnetic" | "narrowband", ...}}
// and MODEL is {"type": "constant", "eps": 4}, {"type": "lorentz",
// "oscillators": [[Omega, omega0, gamma], ...]} or {"type": "tabulated_imag",
// "samples": [[p, eps], ...], "tail": "decay" | "error"}.
//
// With "si" units every time is in seconds and every frequency in rad/s;
// they are stored internally in units of tau0.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "casimir/errors.hpp"
#include "casimir/force.hpp"

namespace casimir {

// Parse or validation failure. location is "line L, column C" for syntax
// errors and a JSON pointer such as "/cavity/mirror1/layers/0/model/eps" for
// semantic ones.
class ConfigError : public Error {
 public:
  ConfigError(std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message), location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

enum class OutputFormat { Csv, Structured };

struct TauGrid {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 0;
  bool log = false;
};

struct OmegaGrid {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 0;
};

struct RunConfig {
  CavityConfig cavity;
  QuadratureSpec quadrature;
  bool rel_tol_set = false;  // quadrature.rel_tol came from the file
  std::optional<TauGrid> sweep;
  std::optional<OmegaGrid> spectrum;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> output_path;
  std::optional<double> fresnel_number;
};

struct ParseOptions {
  // Reject mirrors that fail check_passivity on the default grid.
  bool passivity_prescreen = true;
};

RunConfig parse_config(std::string_view text, const ParseOptions& options = {});

// Canonical JSON for a configuration, in its own unit system.
nlohmann::json config_to_json(const RunConfig& config);

// Grid points (internal units) for the sweep and spectrum sections.
std::vector<double> make_grid(const TauGrid& grid);
std::vector<double> make_grid(const OmegaGrid& grid);

}  // namespace casimir
