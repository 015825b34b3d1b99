#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir/config.hpp"
#include "casimir/force.hpp"
#include "casimir/spectral.hpp"

namespace casimir::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericError = 3,
  kBoundViolation = 4,
};

// Default relative tolerance override, read when neither --tol nor the
// config file sets one.
inline constexpr const char* kToleranceEnv = "CASIMIR_TOL";

struct ForceReport {
  ForceResult force;
  GradientResult gradient;
  std::optional<FresnelEstimate> fresnel;
};

struct ThetaRow {
  std::string mirror;
  std::optional<double> theta_static;
  std::optional<double> theta_dispersion;
};

// Tables are CSV (header row, fixed columns, %.17e numbers, LF endings) or
// structured JSON mirroring the result fields. Values are converted to the
// configuration's unit system here and nowhere else.
std::string emit_force(const ForceReport& report, OutputFormat format, const Units& units);
std::string emit_sweep(const SweepResult& sweep, OutputFormat format, const Units& units);
std::string emit_spectrum(std::span<const SpectralSample> samples, OutputFormat format, const Units& units);
std::string emit_theta(std::span<const ThetaRow> rows, OutputFormat format, const Units& units);
std::string emit_check(const CavityPassivityReport& report, OutputFormat format, const Units& units);

// Human-readable summary printed by `force`.
std::string force_summary(const ForceReport& report, const Units& units);

// Entry point of the `casimir` executable; args exclude the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace casimir::cli
