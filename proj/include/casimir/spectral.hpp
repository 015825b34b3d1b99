#pragma once

// Real-frequency diagnostics of a cavity: the Airy function g, the
// roundtrip loop function f, resonance peaks and the signed spectral density
// of the force. None of these is used to compute the force itself.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir/force.hpp"

namespace casimir {

// g = (1 - |R|^2) / |1 - R e^{2 i omega tau}|^2 with R = rbar_1 r_2 at omega.
// Throws DivergentResonanceError at an exact resonance of a lossless cavity.
double airy(const CavityConfig& cavity, double omega);

// f = R e^{2 i omega tau} / (1 - R e^{2 i omega tau}).
std::complex<double> loop_function(const CavityConfig& cavity, double omega);

struct Resonance {
  double omega_peak = 0.0;
  double g_peak = 0.0;
  std::optional<double> fwhm;     // empty when g never falls to half the peak nearby
  std::optional<double> finesse;  // free spectral range pi/tau over fwhm
};

// Local maxima of g on a uniform grid of `grid_points` frequencies over
// [omega_min, omega_max], each refined by Brent maximisation between its grid
// neighbours. The grid step must not exceed pi / (20 tau).
std::vector<Resonance> find_resonances(const CavityConfig& cavity, double omega_min, double omega_max,
                                       std::size_t grid_points);

struct DispersionSpec {
  std::size_t periods = 1000;
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = 200;
};

// theta from (2/pi) int_0^inf (-Re r[omega]) / omega^2 domega for a layered
// stack. The integral runs over whole periods pi/xi of the optically thinnest
// reflecting slab (the longest period) and
// the remainder uses the period-averaged reflection. Throws AccuracyError
// (with the partial value) when the averaged tail is not settled.
double theta_dispersion(const MirrorStack& stack, const DispersionSpec& spec = {});

struct SpectralSample {
  double omega = 0.0;
  double g = 0.0;
  std::complex<double> loop_f{0.0};
  double density = 0.0;  // omega (1 - g) / (2 pi); positive values pull the mirrors together
  std::string error;     // non-empty when this point could not be evaluated

  bool ok() const noexcept { return error.empty(); }
};

// Per-point airy, loop and density; failing points carry their error.
std::vector<SpectralSample> spectrum(const CavityConfig& cavity, std::span<const double> omega_grid);

}  // namespace casimir
