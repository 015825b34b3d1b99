#pragma once

// Casimir force between two mirrors in a one-dimensional cavity.
//
// mirror1 sits on the left of the cavity, mirror2 on the right. The force is
// computed on the imaginary frequency axis from the product of the
// inner-facing reflections R(p) = rbar_1(ip) r_2(ip):
//
//   F = 1/(4 pi tau^2) int_0^inf u R e^-u / (1 - R e^-u) du,   u = 2 p tau,
//
// in units hbar = c = 1. Positive F is attraction.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir/scattering.hpp"
#include "casimir/units.hpp"

namespace casimir {

struct CavityConfig {
  MirrorStack mirror1;
  MirrorStack mirror2;
  double tau = 1.0;  // time of flight q / c
  Units units;
};

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_subdivisions = 1000;
  double u_max = 60.0;  // integration cut in u = 2 p tau; the rest is bounded analytically
};

// Throws DomainError unless rel_tol > 0, abs_tol >= 0, u_max > 0, max_subdivisions > 0.
void validate(const QuadratureSpec& spec);

struct BoundFlags {
  bool within_perfect = true;  // |F| <= F_P up to the error estimate
  bool attractive = true;      // F >= 0 up to the error estimate
};

struct ForceResult {
  double tau = 0.0;
  double force = 0.0;
  double error_estimate = 0.0;
  double f_perfect = 0.0;
  double ratio = 0.0;
  BoundFlags bounds;
};

struct GradientResult {
  double tau = 0.0;
  double gradient = 0.0;  // dF/dtau
  double error_estimate = 0.0;
};

// pi / (24 tau^2). Throws DomainError for tau <= 0.
double perfect_force(double tau);

// sup over p >= 0 of |rbar_1(ip) r_2(ip)|, sampled on a log grid of
// u = 2 p tau in [1e-8, 1e8] plus the kinks of both mirrors.
double loop_gain_sup(const MirrorStack& mirror1, const MirrorStack& mirror2, double tau);

// Throws UnstableCavityError when the loop gain exceeds one and
// AccuracyError (carrying the best estimate) when quadrature does not converge.
ForceResult force_imag(const CavityConfig& cavity, const QuadratureSpec& spec = {});

// dF/dtau = -1/(4 pi tau^3) int u^2 R e^-u / (1 - R e^-u)^2 du.
GradientResult force_gradient(const CavityConfig& cavity, const QuadratureSpec& spec = {});

// theta = sum over layers of (eps(0) - 1)/2 * l/c, the minus slope of r[ip] at
// p = 0. Layered stacks and narrow-band toys only.
double theta_static(const MirrorStack& stack);

struct NarrowBandForce {
  double force = 0.0;
  double ratio = 0.0;              // force / perfect_force(tau)
  bool outside_validity = false;   // some theta / tau > 0.1
};

// 3 theta1 theta2 / (8 pi tau^4) and its ratio to the perfect-mirror force.
NarrowBandForce narrowband_force(double theta1, double theta2, double tau);

inline constexpr double kNarrowBandValidity = 0.1;

struct FresnelEstimate {
  double force = 0.0;
  bool qualitative = true;
};

// One-dimensional force times the number of coupled transverse modes.
FresnelEstimate fresnel_scale(double force_1d, double fresnel_number);

struct SweepPoint {
  double tau = 0.0;
  std::optional<ForceResult> result;
  std::string error;  // set when result is empty
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool non_increasing = true;  // over successful points, within error estimates
  bool all_succeeded = true;
};

// Evaluates force_imag at every tau of a strictly increasing positive grid.
// Points are computed by up to `workers` threads (0: hardware concurrency);
// the result does not depend on the worker count.
SweepResult sweep_force(const CavityConfig& cavity, std::span<const double> tau_grid,
                        const QuadratureSpec& spec = {}, unsigned workers = 0);

}  // namespace casimir
