#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace casimir {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Globally adaptive 15/31-point Gauss-Kronrod integration of f over [a, b]
// (GSL qag). The interval is first split at the given breakpoints (those
// strictly inside (a, b)); each panel then runs with the same tolerances.
// Exceptions thrown by f are propagated after the integrator unwinds.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                           double abs_tol, std::size_t max_subdivisions, std::span<const double> breakpoints = {});

}  // namespace casimir
