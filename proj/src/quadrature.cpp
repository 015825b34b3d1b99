#include "casimir/quadrature.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace casimir {

namespace {

struct Trampoline {
  const std::function<double(double)>* f;
  std::exception_ptr error;
};

double call_trampoline(double x, void* params) {
  auto* t = static_cast<Trampoline*>(params);
  if (t->error) return std::numeric_limits<double>::quiet_NaN();
  try {
    return (*t->f)(x);
  } catch (...) {
    t->error = std::current_exception();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void disable_gsl_abort() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

using Workspace = std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)>;

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                           double abs_tol, std::size_t max_subdivisions, std::span<const double> breakpoints) {
  disable_gsl_abort();
  QuadratureResult total;
  if (a == b) return total;

  std::vector<double> edges{a};
  for (double x : breakpoints)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin() + 1, edges.end());
  edges.push_back(b);

  const std::size_t limit = std::max<std::size_t>(max_subdivisions, 1);
  Workspace ws(gsl_integration_workspace_alloc(limit), &gsl_integration_workspace_free);
  // qag refuses relative tolerances below 50 eps when abs_tol is zero.
  const double eps_rel = std::max(rel_tol, 50.0 * DBL_EPSILON);

  Trampoline tramp{&f, nullptr};
  gsl_function fn{&call_trampoline, &tramp};
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    double value = 0.0;
    double error = 0.0;
    const int status =
        gsl_integration_qag(&fn, edges[k], edges[k + 1], abs_tol, eps_rel, limit, GSL_INTEG_GAUSS31, ws.get(),
                            &value, &error);
    if (tramp.error) std::rethrow_exception(tramp.error);
    total.value += value;
    total.error += error;
    // GSL_EROUND with an error already inside tolerance is still a result.
    if (status != GSL_SUCCESS && error > std::max(abs_tol, eps_rel * std::abs(value))) total.converged = false;
  }
  if (!std::isfinite(total.value)) total.converged = false;
  return total;
}

}  // namespace casimir
