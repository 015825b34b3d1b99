#include "casimir/force.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStabilitySlack = 1e-12;

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError(fmt::format("tau > 0 violated: tau = {}", tau));
}

// Inner-face reflection product at p.
double loop_gain(const MirrorStack& m1, const MirrorStack& m2, double p) {
  return stack_reflections_imag(m1, p).right_face * stack_reflections_imag(m2, p).left_face;
}

std::vector<double> kinks_in_u(const CavityConfig& cavity, double u_max) {
  std::vector<double> out;
  for (const MirrorStack* m : {&cavity.mirror1, &cavity.mirror2})
    for (double p : m->kinks()) {
      const double u = 2.0 * p * cavity.tau;
      if (u > 0.0 && u < u_max) out.push_back(u);
    }
  std::sort(out.begin(), out.end());
  return out;
}

// 1 - R e^-u, accurate when R is close to one and u small.
double one_minus_loop(double R, double u) { return (1.0 - R) - R * std::expm1(-u); }

struct Integrated {
  double value;
  double error;
};

// Shared driver for the force and its tau-derivative: stability check,
// quadrature on [0, u_max] and the analytic tail bound.
template <class Integrand, class TailBound>
Integrated integrate_loop(const CavityConfig& cavity, const QuadratureSpec& spec, Integrand integrand,
                          TailBound tail_bound, const char* what) {
  validate(spec);
  check_tau(cavity.tau);
  const double sup = loop_gain_sup(cavity.mirror1, cavity.mirror2, cavity.tau);
  if (sup > 1.0 + kStabilitySlack)
    throw UnstableCavityError(fmt::format("loop gain |r1 r2| reaches {} > 1 on the imaginary axis", sup));
  const double bounded_sup = std::min(sup, 1.0);

  const double tau = cavity.tau;
  auto f = [&](double u) {
    const double p = u / (2.0 * tau);
    return integrand(u, loop_gain(cavity.mirror1, cavity.mirror2, p));
  };
  const auto kinks = kinks_in_u(cavity, spec.u_max);
  const QuadratureResult q =
      integrate(f, 0.0, spec.u_max, spec.rel_tol, spec.abs_tol, spec.max_subdivisions, kinks);
  const double error = q.error + tail_bound(spec.u_max, bounded_sup);
  if (!q.converged)
    throw AccuracyError(fmt::format("{} quadrature did not converge (error estimate {:.3e})", what, q.error),
                        q.value, error);
  return {q.value, error};
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (!(spec.rel_tol > 0.0)) throw DomainError("quadrature rel_tol > 0 violated");
  if (!(spec.abs_tol >= 0.0)) throw DomainError("quadrature abs_tol >= 0 violated");
  if (!(spec.u_max > 0.0) || !std::isfinite(spec.u_max)) throw DomainError("quadrature u_max > 0 violated");
  if (spec.max_subdivisions == 0) throw DomainError("quadrature max_subdivisions > 0 violated");
}

double perfect_force(double tau) {
  check_tau(tau);
  return kPi / (24.0 * tau * tau);
}

double loop_gain_sup(const MirrorStack& mirror1, const MirrorStack& mirror2, double tau) {
  check_tau(tau);
  double sup = 0.0;
  constexpr int kPerDecade = 20;
  for (int i = 0; i <= 16 * kPerDecade; ++i) {
    const double u = std::pow(10.0, -8.0 + static_cast<double>(i) / kPerDecade);
    sup = std::max(sup, std::abs(loop_gain(mirror1, mirror2, u / (2.0 * tau))));
  }
  for (const MirrorStack* m : {&mirror1, &mirror2})
    for (double p : m->kinks()) sup = std::max(sup, std::abs(loop_gain(mirror1, mirror2, p)));
  return sup;
}

ForceResult force_imag(const CavityConfig& cavity, const QuadratureSpec& spec) {
  auto integrand = [](double u, double R) {
    if (R == 0.0) return 0.0;
    return u * R * std::exp(-u) / one_minus_loop(R, u);
  };
  // int_U^inf u e^-u du = (1 + U) e^-U, and |1 - R e^-u| >= 1 - sup e^-U.
  auto tail = [](double U, double sup) { return (1.0 + U) * std::exp(-U) * sup / (1.0 - sup * std::exp(-U)); };

  const double tau = cavity.tau;
  Integrated I{};
  try {
    I = integrate_loop(cavity, spec, integrand, tail, "force");
  } catch (const AccuracyError& e) {
    const double scale = 1.0 / (4.0 * kPi * tau * tau);
    throw AccuracyError(e.what(), e.best_estimate() * scale, e.error_estimate() * scale);
  }
  const double scale = 1.0 / (4.0 * kPi * tau * tau);

  ForceResult out;
  out.tau = tau;
  out.force = I.value * scale;
  out.error_estimate = I.error * scale;
  out.f_perfect = perfect_force(tau);
  out.ratio = out.force / out.f_perfect;
  const double slack = 10.0 * out.error_estimate + 1e-13 * out.f_perfect;
  out.bounds.within_perfect = std::abs(out.force) <= out.f_perfect + slack;
  out.bounds.attractive = out.force >= -slack;
  return out;
}

GradientResult force_gradient(const CavityConfig& cavity, const QuadratureSpec& spec) {
  auto integrand = [](double u, double R) {
    if (R == 0.0) return 0.0;
    const double d = one_minus_loop(R, u);
    return u * u * R * std::exp(-u) / (d * d);
  };
  // int_U^inf u^2 e^-u du = (U^2 + 2U + 2) e^-U.
  auto tail = [](double U, double sup) {
    const double d = 1.0 - sup * std::exp(-U);
    return (U * U + 2.0 * U + 2.0) * std::exp(-U) * sup / (d * d);
  };

  const double tau = cavity.tau;
  const double scale = -1.0 / (4.0 * kPi * tau * tau * tau);
  Integrated I{};
  try {
    I = integrate_loop(cavity, spec, integrand, tail, "force gradient");
  } catch (const AccuracyError& e) {
    throw AccuracyError(e.what(), e.best_estimate() * scale, e.error_estimate() * std::abs(scale));
  }
  return {tau, I.value * scale, I.error * std::abs(scale)};
}

double theta_static(const MirrorStack& stack) {
  if (const auto* toy = std::get_if<NarrowBandToyMirror>(&stack.variant())) return toy->theta;
  const auto* layers = std::get_if<LayeredMirror>(&stack.variant());
  if (!layers) throw UnsupportedError("theta is defined for layered dielectric stacks and narrow-band toys only");
  double theta = 0.0;
  for (const auto& slab : layers->slabs) {
    const double eps0 = eval_imag(slab.model, 0.0);
    if (!std::isfinite(eps0))
      throw UnsupportedError("theta undefined: a layer permittivity diverges at zero frequency");
    theta += 0.5 * (eps0 - 1.0) * slab.thickness_time;
  }
  return theta;
}

NarrowBandForce narrowband_force(double theta1, double theta2, double tau) {
  check_tau(tau);
  if (!(theta1 >= 0.0) || !(theta2 >= 0.0)) throw DomainError("narrow-band force needs theta >= 0");
  NarrowBandForce out;
  out.force = 3.0 * theta1 * theta2 / (8.0 * kPi * tau * tau * tau * tau);
  out.ratio = 9.0 * theta1 * theta2 / (kPi * kPi * tau * tau);
  out.outside_validity = std::max(theta1, theta2) / tau > kNarrowBandValidity;
  return out;
}

FresnelEstimate fresnel_scale(double force_1d, double fresnel_number) {
  if (!(fresnel_number >= 0.0)) throw DomainError("Fresnel number >= 0 violated");
  return {force_1d * fresnel_number, true};
}

SweepResult sweep_force(const CavityConfig& cavity, std::span<const double> tau_grid, const QuadratureSpec& spec,
                        unsigned workers) {
  validate(spec);
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > 0.0)) throw DomainError(fmt::format("sweep grid point {} is not positive", i));
    if (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))
      throw DomainError(fmt::format("sweep grid is not strictly increasing at point {}", i));
  }

  SweepResult out;
  out.points.resize(tau_grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tau_grid.size(); i = next++) {
      SweepPoint& pt = out.points[i];
      pt.tau = tau_grid[i];
      CavityConfig local = cavity;
      local.tau = tau_grid[i];
      try {
        pt.result = force_imag(local, spec);
      } catch (const Error& e) {
        pt.error = e.what();
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(tau_grid.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  const ForceResult* previous = nullptr;
  for (const auto& pt : out.points) {
    if (!pt.result) {
      out.all_succeeded = false;
      continue;
    }
    if (previous &&
        pt.result->force > previous->force + pt.result->error_estimate + previous->error_estimate +
                               1e-13 * std::abs(previous->force))
      out.non_increasing = false;
    previous = &*pt.result;
  }
  return out;
}

}  // namespace casimir
