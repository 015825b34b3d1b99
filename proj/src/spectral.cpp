#include "casimir/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kResonanceGuard = 1e-14;

struct RoundTrip {
  cplx R;     // rbar_1 r_2
  cplx loop;  // R e^{2 i omega tau}
};

RoundTrip round_trip(const CavityConfig& cavity, double omega) {
  if (!(omega > 0.0)) throw DomainError(fmt::format("spectral quantities need omega > 0, got {}", omega));
  const auto at = FrequencyPoint::real(omega);
  const cplx R = stack_amplitudes(cavity.mirror1, at).r_bar * stack_amplitudes(cavity.mirror2, at).r;
  return {R, R * std::polar(1.0, 2.0 * omega * cavity.tau)};
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

double airy(const CavityConfig& cavity, double omega) {
  const RoundTrip rt = round_trip(cavity, omega);
  const double gap = std::abs(1.0 - rt.loop);
  const double gain = std::abs(rt.R);
  if (gap < kResonanceGuard) throw DivergentResonanceError(fmt::format("Airy function diverges at omega = {}", omega));
  return std::max(0.0, (1.0 - gain * gain) / (gap * gap));
}

std::complex<double> loop_function(const CavityConfig& cavity, double omega) {
  const RoundTrip rt = round_trip(cavity, omega);
  const cplx gap = 1.0 - rt.loop;
  if (std::abs(gap) < kResonanceGuard)
    throw DivergentResonanceError(fmt::format("loop function diverges at omega = {}", omega));
  return rt.loop / gap;
}

std::vector<Resonance> find_resonances(const CavityConfig& cavity, double omega_min, double omega_max,
                                       std::size_t grid_points) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) throw DomainError("resonance search needs 0 < omega_min < omega_max");
  if (grid_points < 3) throw DomainError("resonance search needs at least 3 grid points");
  const double step = (omega_max - omega_min) / static_cast<double>(grid_points - 1);
  const double free_spectral_range = kPi / cavity.tau;
  if (step > free_spectral_range / 20.0)
    throw DomainError(fmt::format("grid step {} exceeds free spectral range / 20 = {}", step, free_spectral_range / 20.0));

  auto g_or_nan = [&](double omega) {
    try {
      return airy(cavity, omega);
    } catch (const DivergentResonanceError&) {
      return nan();
    }
  };

  std::vector<double> omega(grid_points), g(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    omega[i] = omega_min + step * static_cast<double>(i);
    g[i] = g_or_nan(omega[i]);
  }

  std::vector<Resonance> out;
  for (std::size_t i = 1; i + 1 < grid_points; ++i) {
    if (!(g[i] > g[i - 1] && g[i] >= g[i + 1])) continue;

    Resonance res;
    const auto [peak, neg_g] = boost::math::tools::brent_find_minima(
        [&](double w) {
          const double v = g_or_nan(w);
          return std::isnan(v) ? -std::numeric_limits<double>::max() : -v;
        },
        omega[i - 1], omega[i + 1], std::numeric_limits<double>::digits);
    res.omega_peak = peak;
    res.g_peak = -neg_g;

    // Half-maximum crossings, searched only up to the neighbouring minima.
    const double half = 0.5 * res.g_peak;
    auto crossing = [&](std::ptrdiff_t dir) -> std::optional<double> {
      std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i);
      while (true) {
        const std::ptrdiff_t k = j + dir;
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(grid_points) || std::isnan(g[k])) return std::nullopt;
        if (g[k] < half) {
          const double near = j == static_cast<std::ptrdiff_t>(i) ? res.omega_peak : omega[j];
          const double lo = std::min(near, omega[k]);
          const double hi = std::max(near, omega[k]);
          boost::uintmax_t iters = 200;
          const auto root = boost::math::tools::toms748_solve(
              [&](double w) { return g_or_nan(w) - half; }, lo, hi,
              boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3), iters);
          return 0.5 * (root.first + root.second);
        }
        if (g[k] > g[j]) return std::nullopt;  // climbed into the next peak
        j = k;
      }
    };
    const auto left = crossing(-1);
    const auto right = crossing(+1);
    if (left && right) {
      res.fwhm = *right - *left;
      res.finesse = free_spectral_range / *res.fwhm;
    }
    out.push_back(res);
  }
  return out;
}

double theta_dispersion(const MirrorStack& stack, const DispersionSpec& spec) {
  const auto* layers = std::get_if<LayeredMirror>(&stack.variant());
  if (!layers) throw UnsupportedError("dispersion theta is defined for layered dielectric stacks only");
  if (!stack.is_analytic()) throw UnsupportedError("dispersion theta needs real-axis permittivities");
  if (spec.periods < 2) throw DomainError("dispersion theta needs at least 2 periods");

  double xi_min = std::numeric_limits<double>::infinity();
  for (const auto& slab : layers->slabs) {
    const double eps0 = eval_imag(slab.model, 0.0);
    if (!std::isfinite(eps0)) throw UnsupportedError("dispersion theta: permittivity diverges at zero frequency");
    if (eps0 == 1.0 || slab.thickness_time == 0.0) continue;
    xi_min = std::min(xi_min, std::sqrt(eps0) * slab.thickness_time);
  }
  if (!std::isfinite(xi_min)) return 0.0;  // transparent stack

  const double period = kPi / xi_min;
  auto minus_re_r = [&](double w) { return -stack_amplitudes(stack, FrequencyPoint::real(w)).r.real(); };
  auto integrand = [&](double w) { return minus_re_r(w) / (w * w); };

  double total = 0.0;
  double quad_error = 0.0;
  bool converged = true;
  for (std::size_t k = 0; k < spec.periods; ++k) {
    const double a = period * static_cast<double>(k);
    // Late panels nearly cancel; judge them against the running total.
    const double abs_tol = spec.rel_tol * std::abs(total) / static_cast<double>(spec.periods);
    const auto q = integrate(integrand, a, a + period, spec.rel_tol, abs_tol, spec.max_subdivisions);
    total += q.value;
    quad_error += q.error;
    converged = converged && q.converged;
  }

  // Averaged remainder: int_W^inf <-Re r> / w^2 dw = <-Re r> / W.
  const double W = period * static_cast<double>(spec.periods);
  auto window_mean = [&](double a) {
    return integrate(minus_re_r, a, a + period, spec.rel_tol, 0.0, spec.max_subdivisions).value / period;
  };
  const double mean_last = window_mean(W - period);
  const double mean_prev = window_mean(W - 2.0 * period);
  total += mean_last / W;

  const double theta = 2.0 / kPi * total;
  const double error = 2.0 / kPi * (quad_error + std::abs(mean_last - mean_prev) / W);
  if (!converged || error > 1e-3 * std::abs(theta) + 1e-12)
    throw AccuracyError(fmt::format("dispersion theta not settled after {} periods (error {:.3e})", spec.periods, error),
                        theta, error);
  return theta;
}

std::vector<SpectralSample> spectrum(const CavityConfig& cavity, std::span<const double> omega_grid) {
  std::vector<SpectralSample> out;
  out.reserve(omega_grid.size());
  for (const double omega : omega_grid) {
    SpectralSample s;
    s.omega = omega;
    try {
      s.g = airy(cavity, omega);
      s.loop_f = loop_function(cavity, omega);
      s.density = omega * (1.0 - s.g) / (2.0 * kPi);
    } catch (const Error& e) {
      s.g = nan();
      s.loop_f = {nan(), nan()};
      s.density = nan();
      s.error = e.what();
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace casimir
