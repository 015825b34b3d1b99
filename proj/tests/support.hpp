#pragma once

// Shared generators and oracles for the test suites. Nothing here calls into
// the library's quadrature or composition code paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "casimir/scattering.hpp"

namespace casimir::testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Dilogarithm series sum_{n=1}^{terms} x^n / n^2.
inline double li2_series(double x, int terms = 200) {
  double sum = 0.0;
  double power = 1.0;
  for (int n = 1; n <= terms; ++n) {
    power *= x;
    sum += power / (static_cast<double>(n) * n);
  }
  return sum;
}

// Closed-form force for constant inner reflection product R, tau in natural units.
inline double constant_loop_force(double R, double tau) {
  return li2_series(R) / (4.0 * std::numbers::pi * tau * tau);
}

struct StackGenerator {
  std::mt19937_64 rng;
  double eps_min = 1.1;
  double eps_max = 16.0;
  double thick_min = 0.01;
  double thick_max = 1.0;
  std::size_t layers_min = 1;
  std::size_t layers_max = 5;

  explicit StackGenerator(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }

  PermittivityModel model(bool allow_lorentz = true) {
    if (!allow_lorentz || uniform(0.0, 1.0) < 0.6) return PermittivityModel::constant(uniform(eps_min, eps_max));
    // eps(0) = 1 + Omega^2 / omega0^2 kept inside [eps_min, eps_max]
    const double omega0 = log_uniform(0.3, 30.0);
    const double eps0 = uniform(eps_min, eps_max);
    const double strength = omega0 * std::sqrt(eps0 - 1.0);
    const double damping = uniform(0.0, 1.0) < 0.3 ? 0.0 : log_uniform(1e-3, 3.0);
    return PermittivityModel::lorentz({{strength, omega0, damping}});
  }

  std::vector<Slab> slabs(bool allow_lorentz = true) {
    const auto n = std::uniform_int_distribution<std::size_t>(layers_min, layers_max)(rng);
    std::vector<Slab> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({model(allow_lorentz), uniform(thick_min, thick_max)});
    return out;
  }

  MirrorStack dielectric(bool allow_lorentz = true) { return MirrorStack::layers(slabs(allow_lorentz)); }

  // Any passive mirror family: dielectric, constant eta, magnetic, narrow-band toy, perfect.
  MirrorStack passive() {
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
      case 0:
        return dielectric();
      case 1:
        return MirrorStack::constant_reflectivity(uniform(-1.0, 1.0));
      case 2:
        return MirrorStack::magnetic(slabs());
      case 3:
        return MirrorStack::narrowband_toy(log_uniform(1e-3, 3.0));
      default:
        return MirrorStack::perfect();
    }
  }
};

inline std::vector<double> log_grid(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

}  // namespace casimir::testing
