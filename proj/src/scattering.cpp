#include "casimir/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

using cplx = std::complex<double>;

constexpr double kSingularTransmission = 1e-300;
constexpr double kDegenerateDenominator = 1e-14;

template <class T>
struct Amplitudes {
  T r;
  T r_bar;
  T t;
};

// e^z - 1 without cancellation for small |z|.
double expm1_(double z) { return std::expm1(z); }
cplx expm1_(cplx z) {
  const double half_sin = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * half_sin * half_sin,
          std::exp(z.real()) * std::sin(z.imag())};
}

template <class T>
Amplitudes<T> slab_core(T eps, double thickness, T p) {
  if (thickness == 0.0 || p == T(0.0)) return {T(0.0), T(0.0), T(1.0)};
  const T n = std::sqrt(eps);
  const T rho = (n - 1.0) / (n + 1.0);
  const T xi = n * thickness;
  const T em1 = expm1_(-2.0 * p * xi);  // e^{-2 p xi} - 1
  const T one_minus_rho2 = 4.0 * n / ((n + 1.0) * (n + 1.0));
  const T denom = one_minus_rho2 - rho * rho * em1;
  const T r = rho * em1 / denom;
  const T t = one_minus_rho2 * std::exp(-p * xi) / denom;
  return {r, r, t};
}

template <class T>
Amplitudes<T> compose_core(const Amplitudes<T>& a, const Amplitudes<T>& b) {
  const T denom = 1.0 - a.r_bar * b.r;
  if (std::abs(denom) < kDegenerateDenominator)
    throw DegenerateCompositionError(
        fmt::format("resonant composition: |1 - rbar_A r_B| = {:.3e}", std::abs(denom)));
  return {a.r + b.r * a.t * a.t / denom, b.r_bar + a.r_bar * b.t * b.t / denom, a.t * b.t / denom};
}

double checked_eps_imag(const PermittivityModel& model, double p) {
  const double eps = eval_imag(model, p);
  if (!std::isfinite(eps)) throw DomainError(fmt::format("permittivity diverges at p = {}", p));
  return eps;
}

Amplitudes<double> slab_real_path(const Slab& slab, double p) {
  if (!(p >= 0.0)) throw DomainError(fmt::format("slab amplitudes need p >= 0, got {}", p));
  return slab_core<double>(checked_eps_imag(slab.model, p), slab.thickness_time, p);
}

Amplitudes<cplx> slab_complex_path(const Slab& slab, cplx p) {
  return slab_core<cplx>(eval_laplace(slab.model, p), slab.thickness_time, p);
}

Amplitudes<double> layers_real_path(const LayeredMirror& m, double p) {
  Amplitudes<double> acc{0.0, 0.0, 1.0};
  for (const auto& slab : m.slabs) acc = compose_core(acc, slab_real_path(slab, p));
  return acc;
}

Amplitudes<cplx> layers_complex_path(const LayeredMirror& m, cplx p) {
  Amplitudes<cplx> acc{0.0, 0.0, 1.0};
  for (const auto& slab : m.slabs) acc = compose_core(acc, slab_complex_path(slab, p));
  return acc;
}

template <class T>
TwoPortScattering to_two_port(FrequencyPoint at, const Amplitudes<T>& a) {
  return {at, a.r, a.r_bar, a.t};
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double toy_reflection_imag(const NarrowBandToyMirror& m, double p) {
  return -std::min(std::min(p, m.cutoff) * m.theta, 1.0);
}

cplx toy_reflection(const NarrowBandToyMirror& m, cplx p) {
  const double mod = std::abs(p);
  const cplx q = mod <= m.cutoff ? p : p * (m.cutoff / mod);
  cplx r = -q * m.theta;
  if (std::abs(r) > 1.0) r /= std::abs(r);
  return r;
}

Amplitudes<double> stack_real_path(const MirrorStack& stack, double p) {
  if (!(p >= 0.0)) throw DomainError(fmt::format("imaginary-axis amplitudes need p >= 0, got {}", p));
  return std::visit(overloaded{
                        [p](const LayeredMirror& m) { return layers_real_path(m, p); },
                        [](const PerfectMirror&) { return Amplitudes<double>{-1.0, -1.0, 0.0}; },
                        [](const ConstantReflectivityMirror& m) { return Amplitudes<double>{m.eta, m.eta, 0.0}; },
                        [p](const MagneticMirror& m) {
                          auto a = layers_real_path(m.base, p);
                          return Amplitudes<double>{-a.r, -a.r_bar, a.t};
                        },
                        [p](const NarrowBandToyMirror& m) {
                          const double r = toy_reflection_imag(m, p);
                          return Amplitudes<double>{r, r, 0.0};
                        },
                    },
                    stack.variant());
}

Amplitudes<cplx> stack_complex_path(const MirrorStack& stack, cplx p) {
  return std::visit(overloaded{
                        [p](const LayeredMirror& m) { return layers_complex_path(m, p); },
                        [](const PerfectMirror&) { return Amplitudes<cplx>{-1.0, -1.0, 0.0}; },
                        [](const ConstantReflectivityMirror& m) { return Amplitudes<cplx>{m.eta, m.eta, 0.0}; },
                        [p](const MagneticMirror& m) {
                          auto a = layers_complex_path(m.base, p);
                          return Amplitudes<cplx>{-a.r, -a.r_bar, a.t};
                        },
                        [p](const NarrowBandToyMirror& m) {
                          const cplx r = toy_reflection(m, p);
                          return Amplitudes<cplx>{r, r, 0.0};
                        },
                    },
                    stack.variant());
}

void check_slabs(const std::vector<Slab>& slabs) {
  for (std::size_t i = 0; i < slabs.size(); ++i)
    if (!(slabs[i].thickness_time >= 0.0) || !std::isfinite(slabs[i].thickness_time))
      throw DomainError(fmt::format("layer {}: thickness_time >= 0 violated", i));
}

}  // namespace

Eigen::Matrix2cd TwoPortScattering::matrix() const {
  Eigen::Matrix2cd s;
  s << r, t, t, r_bar;
  return s;
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& other) const {
  if (!(at == other.at)) throw DomainError("transfer matrices evaluated at different frequencies");
  return {at, m * other.m};
}

MirrorStack MirrorStack::layers(std::vector<Slab> slabs) {
  check_slabs(slabs);
  return MirrorStack(LayeredMirror{std::move(slabs)});
}

MirrorStack MirrorStack::perfect() { return MirrorStack(PerfectMirror{}); }

MirrorStack MirrorStack::constant_reflectivity(double eta) {
  if (!(std::abs(eta) <= 1.0)) throw DomainError(fmt::format("constant reflectivity needs |eta| <= 1, got {}", eta));
  return MirrorStack(ConstantReflectivityMirror{eta});
}

MirrorStack MirrorStack::unchecked_constant_reflectivity(double eta) {
  return MirrorStack(ConstantReflectivityMirror{eta});
}

MirrorStack MirrorStack::magnetic(std::vector<Slab> base) {
  check_slabs(base);
  return MirrorStack(MagneticMirror{LayeredMirror{std::move(base)}});
}

MirrorStack MirrorStack::narrowband_toy(double theta, std::optional<double> cutoff) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("narrow-band toy needs theta >= 0");
  double c = cutoff.value_or(theta > 0.0 ? 1.0 / theta : std::numeric_limits<double>::infinity());
  if (!(c >= 0.0)) throw DomainError("narrow-band toy needs cutoff >= 0");
  return MirrorStack(NarrowBandToyMirror{theta, c});
}

bool MirrorStack::is_analytic() const noexcept {
  auto layers_analytic = [](const LayeredMirror& m) {
    return std::all_of(m.slabs.begin(), m.slabs.end(), [](const Slab& s) { return s.model.is_analytic(); });
  };
  if (const auto* l = std::get_if<LayeredMirror>(&stack_)) return layers_analytic(*l);
  if (const auto* m = std::get_if<MagneticMirror>(&stack_)) return layers_analytic(m->base);
  return true;
}

std::vector<double> MirrorStack::kinks() const {
  std::vector<double> out;
  if (const auto* toy = std::get_if<NarrowBandToyMirror>(&stack_)) {
    if (toy->theta > 0.0) {
      const double saturation = 1.0 / toy->theta;
      if (std::isfinite(toy->cutoff) && toy->cutoff > 0.0) out.push_back(toy->cutoff);
      if (saturation < toy->cutoff) out.push_back(saturation);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

TwoPortScattering slab_amplitudes_imag(const Slab& slab, double p) {
  return to_two_port(FrequencyPoint::imaginary(p), slab_real_path(slab, p));
}

TwoPortScattering slab_amplitudes_real(const Slab& slab, double omega) {
  if (!(omega > 0.0)) throw DomainError(fmt::format("real-axis amplitudes need omega > 0, got {}", omega));
  const auto at = FrequencyPoint::real(omega);
  return to_two_port(at, slab_complex_path(slab, at.p()));
}

TwoPortScattering slab_amplitudes(const Slab& slab, FrequencyPoint at) {
  switch (at.axis()) {
    case Axis::Imaginary:
      return slab_amplitudes_imag(slab, at.imag_p());
    case Axis::Real:
      return slab_amplitudes_real(slab, at.omega());
    case Axis::Complex:
      break;
  }
  return to_two_port(at, slab_complex_path(slab, at.p()));
}

TransferMatrix transfer_from_scattering(const TwoPortScattering& s) {
  if (!(std::abs(s.t) > kSingularTransmission))
    throw SingularError("transmission too small for a transfer matrix (opaque mirror)");
  TransferMatrix T;
  T.at = s.at;
  T.m << (s.t * s.t - s.r * s.r_bar) / s.t, s.r / s.t, -s.r_bar / s.t, 1.0 / s.t;
  return T;
}

TwoPortScattering scattering_from_transfer(const TransferMatrix& T) {
  const cplx t22 = T.m(1, 1);
  if (!(std::abs(t22) > 0.0) || !std::isfinite(std::abs(t22))) throw SingularError("transfer matrix has T22 = 0");
  return {T.at, T.m(0, 1) / t22, -T.m(1, 0) / t22, 1.0 / t22};
}

TwoPortScattering compose(const TwoPortScattering& a, const TwoPortScattering& b) {
  if (!(a.at == b.at)) throw DomainError("cannot compose two-ports evaluated at different frequencies");
  const Amplitudes<cplx> out = compose_core(Amplitudes<cplx>{a.r, a.r_bar, a.t}, Amplitudes<cplx>{b.r, b.r_bar, b.t});
  return to_two_port(a.at, out);
}

TwoPortScattering stack_amplitudes(const MirrorStack& stack, FrequencyPoint at) {
  switch (at.axis()) {
    case Axis::Imaginary:
      return to_two_port(at, stack_real_path(stack, at.imag_p()));
    case Axis::Real:
      if (!(at.omega() > 0.0))
        throw DomainError(fmt::format("real-axis amplitudes need omega > 0, got {}", at.omega()));
      break;
    case Axis::Complex:
      break;
  }
  return to_two_port(at, stack_complex_path(stack, at.p()));
}

ImagReflections stack_reflections_imag(const MirrorStack& stack, double p) {
  const auto a = stack_real_path(stack, p);
  return {a.r, a.r_bar};
}

ImpedanceMatrix impedance_from_scattering(const TwoPortScattering& s) {
  const Eigen::Matrix2cd S = s.matrix();
  const Eigen::Matrix2cd one = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd denom = one - S;
  if (std::abs(denom.determinant()) < 1e-14)
    throw SingularError("1 - S is singular: scattering matrix has an eigenvalue 1");
  return {(one + S) * denom.inverse()};
}

double impedance_passivity_margin(const ImpedanceMatrix& z) {
  const Eigen::Matrix2cd h = z.z + z.z.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double scattering_passivity_margin(const Eigen::Matrix2cd& s) {
  const Eigen::Matrix2cd h = Eigen::Matrix2cd::Identity() - s * s.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

std::vector<std::complex<double>> default_passivity_grid() {
  std::vector<cplx> grid;
  constexpr double pi = std::numbers::pi;
  for (int i = 0; i <= 120; ++i) grid.emplace_back(std::pow(10.0, -6.0 + i / 10.0), 0.0);
  for (double angle : {pi / 4, -pi / 4, pi / 2, -pi / 2}) {
    for (int i = 0; i <= 48; ++i) grid.push_back(std::polar(std::pow(10.0, -6.0 + i / 4.0), angle));
  }
  return grid;
}

namespace {

bool is_on_imaginary_axis(cplx p) { return p.imag() == 0.0; }

// Amplitudes at a grid point, or nullopt when the stack cannot be evaluated
// there (tabulated data off the real p axis, non-finite values).
std::optional<TwoPortScattering> grid_amplitudes(const MirrorStack& stack, cplx p) {
  if (p.real() < 0.0) throw DomainError(fmt::format("passivity grid point ({}, {}) has Re p < 0", p.real(), p.imag()));
  if (!is_on_imaginary_axis(p) && !stack.is_analytic()) return std::nullopt;
  try {
    const auto at = is_on_imaginary_axis(p) ? FrequencyPoint::imaginary(p.real()) : FrequencyPoint::laplace(p);
    auto s = stack_amplitudes(stack, at);
    if (!std::isfinite(std::abs(s.r)) || !std::isfinite(std::abs(s.r_bar)) || !std::isfinite(std::abs(s.t)))
      return std::nullopt;
    return s;
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const DegenerateCompositionError&) {
    return std::nullopt;
  }
}

}  // namespace

PassivityReport check_passivity(const MirrorStack& stack, std::span<const std::complex<double>> grid) {
  PassivityReport report;
  for (const cplx p : grid) {
    const auto s = grid_amplitudes(stack, p);
    if (!s) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    const double margin = scattering_passivity_margin(s->matrix());
    report.max_reflection = std::max({report.max_reflection, std::abs(s->r), std::abs(s->r_bar)});
    if (margin < report.min_eigenvalue) report.min_eigenvalue = margin;
    if (margin < -kPassivityTolerance && report.passed) {
      report.passed = false;
      report.violation_at = p;
    }
  }
  return report;
}

CavityPassivityReport check_passivity(const MirrorStack& mirror1, const MirrorStack& mirror2,
                                      std::span<const std::complex<double>> grid) {
  CavityPassivityReport report;
  report.mirror1 = check_passivity(mirror1, grid);
  report.mirror2 = check_passivity(mirror2, grid);
  for (const cplx p : grid) {
    const auto s1 = grid_amplitudes(mirror1, p);
    const auto s2 = grid_amplitudes(mirror2, p);
    if (s1 && s2) report.max_loop_gain = std::max(report.max_loop_gain, std::abs(s1->r_bar * s2->r));
  }
  report.passed = report.mirror1.passed && report.mirror2.passed && report.max_loop_gain <= 1.0 + kPassivityTolerance;
  return report;
}

}  // namespace casimir
