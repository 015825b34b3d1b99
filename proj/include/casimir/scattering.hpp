#pragma once

// Two-port descriptions of a mirror and their composition.
//
// A mirror maps incoming amplitudes on its left (L) and right (R) ports to
// outgoing ones through S = [[r, t], [t, rbar]]: r is the reflection seen from
// the left, rbar from the right, and t is shared by both directions
// (reciprocity). Stacks are listed left to right.
//
// Amplitudes are evaluated at a point of the complex frequency plane written
// through the Laplace variable p, omega = i p. The force integral lives on the
// positive imaginary frequency axis (p real), the spectral diagnostics on the
// real axis (p = -i omega).

#include <complex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "casimir/permittivity.hpp"

namespace casimir {

enum class Axis { Imaginary, Real, Complex };

class FrequencyPoint {
 public:
  static FrequencyPoint imaginary(double p) { return {Axis::Imaginary, {p, 0.0}}; }
  static FrequencyPoint real(double omega) { return {Axis::Real, {0.0, -omega}}; }
  static FrequencyPoint laplace(std::complex<double> p) { return {Axis::Complex, p}; }

  Axis axis() const noexcept { return axis_; }
  std::complex<double> p() const noexcept { return p_; }
  double imag_p() const noexcept { return p_.real(); }
  double omega() const noexcept { return -p_.imag(); }

  friend bool operator==(const FrequencyPoint&, const FrequencyPoint&) = default;

 private:
  FrequencyPoint(Axis axis, std::complex<double> p) : axis_(axis), p_(p) {}

  Axis axis_;
  std::complex<double> p_;
};

struct TwoPortScattering {
  FrequencyPoint at = FrequencyPoint::imaginary(0.0);
  std::complex<double> r{0.0};
  std::complex<double> r_bar{0.0};
  std::complex<double> t{1.0};

  static TwoPortScattering identity(FrequencyPoint at) { return {at, 0.0, 0.0, 1.0}; }

  // [[r, t], [t, rbar]]
  Eigen::Matrix2cd matrix() const;
};

// Relates (a_L^out, a_L^in) to (a_R^in, a_R^out). Multiplicative under
// stacking: T_AB = T_A T_B with A on the left.
struct TransferMatrix {
  FrequencyPoint at = FrequencyPoint::imaginary(0.0);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();

  std::complex<double> det() const { return m.determinant(); }
  TransferMatrix operator*(const TransferMatrix& other) const;
};

// e = Z h with h = a_in - a_out, e = a_in + a_out.
struct ImpedanceMatrix {
  Eigen::Matrix2cd z = Eigen::Matrix2cd::Identity();
};

struct Slab {
  PermittivityModel model;
  double thickness_time = 0.0;  // l / c
};

struct LayeredMirror {
  std::vector<Slab> slabs;
};

struct PerfectMirror {};

struct ConstantReflectivityMirror {
  double eta = 0.0;
};

// Dielectric stack whose reflection amplitudes have the opposite sign, an
// illustrative stand-in for a magnetic plate.
struct MagneticMirror {
  LayeredMirror base;
};

// r[ip] = -min(p, cutoff) theta, clamped to |r| <= 1; no transmission.
struct NarrowBandToyMirror {
  double theta = 0.0;
  double cutoff = 0.0;
};

class MirrorStack {
 public:
  using Variant =
      std::variant<LayeredMirror, PerfectMirror, ConstantReflectivityMirror, MagneticMirror, NarrowBandToyMirror>;

  MirrorStack() : stack_(LayeredMirror{}) {}

  static MirrorStack layers(std::vector<Slab> slabs);
  static MirrorStack perfect();
  // Throws DomainError unless |eta| <= 1.
  static MirrorStack constant_reflectivity(double eta);
  // Constant reflector without the passivity check, for diagnosing gain media.
  static MirrorStack unchecked_constant_reflectivity(double eta);
  static MirrorStack magnetic(std::vector<Slab> base);
  // cutoff defaults to 1/theta. Throws DomainError for theta < 0 or cutoff < 0.
  static MirrorStack narrowband_toy(double theta, std::optional<double> cutoff = std::nullopt);

  const Variant& variant() const noexcept { return stack_; }

  bool is_dielectric() const noexcept { return std::holds_alternative<LayeredMirror>(stack_); }
  // False when any layer uses tabulated data, which only exists for real p.
  bool is_analytic() const noexcept;
  // Points p > 0 where r[ip] is continuous but not smooth.
  std::vector<double> kinks() const;

 private:
  explicit MirrorStack(Variant v) : stack_(std::move(v)) {}

  Variant stack_;
};

// Amplitudes of a single slab on the imaginary axis; real valued, r <= 0 and
// 0 < t <= 1. Throws DomainError for p < 0.
TwoPortScattering slab_amplitudes_imag(const Slab& slab, double p);
// Same slab on the real axis. Throws UnsupportedError for tabulated models.
TwoPortScattering slab_amplitudes_real(const Slab& slab, double omega);
TwoPortScattering slab_amplitudes(const Slab& slab, FrequencyPoint at);

// Throws SingularError when |t| is too small to invert.
TransferMatrix transfer_from_scattering(const TwoPortScattering& s);
// Throws SingularError when T22 vanishes.
TwoPortScattering scattering_from_transfer(const TransferMatrix& T);

// a on the left, b on the right. Throws DomainError on a frequency mismatch
// and DegenerateCompositionError when |1 - rbar_a r_b| < 1e-14.
TwoPortScattering compose(const TwoPortScattering& a, const TwoPortScattering& b);

TwoPortScattering stack_amplitudes(const MirrorStack& stack, FrequencyPoint at);

// Fast path for the force integrand: inner-facing reflections as plain reals.
// left_face = r, right_face = rbar.
struct ImagReflections {
  double left_face = 0.0;
  double right_face = 0.0;
};
ImagReflections stack_reflections_imag(const MirrorStack& stack, double p);

// Z = (1 + S)(1 - S)^-1. Throws SingularError when 1 - S is not invertible.
ImpedanceMatrix impedance_from_scattering(const TwoPortScattering& s);
// Minimum eigenvalue of the Hermitian matrix Z + Z^dagger.
double impedance_passivity_margin(const ImpedanceMatrix& z);
// Minimum eigenvalue of 1 - S S^dagger.
double scattering_passivity_margin(const Eigen::Matrix2cd& s);

struct PassivityReport {
  bool passed = true;
  double min_eigenvalue = 1.0;
  std::optional<std::complex<double>> violation_at;
  double max_reflection = 0.0;  // max of |r|, |rbar| over the grid
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // non-finite points, or off-axis points for tabulated models
};

inline constexpr double kPassivityTolerance = 1e-10;

// Log-spaced moduli in [1e-6, 1e6] on the real p axis and on rays at angles
// +-pi/4 and +-pi/2 (the real frequency axis).
std::vector<std::complex<double>> default_passivity_grid();

// Evaluates 1 - S S^dagger on every grid point. Throws DomainError for
// points with Re p < 0.
PassivityReport check_passivity(const MirrorStack& stack, std::span<const std::complex<double>> grid);

struct CavityPassivityReport {
  PassivityReport mirror1;
  PassivityReport mirror2;
  double max_loop_gain = 0.0;  // max |rbar_1 r_2|
  bool passed = true;
};

CavityPassivityReport check_passivity(const MirrorStack& mirror1, const MirrorStack& mirror2,
                                      std::span<const std::complex<double>> grid);

}  // namespace casimir
