#pragma once

// Dielectric response of a layer material.
//
// All frequencies are expressed in units of 1/tau0 for the reference time
// declared by the caller; hbar = c = 1. The imaginary-axis value eps(ip) is
// what the force integral consumes, the real-axis value eps(omega) is only
// used by the spectral diagnostics.

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace casimir {

struct ConstantPermittivity {
  double eps = 1.0;
};

struct LorentzOscillator {
  double strength = 0.0;   // Omega_k
  double resonance = 0.0;  // omega_k
  double damping = 0.0;    // gamma_k >= 0
};

struct LorentzPermittivity {
  std::vector<LorentzOscillator> oscillators;
};

struct ImagSample {
  double p = 0.0;
  double eps = 1.0;
};

enum class TailPolicy {
  DecayToUnity,  // 1 + A/p^2 matched at the last sample
  Error,
};

// eps(ip) known only on samples of the positive imaginary axis. Interpolated
// with a monotone piecewise cubic in log p, so the interpolant never leaves
// the range spanned by neighbouring samples.
class TabulatedPermittivity {
 public:
  // Throws DomainError unless p is strictly increasing, p >= 0 and at least
  // one sample has p > 0.
  TabulatedPermittivity(std::vector<ImagSample> samples, TailPolicy tail);

  const std::vector<ImagSample>& samples() const noexcept { return samples_; }
  TailPolicy tail() const noexcept { return tail_; }

  double operator()(double p) const;

 private:
  std::vector<ImagSample> samples_;
  TailPolicy tail_;
  // Interpolation nodes in (log p, eps) for the samples with p > 0.
  std::vector<double> log_p_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

class PermittivityModel {
 public:
  using Variant = std::variant<ConstantPermittivity, LorentzPermittivity, TabulatedPermittivity>;

  PermittivityModel() : model_(ConstantPermittivity{}) {}
  explicit PermittivityModel(Variant model) : model_(std::move(model)) {}

  static PermittivityModel constant(double eps);
  static PermittivityModel lorentz(std::vector<LorentzOscillator> oscillators);
  static PermittivityModel tabulated_imag(std::vector<ImagSample> samples,
                                          TailPolicy tail = TailPolicy::DecayToUnity);

  const Variant& variant() const noexcept { return model_; }

  // Constant and Lorentz models are analytic and can be evaluated anywhere
  // in the complex frequency plane; tabulated data cannot.
  bool is_analytic() const noexcept;

 private:
  Variant model_;
};

// eps(ip) for p >= 0. Throws DomainError for p < 0 or for a tabulated query
// past the last sample when the tail policy is Error.
double eval_imag(const PermittivityModel& model, double p);

// eps(omega) on the real axis, Im eps >= 0. Throws UnsupportedError for
// tabulated models.
std::complex<double> eval_real(const PermittivityModel& model, double omega);

// eps at the complex frequency omega = i p. Analytic models only.
std::complex<double> eval_laplace(const PermittivityModel& model, std::complex<double> p);

struct ValidationReport {
  bool passed = true;
  std::optional<double> first_violation_p;
  std::string message;

  explicit operator bool() const noexcept { return passed; }
};

// Parameter checks plus a scan of eps(ip) >= 1 (and monotone decrease for
// Constant/Lorentz) on a log grid p in [1e-6, 1e6].
ValidationReport validate_model(const PermittivityModel& model);

}  // namespace casimir
