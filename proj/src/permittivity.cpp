#include "casimir/permittivity.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Three-point end slope with the Fritsch-Butland shape corrections.
double pchip_end_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(m) != sign(d0)) {
    m = 0.0;
  } else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) {
    m = 3.0 * d0;
  }
  return m;
}

}  // namespace

TabulatedPermittivity::TabulatedPermittivity(std::vector<ImagSample> samples, TailPolicy tail)
    : samples_(std::move(samples)), tail_(tail) {
  if (samples_.empty()) throw DomainError("tabulated permittivity needs at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.p) || !std::isfinite(s.eps) || s.p < 0.0)
      throw DomainError(fmt::format("tabulated sample {} has invalid p or eps", i));
    if (i > 0 && !(s.p > samples_[i - 1].p))
      throw DomainError(fmt::format("tabulated samples must be strictly increasing in p (sample {})", i));
  }
  for (const auto& s : samples_) {
    if (s.p > 0.0) {
      log_p_.push_back(std::log(s.p));
      value_.push_back(s.eps);
    }
  }
  if (log_p_.empty()) throw DomainError("tabulated permittivity needs a sample with p > 0");

  const std::size_t n = log_p_.size();
  slope_.assign(n, 0.0);
  if (n == 1) return;

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = log_p_[k + 1] - log_p_[k];
    delta[k] = (value_[k + 1] - value_[k]) / h[k];
  }
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) {
      slope_[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      slope_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
  }
  slope_[0] = pchip_end_slope(h[0], h[1], delta[0], delta[1]);
  slope_[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double TabulatedPermittivity::operator()(double p) const {
  const ImagSample& last = samples_.back();
  if (p > last.p) {
    if (tail_ == TailPolicy::Error)
      throw DomainError(fmt::format("p = {} lies beyond the last tabulated sample p = {}", p, last.p));
    const double ratio = last.p / p;
    return std::max(1.0, 1.0 + (last.eps - 1.0) * ratio * ratio);
  }

  const double first_positive_p = std::exp(log_p_.front());
  if (p < first_positive_p) {
    // Below the first positive sample: linear in p towards a p = 0 sample if
    // there is one, otherwise held at the first value.
    if (samples_.front().p == 0.0) {
      const double e0 = samples_.front().eps;
      const double e1 = value_.front();
      return std::max(1.0, e0 + (e1 - e0) * p / first_positive_p);
    }
    return std::max(1.0, value_.front());
  }

  const double x = std::log(p);
  const std::size_t n = log_p_.size();
  if (n == 1) return std::max(1.0, value_.front());
  auto it = std::upper_bound(log_p_.begin(), log_p_.end(), x);
  std::size_t k = it == log_p_.begin() ? 0 : static_cast<std::size_t>(it - log_p_.begin()) - 1;
  k = std::min(k, n - 2);

  const double h = log_p_[k + 1] - log_p_[k];
  const double s = (x - log_p_[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  const double v = h00 * value_[k] + h10 * h * slope_[k] + h01 * value_[k + 1] + h11 * h * slope_[k + 1];
  return std::max(1.0, v);
}

PermittivityModel PermittivityModel::constant(double eps) {
  return PermittivityModel(ConstantPermittivity{eps});
}

PermittivityModel PermittivityModel::lorentz(std::vector<LorentzOscillator> oscillators) {
  return PermittivityModel(LorentzPermittivity{std::move(oscillators)});
}

PermittivityModel PermittivityModel::tabulated_imag(std::vector<ImagSample> samples, TailPolicy tail) {
  return PermittivityModel(TabulatedPermittivity(std::move(samples), tail));
}

bool PermittivityModel::is_analytic() const noexcept {
  return !std::holds_alternative<TabulatedPermittivity>(model_);
}

double eval_imag(const PermittivityModel& model, double p) {
  if (!(p >= 0.0)) throw DomainError(fmt::format("permittivity queried at p = {} < 0", p));
  return std::visit(overloaded{
                        [](const ConstantPermittivity& m) { return m.eps; },
                        [p](const LorentzPermittivity& m) {
                          double eps = 1.0;
                          for (const auto& o : m.oscillators)
                            eps += o.strength * o.strength /
                                   (o.resonance * o.resonance + o.damping * p + p * p);
                          return eps;
                        },
                        [p](const TabulatedPermittivity& m) { return m(p); },
                    },
                    model.variant());
}

std::complex<double> eval_laplace(const PermittivityModel& model, std::complex<double> p) {
  return std::visit(overloaded{
                        [](const ConstantPermittivity& m) { return std::complex<double>(m.eps); },
                        [p](const LorentzPermittivity& m) {
                          std::complex<double> eps = 1.0;
                          for (const auto& o : m.oscillators)
                            eps += o.strength * o.strength /
                                   (o.resonance * o.resonance + o.damping * p + p * p);
                          return eps;
                        },
                        [](const TabulatedPermittivity&) -> std::complex<double> {
                          throw UnsupportedError(
                              "tabulated imaginary-axis permittivity cannot be continued off the imaginary axis");
                        },
                    },
                    model.variant());
}

std::complex<double> eval_real(const PermittivityModel& model, double omega) {
  if (!(omega > 0.0)) throw DomainError(fmt::format("real-axis permittivity needs omega > 0, got {}", omega));
  // omega = i p  <=>  p = -i omega
  return eval_laplace(model, std::complex<double>(0.0, -omega));
}

ValidationReport validate_model(const PermittivityModel& model) {
  ValidationReport report;
  auto fail = [&report](std::string message, std::optional<double> p = std::nullopt) {
    report.passed = false;
    report.first_violation_p = p;
    report.message = std::move(message);
    return report;
  };

  if (const auto* c = std::get_if<ConstantPermittivity>(&model.variant())) {
    if (!std::isfinite(c->eps)) return fail("eps must be finite");
    if (c->eps < 1.0) return fail(fmt::format("eps >= 1 violated: eps = {}", c->eps), 0.0);
  } else if (const auto* l = std::get_if<LorentzPermittivity>(&model.variant())) {
    for (std::size_t k = 0; k < l->oscillators.size(); ++k) {
      const auto& o = l->oscillators[k];
      if (!std::isfinite(o.strength) || !std::isfinite(o.resonance) || !std::isfinite(o.damping))
        return fail(fmt::format("oscillator {} has non-finite parameters", k));
      if (o.resonance < 0.0) return fail(fmt::format("oscillator {}: resonance >= 0 violated", k));
      if (o.damping < 0.0) return fail(fmt::format("oscillator {}: damping >= 0 violated", k));
    }
  } else {
    const auto& t = std::get<TabulatedPermittivity>(model.variant());
    for (const auto& s : t.samples())
      if (s.eps < 1.0) return fail(fmt::format("eps >= 1 violated: sample eps = {} at p = {}", s.eps, s.p), s.p);
  }

  const bool check_monotone = !std::holds_alternative<TabulatedPermittivity>(model.variant());
  const TabulatedPermittivity* tab = std::get_if<TabulatedPermittivity>(&model.variant());
  constexpr int kPerDecade = 20;
  constexpr int kDecades = 12;
  double previous = 0.0;
  for (int i = 0; i <= kPerDecade * kDecades; ++i) {
    const double p = std::pow(10.0, -6.0 + static_cast<double>(i) / kPerDecade);
    if (tab && tab->tail() == TailPolicy::Error && p > tab->samples().back().p) break;
    const double eps = eval_imag(model, p);
    if (!std::isfinite(eps)) return fail(fmt::format("eps(ip) not finite at p = {}", p), p);
    if (eps < 1.0) return fail(fmt::format("eps(ip) >= 1 violated at p = {}: {}", p, eps), p);
    if (check_monotone && i > 0 && eps > previous * (1.0 + 1e-14))
      return fail(fmt::format("eps(ip) not non-increasing at p = {}", p), p);
    previous = eps;
  }
  return report;
}

}  // namespace casimir
