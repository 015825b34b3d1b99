#include <cmath>
#include <string>

#include <fmt/format.h>

#include "casimir/cli.hpp"
#include "json.hpp"

namespace casimir::cli {

namespace {

using json = nlohmann::json;

std::string num(double v) { return fmt::format("{:.17e}", v); }
const char* flag(bool b) { return b ? "true" : "false"; }

// JSON has no NaN; missing values become null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json jopt(const std::optional<double>& v) { return v ? jnum(*v) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const char* unit_name(const Units& u) { return u.system == UnitSystem::SI ? "si" : "natural"; }

json force_json(const ForceResult& r, const Units& u) {
  return {{"tau", jnum(r.tau * u.time_scale())},
          {"force", jnum(r.force * u.force_scale())},
          {"error_estimate", jnum(r.error_estimate * u.force_scale())},
          {"f_perfect", jnum(r.f_perfect * u.force_scale())},
          {"ratio", jnum(r.ratio)},
          {"bound_flags", {{"within_perfect", r.bounds.within_perfect}, {"attractive", r.bounds.attractive}}}};
}

constexpr const char* kForceColumns = "tau,force,error_estimate,f_perfect,ratio,within_perfect,attractive";

std::string force_row(const ForceResult& r, const Units& u) {
  return fmt::format("{},{},{},{},{},{},{}", num(r.tau * u.time_scale()), num(r.force * u.force_scale()),
                     num(r.error_estimate * u.force_scale()), num(r.f_perfect * u.force_scale()), num(r.ratio),
                     flag(r.bounds.within_perfect), flag(r.bounds.attractive));
}

}  // namespace

std::string emit_force(const ForceReport& report, OutputFormat format, const Units& units) {
  const double gscale = units.force_scale() / units.time_scale();
  if (format == OutputFormat::Structured) {
    json j = force_json(report.force, units);
    j["command"] = "force";
    j["units"] = unit_name(units);
    j["gradient"] = jnum(report.gradient.gradient * gscale);
    j["gradient_error"] = jnum(report.gradient.error_estimate * gscale);
    if (report.fresnel)
      j["fresnel_estimate"] = {{"force", jnum(report.fresnel->force * units.force_scale())},
                               {"qualitative", report.fresnel->qualitative}};
    return dump(j);
  }
  std::string out = kForceColumns;
  out += ",gradient,gradient_error";
  if (report.fresnel) out += ",fresnel_force";
  out += "\n" + force_row(report.force, units);
  out += fmt::format(",{},{}", num(report.gradient.gradient * gscale), num(report.gradient.error_estimate * gscale));
  if (report.fresnel) out += "," + num(report.fresnel->force * units.force_scale());
  out += "\n";
  return out;
}

std::string force_summary(const ForceReport& report, const Units& units) {
  const auto& r = report.force;
  const char* fu = units.system == UnitSystem::SI ? " N" : "";
  const char* tu = units.system == UnitSystem::SI ? " s" : "";
  const char* gu = units.system == UnitSystem::SI ? " N/s" : "";
  const double gscale = units.force_scale() / units.time_scale();
  std::string s;
  s += fmt::format("tau             {:.10e}{}\n", r.tau * units.time_scale(), tu);
  s += fmt::format("force           {:.10e}{}\n", r.force * units.force_scale(), fu);
  s += fmt::format("error_estimate  {:.3e}{}\n", r.error_estimate * units.force_scale(), fu);
  s += fmt::format("f_perfect       {:.10e}{}\n", r.f_perfect * units.force_scale(), fu);
  s += fmt::format("ratio           {:.10f}\n", r.ratio);
  s += fmt::format("gradient        {:.10e}{}\n", report.gradient.gradient * gscale, gu);
  s += fmt::format("within_perfect  {}\n", flag(r.bounds.within_perfect));
  s += fmt::format("attractive      {}\n", flag(r.bounds.attractive));
  if (report.fresnel)
    s += fmt::format("fresnel_force   {:.10e}{} (qualitative multimode estimate)\n",
                     report.fresnel->force * units.force_scale(), fu);
  return s;
}

std::string emit_sweep(const SweepResult& sweep, OutputFormat format, const Units& units) {
  if (format == OutputFormat::Structured) {
    json points = json::array();
    for (const auto& pt : sweep.points) {
      if (pt.result) {
        points.push_back(force_json(*pt.result, units));
      } else {
        points.push_back({{"tau", jnum(pt.tau * units.time_scale())}, {"error", pt.error}});
      }
    }
    return dump({{"command", "sweep"},
                 {"units", unit_name(units)},
                 {"points", points},
                 {"non_increasing", sweep.non_increasing},
                 {"all_succeeded", sweep.all_succeeded}});
  }
  std::string out = std::string(kForceColumns) + ",status\n";
  for (const auto& pt : sweep.points) {
    if (pt.result) {
      out += force_row(*pt.result, units) + ",ok\n";
    } else {
      const double n = std::nan("");
      out += fmt::format("{},{},{},{},{},false,false,error\n", num(pt.tau * units.time_scale()), num(n), num(n),
                         num(n), num(n));
    }
  }
  return out;
}

std::string emit_spectrum(std::span<const SpectralSample> samples, OutputFormat format, const Units& units) {
  const double fscale = units.frequency_scale();
  // density integrates over omega to a force
  const double dscale = units.force_scale() / fscale;
  if (format == OutputFormat::Structured) {
    json list = json::array();
    for (const auto& s : samples) {
      json j = {{"omega", jnum(s.omega * fscale)},
                {"g", jnum(s.g)},
                {"loop_f", {jnum(s.loop_f.real()), jnum(s.loop_f.imag())}},
                {"density", jnum(s.density * dscale)}};
      if (!s.ok()) j["error"] = s.error;
      list.push_back(j);
    }
    return dump({{"command", "spectrum"}, {"units", unit_name(units)}, {"samples", list}});
  }
  std::string out = "omega,g,re_f,im_f,density\n";
  for (const auto& s : samples)
    out += fmt::format("{},{},{},{},{}\n", num(s.omega * fscale), num(s.g), num(s.loop_f.real()), num(s.loop_f.imag()),
                       num(s.density * dscale));
  return out;
}

std::string emit_theta(std::span<const ThetaRow> rows, OutputFormat format, const Units& units) {
  const double t = units.time_scale();
  auto scaled = [t](const std::optional<double>& v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return *v * t;
  };
  if (format == OutputFormat::Structured) {
    json list = json::array();
    for (const auto& r : rows)
      list.push_back({{"mirror", r.mirror},
                      {"theta_static", jopt(scaled(r.theta_static))},
                      {"theta_dispersion", jopt(scaled(r.theta_dispersion))}});
    return dump({{"command", "theta"}, {"units", unit_name(units)}, {"mirrors", list}});
  }
  std::string out = "mirror,theta_static,theta_dispersion\n";
  const double n = std::nan("");
  for (const auto& r : rows)
    out += fmt::format("{},{},{}\n", r.mirror, num(scaled(r.theta_static).value_or(n)),
                       num(scaled(r.theta_dispersion).value_or(n)));
  return out;
}

std::string emit_check(const CavityPassivityReport& report, OutputFormat format, const Units& units) {
  const double f = units.frequency_scale();
  auto where = [f](const PassivityReport& r) {
    const auto p = r.violation_at.value_or(std::complex<double>(std::nan(""), std::nan("")));
    return std::pair{p.real() * f, p.imag() * f};
  };
  if (format == OutputFormat::Structured) {
    auto one = [&](const PassivityReport& r) {
      const auto [re, im] = where(r);
      return json{{"passed", r.passed},
                  {"min_eigenvalue", jnum(r.min_eigenvalue)},
                  {"max_reflection", jnum(r.max_reflection)},
                  {"evaluated", r.evaluated},
                  {"skipped", r.skipped},
                  {"violation_at", r.violation_at ? json{jnum(re), jnum(im)} : json(nullptr)}};
    };
    return dump({{"command", "check"},
                 {"units", unit_name(units)},
                 {"mirror1", one(report.mirror1)},
                 {"mirror2", one(report.mirror2)},
                 {"max_loop_gain", jnum(report.max_loop_gain)},
                 {"passed", report.passed}});
  }
  std::string out = "subject,passed,min_eigenvalue,max_reflection,max_loop_gain,evaluated,skipped,violation_re_p,violation_im_p\n";
  const double n = std::nan("");
  for (const auto& [name, r] : {std::pair{"mirror1", &report.mirror1}, std::pair{"mirror2", &report.mirror2}}) {
    const auto [re, im] = where(*r);
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", name, flag(r->passed), num(r->min_eigenvalue),
                       num(r->max_reflection), num(n), r->evaluated, r->skipped, num(re), num(im));
  }
  out += fmt::format("cavity,{},{},{},{},{},{},{},{}\n", flag(report.passed), num(n), num(n),
                     num(report.max_loop_gain), report.mirror1.evaluated + report.mirror2.evaluated,
                     report.mirror1.skipped + report.mirror2.skipped, num(n), num(n));
  return out;
}

}  // namespace casimir::cli
