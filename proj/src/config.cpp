#include "casimir/config.hpp"

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace casimir {

namespace {

using json = nlohmann::json;

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

// Object view that remembers which keys were read, so leftovers can be
// rejected as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(std::string_view key) const { return path_ + "/" + std::string(key); }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(child(key), "missing required field");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(child(key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  return j;
}

// Reads values in the file's unit system and stores them in units of tau0.
struct UnitReader {
  Units units;

  double time(const json& j, const std::string& path) const { return as_number(j, path) / units.time_scale(); }
  double frequency(const json& j, const std::string& path) const {
    return as_number(j, path) / units.frequency_scale();
  }
};

PermittivityModel parse_model(const json& j, const std::string& path, const UnitReader& u) {
  ObjectReader obj(j, path);
  const std::string type = as_string(obj.required("type"), obj.child("type"));
  PermittivityModel model;
  if (type == "constant") {
    model = PermittivityModel::constant(as_number(obj.required("eps"), obj.child("eps")));
  } else if (type == "lorentz") {
    const std::string opath = obj.child("oscillators");
    std::vector<LorentzOscillator> osc;
    const json& list = as_array(obj.required("oscillators"), opath);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string kpath = fmt::format("{}/{}", opath, k);
      const json& triple = as_array(list[k], kpath);
      if (triple.size() != 3) throw ConfigError(kpath, "oscillator must be [strength, resonance, damping]");
      osc.push_back({u.frequency(triple[0], kpath + "/0"), u.frequency(triple[1], kpath + "/1"),
                     u.frequency(triple[2], kpath + "/2")});
    }
    model = PermittivityModel::lorentz(std::move(osc));
  } else if (type == "tabulated_imag") {
    const std::string spath = obj.child("samples");
    std::vector<ImagSample> samples;
    const json& list = as_array(obj.required("samples"), spath);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string kpath = fmt::format("{}/{}", spath, k);
      const json& pair = as_array(list[k], kpath);
      if (pair.size() != 2) throw ConfigError(kpath, "sample must be [p, eps]");
      samples.push_back({u.frequency(pair[0], kpath + "/0"), as_number(pair[1], kpath + "/1")});
    }
    TailPolicy tail = TailPolicy::DecayToUnity;
    if (const json* t = obj.optional("tail")) {
      const std::string s = as_string(*t, obj.child("tail"));
      if (s == "decay") {
        tail = TailPolicy::DecayToUnity;
      } else if (s == "error") {
        tail = TailPolicy::Error;
      } else {
        throw ConfigError(obj.child("tail"), "expected \"decay\" or \"error\"");
      }
    }
    try {
      model = PermittivityModel::tabulated_imag(std::move(samples), tail);
    } catch (const DomainError& e) {
      throw ConfigError(spath, e.what());
    }
  } else {
    throw ConfigError(obj.child("type"), fmt::format("unknown permittivity model \"{}\"", type));
  }
  obj.finish();

  const ValidationReport report = validate_model(model);
  if (!report) {
    const std::string where = type == "constant" ? obj.child("eps") : path;
    throw ConfigError(where, report.message);
  }
  return model;
}

std::vector<Slab> parse_layers(const json& j, const std::string& path, const UnitReader& u) {
  std::vector<Slab> slabs;
  const json& list = as_array(j, path);
  for (std::size_t k = 0; k < list.size(); ++k) {
    ObjectReader obj(list[k], fmt::format("{}/{}", path, k));
    Slab slab;
    slab.model = parse_model(obj.required("model"), obj.child("model"), u);
    slab.thickness_time = u.time(obj.required("thickness_time"), obj.child("thickness_time"));
    if (!(slab.thickness_time >= 0.0)) throw ConfigError(obj.child("thickness_time"), "thickness_time >= 0 violated");
    obj.finish();
    slabs.push_back(std::move(slab));
  }
  return slabs;
}

MirrorStack parse_stack(const json& j, const std::string& path, const UnitReader& u) {
  ObjectReader obj(j, path);
  const bool has_layers = obj.has("layers");
  const bool has_analytic = obj.has("analytic");
  if (has_layers == has_analytic) throw ConfigError(path, "a mirror needs exactly one of \"layers\" or \"analytic\"");

  MirrorStack stack;
  if (has_layers) {
    stack = MirrorStack::layers(parse_layers(obj.required("layers"), obj.child("layers"), u));
  } else {
    ObjectReader a(obj.required("analytic"), obj.child("analytic"));
    const std::string type = as_string(a.required("type"), a.child("type"));
    if (type == "perfect") {
      stack = MirrorStack::perfect();
    } else if (type == "constant" || type == "gain") {
      const double eta = as_number(a.required("eta"), a.child("eta"));
      if (type == "constant" && !(std::abs(eta) <= 1.0)) throw ConfigError(a.child("eta"), "|eta| <= 1 violated");
      stack = MirrorStack::unchecked_constant_reflectivity(eta);
    } else if (type == "magnetic") {
      stack = MirrorStack::magnetic(parse_layers(a.required("layers"), a.child("layers"), u));
    } else if (type == "narrowband") {
      const double theta = u.time(a.required("theta"), a.child("theta"));
      if (!(theta >= 0.0)) throw ConfigError(a.child("theta"), "theta >= 0 violated");
      std::optional<double> cutoff;
      if (const json* c = a.optional("cutoff")) {
        cutoff = u.frequency(*c, a.child("cutoff"));
        if (!(*cutoff >= 0.0)) throw ConfigError(a.child("cutoff"), "cutoff >= 0 violated");
      }
      stack = MirrorStack::narrowband_toy(theta, cutoff);
    } else {
      throw ConfigError(a.child("type"), fmt::format("unknown analytic mirror \"{}\"", type));
    }
    a.finish();
  }
  obj.finish();
  return stack;
}

Units parse_units(const json* j) {
  Units units;
  if (!j) return units;
  ObjectReader obj(*j, "/units");
  const std::string system = as_string(obj.required("system"), obj.child("system"));
  if (system == "natural") {
    units.system = UnitSystem::Natural;
  } else if (system == "si") {
    units.system = UnitSystem::SI;
  } else {
    throw ConfigError(obj.child("system"), "expected \"natural\" or \"si\"");
  }
  if (const json* t = obj.optional("tau0")) {
    units.tau0 = as_number(*t, obj.child("tau0"));
    if (!(units.tau0 > 0.0)) throw ConfigError(obj.child("tau0"), "tau0 > 0 violated");
  } else if (units.system == UnitSystem::SI) {
    throw ConfigError(obj.child("tau0"), "SI units need a reference time tau0 in seconds");
  }
  obj.finish();
  return units;
}

// Rejects repeated keys inside one object; nlohmann keeps the last silently.
json parse_strict(std::string_view text) {
  std::vector<std::set<std::string>> open_objects;
  auto callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case json::parse_event_t::object_end:
        if (!open_objects.empty()) open_objects.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!open_objects.empty() && !open_objects.back().insert(key).second)
          throw ConfigError("", fmt::format("duplicate field \"{}\"", key));
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text.begin(), text.end(), callback);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_column(text, e.byte == 0 ? 0 : e.byte - 1), fmt::format("syntax error: {}", e.what()));
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const ParseOptions& options) {
  const json root = parse_strict(text);
  ObjectReader top(root, "");
  RunConfig cfg;
  cfg.cavity.units = parse_units(top.optional("units"));
  const UnitReader u{cfg.cavity.units};

  {
    ObjectReader cav(top.required("cavity"), "/cavity");
    cfg.cavity.tau = u.time(cav.required("tau"), cav.child("tau"));
    if (!(cfg.cavity.tau > 0.0)) throw ConfigError(cav.child("tau"), "tau > 0 violated");
    cfg.cavity.mirror1 = parse_stack(cav.required("mirror1"), cav.child("mirror1"), u);
    cfg.cavity.mirror2 = parse_stack(cav.required("mirror2"), cav.child("mirror2"), u);
    cav.finish();
  }

  if (const json* q = top.optional("quadrature")) {
    ObjectReader obj(*q, "/quadrature");
    if (const json* v = obj.optional("rel_tol")) {
      cfg.quadrature.rel_tol = as_number(*v, obj.child("rel_tol"));
      cfg.rel_tol_set = true;
      if (!(cfg.quadrature.rel_tol > 0.0)) throw ConfigError(obj.child("rel_tol"), "rel_tol > 0 violated");
    }
    if (const json* v = obj.optional("abs_tol")) {
      cfg.quadrature.abs_tol = as_number(*v, obj.child("abs_tol"));
      if (!(cfg.quadrature.abs_tol >= 0.0)) throw ConfigError(obj.child("abs_tol"), "abs_tol >= 0 violated");
    }
    if (const json* v = obj.optional("max_subdivisions")) {
      cfg.quadrature.max_subdivisions = as_count(*v, obj.child("max_subdivisions"));
      if (cfg.quadrature.max_subdivisions == 0)
        throw ConfigError(obj.child("max_subdivisions"), "max_subdivisions > 0 violated");
    }
    if (const json* v = obj.optional("u_max")) {
      cfg.quadrature.u_max = as_number(*v, obj.child("u_max"));
      if (!(cfg.quadrature.u_max > 0.0)) throw ConfigError(obj.child("u_max"), "u_max > 0 violated");
    }
    obj.finish();
  }

  if (const json* s = top.optional("sweep")) {
    ObjectReader obj(*s, "/sweep");
    TauGrid g;
    g.min = u.time(obj.required("tau_min"), obj.child("tau_min"));
    g.max = u.time(obj.required("tau_max"), obj.child("tau_max"));
    g.steps = as_count(obj.required("steps"), obj.child("steps"));
    if (const json* l = obj.optional("log")) g.log = as_bool(*l, obj.child("log"));
    if (!(g.min > 0.0)) throw ConfigError(obj.child("tau_min"), "tau_min > 0 violated");
    if (g.steps == 0) throw ConfigError(obj.child("steps"), "steps >= 1 violated");
    if (!(g.max > g.min) && g.steps > 1) throw ConfigError(obj.child("tau_max"), "tau_max > tau_min violated");
    obj.finish();
    cfg.sweep = g;
  }

  if (const json* s = top.optional("spectrum")) {
    ObjectReader obj(*s, "/spectrum");
    OmegaGrid g;
    g.min = u.frequency(obj.required("omega_min"), obj.child("omega_min"));
    g.max = u.frequency(obj.required("omega_max"), obj.child("omega_max"));
    g.steps = as_count(obj.required("steps"), obj.child("steps"));
    if (!(g.min > 0.0)) throw ConfigError(obj.child("omega_min"), "omega_min > 0 violated");
    if (g.steps == 0) throw ConfigError(obj.child("steps"), "steps >= 1 violated");
    if (!(g.max > g.min) && g.steps > 1) throw ConfigError(obj.child("omega_max"), "omega_max > omega_min violated");
    obj.finish();
    cfg.spectrum = g;
  }

  if (const json* o = top.optional("output")) {
    ObjectReader obj(*o, "/output");
    if (const json* f = obj.optional("format")) {
      const std::string s = as_string(*f, obj.child("format"));
      if (s == "csv") {
        cfg.format = OutputFormat::Csv;
      } else if (s == "structured") {
        cfg.format = OutputFormat::Structured;
      } else {
        throw ConfigError(obj.child("format"), "expected \"csv\" or \"structured\"");
      }
    }
    if (const json* p = obj.optional("path")) cfg.output_path = as_string(*p, obj.child("path"));
    obj.finish();
  }

  if (const json* f = top.optional("fresnel_number")) {
    cfg.fresnel_number = as_number(*f, "/fresnel_number");
    if (!(*cfg.fresnel_number >= 0.0)) throw ConfigError("/fresnel_number", "fresnel_number >= 0 violated");
  }
  top.finish();

  if (options.passivity_prescreen) {
    const auto grid = default_passivity_grid();
    const auto report = check_passivity(cfg.cavity.mirror1, cfg.cavity.mirror2, grid);
    auto reject = [](const char* where, const PassivityReport& r) {
      const auto p = r.violation_at.value_or(0.0);
      throw ConfigError(where, fmt::format("passivity violated at p = ({:.6g}, {:.6g}): min eigenvalue of 1 - S S^+ is {:.3e}",
                                           p.real(), p.imag(), r.min_eigenvalue));
    };
    if (!report.mirror1.passed) reject("/cavity/mirror1", report.mirror1);
    if (!report.mirror2.passed) reject("/cavity/mirror2", report.mirror2);
    if (!report.passed)
      throw ConfigError("/cavity", fmt::format("loop gain |r1 r2| = {} exceeds 1", report.max_loop_gain));
  }
  return cfg;
}

namespace {

json model_to_json(const PermittivityModel& model, const Units& units) {
  const double f = units.frequency_scale();
  if (const auto* c = std::get_if<ConstantPermittivity>(&model.variant())) return {{"type", "constant"}, {"eps", c->eps}};
  if (const auto* l = std::get_if<LorentzPermittivity>(&model.variant())) {
    json osc = json::array();
    for (const auto& o : l->oscillators) osc.push_back({o.strength * f, o.resonance * f, o.damping * f});
    return {{"type", "lorentz"}, {"oscillators", osc}};
  }
  const auto& t = std::get<TabulatedPermittivity>(model.variant());
  json samples = json::array();
  for (const auto& s : t.samples()) samples.push_back({s.p * f, s.eps});
  return {{"type", "tabulated_imag"},
          {"samples", samples},
          {"tail", t.tail() == TailPolicy::DecayToUnity ? "decay" : "error"}};
}

json layers_to_json(const LayeredMirror& m, const Units& units) {
  json list = json::array();
  for (const auto& slab : m.slabs)
    list.push_back({{"model", model_to_json(slab.model, units)}, {"thickness_time", slab.thickness_time * units.time_scale()}});
  return list;
}

json stack_to_json(const MirrorStack& stack, const Units& units) {
  const auto& v = stack.variant();
  if (const auto* l = std::get_if<LayeredMirror>(&v)) return {{"layers", layers_to_json(*l, units)}};
  json a;
  if (std::holds_alternative<PerfectMirror>(v)) {
    a = {{"type", "perfect"}};
  } else if (const auto* c = std::get_if<ConstantReflectivityMirror>(&v)) {
    a = {{"type", std::abs(c->eta) <= 1.0 ? "constant" : "gain"}, {"eta", c->eta}};
  } else if (const auto* m = std::get_if<MagneticMirror>(&v)) {
    a = {{"type", "magnetic"}, {"layers", layers_to_json(m->base, units)}};
  } else {
    const auto& toy = std::get<NarrowBandToyMirror>(v);
    a = {{"type", "narrowband"}, {"theta", toy.theta * units.time_scale()}};
    if (std::isfinite(toy.cutoff)) a["cutoff"] = toy.cutoff * units.frequency_scale();
  }
  return {{"analytic", a}};
}

}  // namespace

nlohmann::json config_to_json(const RunConfig& config) {
  const Units& units = config.cavity.units;
  const double t = units.time_scale();
  const double f = units.frequency_scale();
  json j;
  j["units"] = {{"system", units.system == UnitSystem::SI ? "si" : "natural"}, {"tau0", units.tau0}};
  j["cavity"] = {{"tau", config.cavity.tau * t},
                 {"mirror1", stack_to_json(config.cavity.mirror1, units)},
                 {"mirror2", stack_to_json(config.cavity.mirror2, units)}};
  j["quadrature"] = {{"rel_tol", config.quadrature.rel_tol},
                     {"abs_tol", config.quadrature.abs_tol},
                     {"max_subdivisions", config.quadrature.max_subdivisions},
                     {"u_max", config.quadrature.u_max}};
  if (config.sweep)
    j["sweep"] = {{"tau_min", config.sweep->min * t},
                  {"tau_max", config.sweep->max * t},
                  {"steps", config.sweep->steps},
                  {"log", config.sweep->log}};
  if (config.spectrum)
    j["spectrum"] = {{"omega_min", config.spectrum->min * f},
                     {"omega_max", config.spectrum->max * f},
                     {"steps", config.spectrum->steps}};
  json out = {{"format", config.format == OutputFormat::Csv ? "csv" : "structured"}};
  if (config.output_path) out["path"] = *config.output_path;
  j["output"] = out;
  if (config.fresnel_number) j["fresnel_number"] = *config.fresnel_number;
  return j;
}

std::vector<double> make_grid(const TauGrid& grid) {
  std::vector<double> out;
  if (grid.steps == 0) return out;
  if (grid.steps == 1) return {grid.min};
  const double n = static_cast<double>(grid.steps - 1);
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double s = static_cast<double>(i) / n;
    out.push_back(grid.log ? grid.min * std::pow(grid.max / grid.min, s) : grid.min + (grid.max - grid.min) * s);
  }
  out.back() = grid.max;
  return out;
}

std::vector<double> make_grid(const OmegaGrid& grid) {
  return make_grid(TauGrid{grid.min, grid.max, grid.steps, false});
}

}  // namespace casimir
