#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>

#include "rab/error.hpp"

namespace rabsim {

namespace {

using rab::ConfigError;
namespace ex = rab::experiments;
namespace md = rab::model;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Unit {
  const char* name;
  Dimension dim;
  double scale;
  bool angular;  // frequency already in rad/time
};

constexpr Unit kUnits[] = {
    {"Hz", Dimension::kFrequency, 1e-6, false},     {"kHz", Dimension::kFrequency, 1e-3, false},
    {"MHz", Dimension::kFrequency, 1.0, false},     {"GHz", Dimension::kFrequency, 1e3, false},
    {"rad/us", Dimension::kFrequency, 1.0, true},   {"rad/ns", Dimension::kFrequency, 1e3, true},
    {"ns", Dimension::kTime, 1e-3, false},          {"us", Dimension::kTime, 1.0, false},
    {"ms", Dimension::kTime, 1e3, false},           {"s", Dimension::kTime, 1e6, false},
    {"nm", Dimension::kLength, 1e-3, false},        {"um", Dimension::kLength, 1.0, false},
    {"mm", Dimension::kLength, 1e3, false},         {"rad", Dimension::kAngle, 1.0, false},
    {"deg", Dimension::kAngle, std::numbers::pi / 180.0, false},
    {"pi", Dimension::kAngle, std::numbers::pi, false},
    {"GHz um^3", Dimension::kC3, 1.0, false},       {"MHz um^3", Dimension::kC3, 1e-3, false},
    {"GHz um^6", Dimension::kC6, 1.0, false},       {"MHz um^6", Dimension::kC6, 1e-3, false},
};

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kFrequency: return "frequency";
    case Dimension::kTime: return "time";
    case Dimension::kLength: return "length";
    case Dimension::kAngle: return "angle";
    case Dimension::kC3: return "C3 coefficient";
    case Dimension::kC6: return "C6 coefficient";
  }
  return "quantity";
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
  const auto m = n.Mark();
  throw ConfigError(what, m.line + 1, m.column + 1);
}

double quantity(const YAML::Node& n, Dimension dim, bool x2pi) {
  if (!n.IsScalar()) fail(n, std::string("expected a ") + dimension_name(dim) + " with unit");
  try {
    return parse_quantity(n.Scalar(), dim, x2pi);
  } catch (const ConfigError& e) {
    fail(n, e.what());
  }
}

double number(const YAML::Node& n, const char* what) {
  if (!n.IsScalar()) fail(n, std::string("expected a number for ") + what);
  const std::string& s = n.Scalar();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    fail(n, std::string("expected a plain number for ") + what + ", got '" + s + "'");
  return v;
}

std::size_t count(const YAML::Node& n, const char* what) {
  const double v = number(n, what);
  if (!(v >= 1.0) || v != std::floor(v)) fail(n, std::string(what) + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

bool boolean(const YAML::Node& n, const char* what) {
  if (n.IsScalar()) {
    const std::string& s = n.Scalar();
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
  }
  fail(n, std::string("expected true or false for ") + what);
}

std::string text(const YAML::Node& n, const char* what) {
  if (!n.IsScalar()) fail(n, std::string("expected a string for ") + what);
  return n.Scalar();
}

void require_map(const YAML::Node& n, const std::string& section, const std::set<std::string>& allowed) {
  if (!n.IsMap()) fail(n, "section '" + section + "' must be a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.Scalar();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <class F>
auto convert(const YAML::Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const rab::DomainError& e) {
    fail(n, e.what());
  }
}

std::pair<double, double> range(const YAML::Node& n, const char* what, const std::function<double(const YAML::Node&)>& f) {
  if (!n.IsSequence() || n.size() != 2) fail(n, std::string(what) + " must be a two-element list");
  return {f(n[0]), f(n[1])};
}

}  // namespace

double parse_quantity(const std::string& raw, Dimension dim, bool x2pi) {
  const std::string s = collapse_spaces(raw);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !std::isfinite(v)) throw ConfigError("malformed quantity '" + raw + "'");
  std::string unit = collapse_spaces(end);
  if (unit.empty())
    throw ConfigError(std::string("missing unit in '") + raw + "' (expected a " + dimension_name(dim) + ")");
  for (const auto& u : kUnits) {
    if (unit != u.name) continue;
    if (u.dim != dim)
      throw ConfigError("unit '" + unit + "' is not a " + std::string(dimension_name(dim)) + " unit");
    double out = v * u.scale;
    if (dim == Dimension::kFrequency && !u.angular && x2pi) out *= kTwoPi;
    return out;
  }
  throw ConfigError("unknown unit '" + unit + "' in '" + raw + "'");
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  cfg.params = md::preset(name);
  cfg.preset_name = name;
  cfg.preset_given = true;
}

RunConfig parse_config(const std::string& content, const std::string& source) {
  RunConfig cfg;
  cfg.params = md::preset("forster-ravets");
  YAML::Node root;
  try {
    root = YAML::Load(content);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ": " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  cfg.fingerprint = content;
  if (root.IsNull()) return cfg;
  require_map(root, "top level",
              {"preset", "scheme", "condition", "x2pi", "drive", "interaction", "decay", "numerics", "output",
               "workers", "dynamics", "gate", "scan", "geometric", "steady", "crossover"});

  bool x2pi = true;
  if (auto n = root["x2pi"]) x2pi = boolean(n, "x2pi");
  if (auto n = root["preset"]) {
    const std::string name = text(n, "preset");
    convert(n, [&] {
      apply_preset(cfg, name);
      return 0;
    });
  }
  if (auto n = root["scheme"]) {
    cfg.params.scheme = convert(n, [&] { return md::parse_scheme_id(text(n, "scheme")); });
    cfg.params.condition = md::default_condition(cfg.params.scheme);
    cfg.params.name = "custom";
  }
  if (auto n = root["condition"]) cfg.params.condition = convert(n, [&] { return md::parse_condition(text(n, "condition")); });

  if (auto d = root["drive"]) {
    require_map(d, "drive", {"rabi", "detuning", "x2pi", "tones"});
    bool dx = x2pi;
    if (auto n = d["x2pi"]) dx = boolean(n, "x2pi");
    if (auto n = d["rabi"]) {
      cfg.params.rabi_mhz = quantity(n, Dimension::kFrequency, dx) / kTwoPi;
      cfg.rabi_given = true;
    }
    if (auto n = d["detuning"]) cfg.detuning = quantity(n, Dimension::kFrequency, dx);
    if (auto n = d["tones"]) {
      const std::string t = text(n, "tones");
      if (t == "bichromatic") cfg.tones = md::ToneChoice::kBichromatic;
      else if (t == "blue") cfg.tones = md::ToneChoice::kBlue;
      else if (t == "red") cfg.tones = md::ToneChoice::kRed;
      else fail(n, "tones must be bichromatic, blue or red");
    }
  }
  if (auto d = root["interaction"]) {
    require_map(d, "interaction", {"c3", "c6", "distance"});
    if (auto n = d["c3"]) cfg.params.c3 = quantity(n, Dimension::kC3, x2pi);
    if (auto n = d["c6"]) cfg.params.c6 = quantity(n, Dimension::kC6, x2pi);
    if (auto n = d["distance"]) cfg.params.distance = quantity(n, Dimension::kLength, x2pi);
  }
  if (auto d = root["decay"]) {
    require_map(d, "decay", {"enabled", "lifetimes"});
    if (auto n = d["enabled"]) cfg.dissipation = boolean(n, "decay.enabled");
    if (auto n = d["lifetimes"]) {
      if (!n.IsMap()) fail(n, "decay.lifetimes must map level names to lifetimes");
      cfg.params.lifetimes_ms.clear();
      for (const auto& kv : n)
        cfg.params.lifetimes_ms[kv.first.Scalar()] = quantity(kv.second, Dimension::kTime, x2pi) / 1000.0;
    }
  }
  if (auto d = root["numerics"]) {
    require_map(d, "numerics", {"steps_per_cycle", "samples"});
    if (auto n = d["steps_per_cycle"]) {
      cfg.steps_per_cycle = number(n, "steps_per_cycle");
      if (!(cfg.steps_per_cycle >= 20.0)) fail(n, "steps_per_cycle must be at least 20");
    }
    if (auto n = d["samples"]) cfg.samples = count(n, "samples");
  }
  if (auto d = root["output"]) {
    require_map(d, "output", {"dir", "plot", "run_id"});
    if (auto n = d["dir"]) cfg.out_dir = text(n, "output.dir");
    if (auto n = d["plot"]) cfg.plot = boolean(n, "output.plot");
    if (auto n = d["run_id"]) cfg.run_id = text(n, "output.run_id");
  }
  if (auto n = root["workers"]) cfg.workers = count(n, "workers");

  if (auto d = root["dynamics"]) {
    require_map(d, "dynamics", {"effective"});
    if (auto n = d["effective"]) cfg.effective = boolean(n, "dynamics.effective");
  }
  if (auto d = root["gate"]) {
    require_map(d, "gate", {"model", "theta", "deviations", "effective", "phase_switch", "align_to_beat"});
    if (auto n = d["model"]) cfg.gate.model = convert(n, [&] { return ex::parse_gate_model(text(n, "gate.model")); });
    if (auto n = d["theta"]) cfg.gate.theta = quantity(n, Dimension::kAngle, x2pi);
    if (auto v = d["deviations"]) {
      require_map(v, "gate.deviations", {"omega", "detuning", "distance"});
      if (auto n = v["omega"]) cfg.gate.deviations.omega = number(n, "deviations.omega");
      if (auto n = v["detuning"]) cfg.gate.deviations.detuning = number(n, "deviations.detuning");
      if (auto n = v["distance"]) cfg.gate.deviations.distance = number(n, "deviations.distance");
    }
    if (auto n = d["effective"]) cfg.gate.effective = boolean(n, "gate.effective");
    if (auto n = d["phase_switch"]) cfg.gate.phase_switch = boolean(n, "gate.phase_switch");
    if (auto n = d["align_to_beat"]) cfg.gate.align_to_beat = boolean(n, "gate.align_to_beat");
  }
  if (auto d = root["scan"]) {
    require_map(d, "scan", {"axis", "range", "points", "spacing", "series", "case", "align_to_beat"});
    if (auto n = d["axis"]) cfg.scan.axis = convert(n, [&] { return ex::parse_scan_axis(text(n, "scan.axis")); });
    if (cfg.scan.axis == ex::ScanAxis::kOmegaAbs) {
      cfg.scan.from = kTwoPi * 0.5;
      cfg.scan.to = kTwoPi * 30.0;
      cfg.scan.log_spacing = true;
    } else if (cfg.scan.axis == ex::ScanAxis::kDistance) {
      cfg.scan.from = -1e-3;
      cfg.scan.to = 1e-3;
      cfg.scan.points = 21;
    }
    if (auto n = d["range"]) {
      std::function<double(const YAML::Node&)> f;
      if (cfg.scan.axis == ex::ScanAxis::kOmegaAbs)
        f = [&](const YAML::Node& x) { return quantity(x, Dimension::kFrequency, x2pi); };
      else
        f = [&](const YAML::Node& x) { return number(x, "scan.range"); };
      std::tie(cfg.scan.from, cfg.scan.to) = range(n, "scan.range", f);
    }
    if (auto n = d["points"]) cfg.scan.points = count(n, "scan.points");
    if (auto n = d["spacing"]) {
      const std::string s = text(n, "scan.spacing");
      if (s != "linear" && s != "log") fail(n, "scan.spacing must be linear or log");
      cfg.scan.log_spacing = s == "log";
    }
    if (auto n = d["series"]) {
      if (!n.IsSequence()) fail(n, "scan.series must be a list of gate models");
      cfg.scan.series.clear();
      for (const auto& x : n) cfg.scan.series.push_back(convert(x, [&] { return ex::parse_gate_model(text(x, "series")); }));
    }
    if (auto n = d["case"]) {
      const double c = number(n, "scan.case");
      if (c != 1.0 && c != 2.0) fail(n, "scan.case must be 1 or 2");
      cfg.scan.distance_case = static_cast<int>(c);
    }
    if (auto n = d["align_to_beat"]) cfg.scan.align_to_beat = boolean(n, "scan.align_to_beat");
  }
  if (auto d = root["geometric"]) {
    require_map(d, "geometric", {"thetas", "effective", "align_to_beat"});
    if (auto n = d["thetas"]) {
      if (!n.IsSequence()) fail(n, "geometric.thetas must be a list of angles");
      for (const auto& x : n) cfg.geometric.thetas.push_back(quantity(x, Dimension::kAngle, x2pi));
    }
    if (auto n = d["effective"]) cfg.geometric.effective = boolean(n, "geometric.effective");
    if (auto n = d["align_to_beat"]) cfg.geometric.align_to_beat = boolean(n, "geometric.align_to_beat");
  }
  if (auto d = root["steady"]) {
    require_map(d, "steady", {"ratio_range", "points", "full_check_ratio"});
    if (auto n = d["ratio_range"])
      std::tie(cfg.steady.ratio_from, cfg.steady.ratio_to) =
          range(n, "steady.ratio_range", [&](const YAML::Node& x) { return number(x, "ratio"); });
    if (auto n = d["points"]) cfg.steady.points = count(n, "steady.points");
    if (auto n = d["full_check_ratio"]) cfg.steady.full_check_ratio = number(n, "steady.full_check_ratio");
  }
  if (auto d = root["crossover"]) {
    require_map(d, "crossover", {"table", "c3", "defect"});
    if (auto n = d["table"]) cfg.crossover.table = text(n, "crossover.table");
    if (auto n = d["c3"]) cfg.crossover.c3 = quantity(n, Dimension::kC3, x2pi);
    if (auto n = d["defect"]) cfg.crossover.defect = quantity(n, Dimension::kFrequency, false) / 1000.0;
  }
  return cfg;
}

std::string run_id_for(const std::string& t) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : t) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 12);
}

std::string describe_preset(const md::Preset& p) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "preset" << YAML::Value << p.name;
  e << YAML::Key << "scheme" << YAML::Value << md::to_string(p.scheme);
  e << YAML::Key << "condition" << YAML::Value << md::to_string(p.condition);
  e << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "rabi" << YAML::Value << (std::to_string(p.rabi_mhz) + " MHz");
  e << YAML::Key << "x2pi" << YAML::Value << true << YAML::EndMap;
  e << YAML::Key << "interaction" << YAML::Value << YAML::BeginMap;
  if (p.c3 != 0.0) e << YAML::Key << "c3" << YAML::Value << (std::to_string(p.c3) + " GHz um^3");
  if (p.c6 != 0.0) e << YAML::Key << "c6" << YAML::Value << (std::to_string(p.c6) + " GHz um^6");
  e << YAML::Key << "distance" << YAML::Value << (std::to_string(p.distance) + " um") << YAML::EndMap;
  e << YAML::Key << "decay" << YAML::Value << YAML::BeginMap << YAML::Key << "lifetimes" << YAML::Value
    << YAML::BeginMap;
  for (const auto& [level, tau] : p.lifetimes_ms) e << YAML::Key << level << YAML::Value << (std::to_string(tau) + " ms");
  e << YAML::EndMap << YAML::EndMap << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace rabsim
