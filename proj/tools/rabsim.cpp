// rabsim: command-line front end for the antiblockade simulator.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "config.hpp"
#include "rab/effective.hpp"
#include "rab/error.hpp"
#include "rab/experiments.hpp"

namespace {

namespace ex = rab::experiments;
namespace md = rab::model;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using rabsim::RunConfig;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr const char* kOutEnv = "RABSIM_OUT";

struct Column {
  std::string name;
  std::string unit;
  std::string description;
};

// Rows of doubles written with %.12g and '\n' endings.
class Table {
 public:
  explicit Table(std::vector<Column> cols) : cols_(std::move(cols)) {}
  void row(const std::vector<double>& r) {
    if (r.size() != cols_.size()) throw rab::DimensionError("table row has the wrong width");
    rows_.push_back(r);
  }
  const std::vector<Column>& columns() const { return cols_; }

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i].name;
    os << '\n';
    char buf[32];
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", r[i]);
        os << (i ? "," : "") << buf;
      }
      os << '\n';
    }
  }

 private:
  std::vector<Column> cols_;
  std::vector<std::vector<double>> rows_;
};

json diagnostics_json(const rab::dynamics::Diagnostics& d) {
  return {{"max_trace_drift", d.max_trace_drift},
          {"max_hermiticity", d.max_hermiticity},
          {"min_eigenvalue", d.min_eigenvalue},
          {"max_norm_drift", d.max_norm_drift},
          {"refinements", d.refinements},
          {"dt_us", d.dt}};
}

json params_json(const RunConfig& cfg) {
  const auto& p = cfg.params;
  json lifetimes = json::object();
  for (const auto& [k, v] : p.lifetimes_ms) lifetimes[k] = v;
  return {{"preset", p.name},
          {"scheme", md::to_string(p.scheme)},
          {"condition", md::to_string(p.condition)},
          {"rabi_mhz", p.rabi_mhz},
          {"c3_ghz_um3", p.c3},
          {"c6_ghz_um6", p.c6},
          {"distance_um", p.distance},
          {"lifetimes_ms", lifetimes},
          {"dissipation", cfg.dissipation},
          {"steps_per_cycle", cfg.steps_per_cycle}};
}

// Writes <out>/<verb>-<runid>.csv, the .json sidecar and optionally a plot script.
void emit(const RunConfig& cfg, const Table& table, json extra) {
  std::string dir = cfg.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutEnv);
    dir = env && *env ? env : "rabsim-out";
  }
  fs::create_directories(dir);
  const std::string id = cfg.run_id ? *cfg.run_id : rabsim::run_id_for(cfg.verb + "\n" + cfg.fingerprint);
  const std::string stem = cfg.verb + "-" + id;
  const fs::path csv = fs::path(dir) / (stem + ".csv");
  {
    std::ofstream os(csv, std::ios::binary);
    table.write(os);
    if (!os) throw rab::Error("cannot write " + csv.string());
  }
  json cols = json::array();
  for (const auto& c : table.columns()) cols.push_back({{"name", c.name}, {"unit", c.unit}, {"description", c.description}});
  json meta = {{"schema", "rabsim-run/1"}, {"verb", cfg.verb}, {"run_id", id}, {"csv", csv.filename().string()},
               {"columns", cols}, {"parameters", params_json(cfg)}};
  for (auto& [k, v] : extra.items()) meta[k] = v;
  {
    std::ofstream os(fs::path(dir) / (stem + ".json"), std::ios::binary);
    os << meta.dump(2) << '\n';
  }
  if (cfg.plot) {
    std::ofstream os(fs::path(dir) / (stem + ".plot.py"), std::ios::binary);
    os << "import sys\nimport pandas as pd\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n"
       << "df = pd.read_csv('" << csv.filename().string() << "')\n"
       << "ax = df.plot(x=df.columns[0], y=list(df.columns[1:]))\n"
       << "ax.set_ylabel('value')\nplt.tight_layout()\nplt.savefig('" << stem << ".png', dpi=150)\n";
  }
  std::cout << "wrote " << csv.string() << '\n';
}

md::DriveParams drive_for(const RunConfig& cfg) {
  md::DriveParams d;
  d.rabi = cfg.params.rabi();
  d.detuning = cfg.detuning ? *cfg.detuning
                            : md::solve_rab_detuning({cfg.params.condition},
                                                     cfg.params.interaction().strength(cfg.params.scheme), d.rabi);
  d.bichromatic = cfg.tones == md::ToneChoice::kBichromatic;
  d.blue_tone = cfg.tones != md::ToneChoice::kRed;
  return d;
}

int run_dynamics(RunConfig& cfg) {
  ex::PopulationOptions opt;
  opt.effective = cfg.effective;
  opt.dissipation = cfg.dissipation;
  opt.steps_per_cycle = cfg.steps_per_cycle;
  opt.samples = cfg.samples;
  const auto run = ex::population_dynamics(cfg.params, opt);
  std::vector<Column> cols{{"t", "us", "time"}};
  for (const auto& [name, v] : run.trajectory.observables) cols.push_back({name, "1", "population"});
  Table t(cols);
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    std::vector<double> r{run.trajectory.times[i]};
    for (const auto& [name, v] : run.trajectory.observables) r.push_back(v[i]);
    t.row(r);
  }
  std::printf("T = %.6g us, Delta = 2pi x %.6g MHz, V = 2pi x %.6g MHz\n", run.gate_time, run.detuning / kTwoPi,
              run.interaction / kTwoPi);
  std::printf("peak two-excitation population %.6f at t/T = %.4f, P11(T) = %.6f\n", run.peak_double,
              run.peak_time / run.gate_time, run.final_p11);
  emit(cfg, t,
       {{"summary", {{"gate_time_us", run.gate_time}, {"peak_double", run.peak_double}, {"final_p11", run.final_p11}}},
        {"diagnostics", diagnostics_json(run.trajectory.diagnostics)}});
  return 0;
}

ex::GateSetup setup_for(const RunConfig& cfg, std::optional<ex::GateModel> model) {
  ex::GateSetup s = (model && !cfg.preset_given) ? ex::robustness_setup(*model) : ex::preset_setup(cfg.params);
  if (cfg.detuning) s.detuning = cfg.detuning;
  return s;
}

int run_gate(RunConfig& cfg) {
  ex::GateSpec g;
  g.setup = setup_for(cfg, cfg.gate.model);
  g.theta = cfg.gate.theta;
  g.deviations = cfg.gate.deviations;
  g.effective = cfg.gate.effective;
  g.phase_switch = cfg.gate.phase_switch;
  g.align_to_beat = cfg.gate.align_to_beat;
  g.dissipation = cfg.dissipation;
  g.steps_per_cycle = cfg.steps_per_cycle;
  g.samples = cfg.samples;
  if (!g.phase_switch && std::abs(std::remainder(g.theta - std::numbers::pi, 2.0 * std::numbers::pi)) > 1e-12)
    std::printf("warning: without gate.phase_switch the conditional phase is pi, not theta\n");
  const auto r = ex::run_gate(g);
  Table t({{"t", "us", "time"}, {"fidelity", "1", "overlap with the ideal output state"}});
  for (std::size_t i = 0; i < r.times.size(); ++i) t.row({r.times[i], r.fidelity_trace[i]});
  std::printf("gate time %.6g us, simulated %.6g us, fidelity %.8f\n", r.gate_time, r.duration, r.fidelity);
  emit(cfg, t,
       {{"summary", {{"fidelity", r.fidelity}, {"gate_time_us", r.gate_time}, {"duration_us", r.duration},
                     {"theta_rad", g.theta}}},
        {"diagnostics", diagnostics_json(r.diagnostics)}});
  return 0;
}

int run_scan(RunConfig& cfg) {
  const auto& so = cfg.scan;
  std::vector<ex::ScanSeries> series;
  if (so.distance_case) {
    series = ex::distance_cases(so.distance_case);
  } else {
    for (auto m : so.series) {
      ex::GateSpec g;
      g.setup = ex::robustness_setup(m);
      series.push_back({ex::to_string(m), g});
    }
  }
  for (auto& s : series) {
    s.gate.dissipation = cfg.dissipation;
    s.gate.steps_per_cycle = cfg.steps_per_cycle;
    s.gate.align_to_beat = so.align_to_beat;
  }
  const auto values = so.log_spacing ? ex::logspace(so.from, so.to, so.points) : ex::linspace(so.from, so.to, so.points);
  const auto r = ex::robustness_scan(so.axis, series, values, cfg.workers);
  std::vector<Column> cols{{r.axis, r.unit, "scanned parameter"}};
  for (const auto& s : r.series) cols.push_back({s, "1", "gate fidelity"});
  Table t(cols);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    std::vector<double> row{r.values[i]};
    for (const auto& f : r.fidelities) row.push_back(f[i]);
    t.row(row);
  }
  json widths = json::object();
  for (std::size_t k = 0; k < r.series.size(); ++k) {
    const double w = ex::width_above(r.values, r.fidelities[k], 0.9);
    widths[r.series[k]] = w;
    std::printf("%-14s width with F > 0.9: %.6g %s\n", r.series[k].c_str(), w, r.unit.c_str());
  }
  json meta = json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  emit(cfg, t, {{"summary", {{"width_above_0.9", widths}}}, {"series", meta}, {"diagnostics", diagnostics_json(r.diagnostics)}});
  return 0;
}

int run_geometric(RunConfig& cfg) {
  auto thetas = cfg.geometric.thetas;
  if (thetas.empty()) {
    const double pi = std::numbers::pi;
    thetas = {pi, 3 * pi / 4, pi / 2, pi / 4, pi / 6};
  }
  std::vector<ex::GateResult> results(thetas.size());
  ex::GeometricOptions opt;
  opt.effective = cfg.geometric.effective;
  opt.dissipation = cfg.dissipation;
  opt.align_to_beat = cfg.geometric.align_to_beat;
  opt.steps_per_cycle = cfg.steps_per_cycle;
  opt.samples = 2;
  ex::parallel_for(thetas.size(), cfg.workers,
                   [&](std::size_t i) { results[i] = ex::geometric_gate(thetas[i], cfg.params, opt); });
  Table t({{"theta", "rad", "target controlled phase"}, {"fidelity", "1", "gate fidelity at the end of the pulse"}});
  rab::dynamics::Diagnostics worst;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    t.row({thetas[i], results[i].fidelity});
    std::printf("theta = %.6f rad  F = %.6f\n", thetas[i], results[i].fidelity);
    worst.max_trace_drift = std::max(worst.max_trace_drift, results[i].diagnostics.max_trace_drift);
    worst.max_hermiticity = std::max(worst.max_hermiticity, results[i].diagnostics.max_hermiticity);
    worst.min_eigenvalue = std::min(worst.min_eigenvalue, results[i].diagnostics.min_eigenvalue);
  }
  emit(cfg, t, {{"diagnostics", diagnostics_json(worst)}});
  return 0;
}

int run_steady(RunConfig& cfg) {
  if (cfg.params.scheme != md::SchemeId::kForster)
    throw rab::ConfigError("steady entanglement is defined for the forster scheme");
  ex::SteadySetup su;
  su.interaction = cfg.params.interaction();
  if (cfg.rabi_given) su.rabi = cfg.params.rabi();
  su.rates = cfg.dissipation ? cfg.params.rates() : md::DecayRates::none(md::scheme(md::SchemeId::kForster));
  const auto model = ex::steady_model(su);
  const auto ratios = ex::logspace(cfg.steady.ratio_from, cfg.steady.ratio_to, cfg.steady.points);
  std::vector<ex::SteadyResult> res(ratios.size());
  ex::parallel_for(ratios.size(), cfg.workers, [&](std::size_t i) {
    res[i] = ex::steady_entanglement(ex::MicrowaveParams::from_ratio(ratios[i], model.rabi_eff_prime), model);
  });
  Table t({{"ratio", "1", "microwave Rabi frequency over Omega'_eff"},
           {"omega_mw", "rad/us", "microwave Rabi frequency"},
           {"infidelity", "1", "1 - <S|rho_ss|S>"}});
  double best = 1.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    t.row({ratios[i], ratios[i] * model.rabi_eff_prime, res[i].infidelity});
    best = std::min(best, res[i].infidelity);
  }
  std::printf("Omega'_eff = %.6g rad/us, minimum infidelity %.3e\n", model.rabi_eff_prime, best);
  json summary = {{"rabi_eff_prime", model.rabi_eff_prime}, {"min_infidelity", best}};
  if (cfg.steady.full_check_ratio) {
    const double ratio = *cfg.steady.full_check_ratio;
    const auto full = ex::steady_entanglement_full(ex::MicrowaveParams::from_ratio(ratio, model.rabi_eff_prime), su,
                                                   cfg.steps_per_cycle);
    const auto eff = ex::steady_entanglement(ex::MicrowaveParams::from_ratio(ratio, model.rabi_eff_prime), model);
    std::printf("full-model check at ratio %.4g: infidelity %.3e (effective %.3e)\n", ratio, full.infidelity,
                eff.infidelity);
    summary["full_check"] = {{"ratio", ratio}, {"full_infidelity", full.infidelity}, {"effective_infidelity", eff.infidelity}};
  }
  emit(cfg, t, {{"summary", summary}});
  return 0;
}

int run_effective_check(RunConfig& cfg) {
  const auto& s = md::scheme(cfg.params.scheme);
  md::DriveParams d = drive_for(cfg);
  const auto inter = cfg.params.interaction();
  const auto model = rab::effective::derive_effective(s, d, inter);
  const auto ref = rab::effective::closed_form(s, d);
  const auto block = rab::effective::coupling_block(s);
  const auto& basis = s.basis();
  Table t({{"row", "1", "basis index"}, {"col", "1", "basis index"},
           {"generated_re", "rad/us", "effective generator"}, {"generated_im", "rad/us", "effective generator"},
           {"closed_re", "rad/us", "closed form"}, {"closed_im", "rad/us", "closed form"}});
  double dev = 0.0;
  std::printf("coupling block entries (rad/us)\n%-6s %-6s %22s %22s\n", "row", "col", "generated", "closed form");
  for (auto i : block) {
    for (auto j : block) {
      const auto g = model.h_eff(i, j), c = ref(i, j);
      dev = std::max(dev, std::abs(g - c));
      t.row({double(i), double(j), g.real(), g.imag(), c.real(), c.imag()});
      if (std::abs(g) < 1e-9 && std::abs(c) < 1e-9) continue;
      std::printf("%-6s %-6s %+10.6f%+10.6fi %+10.6f%+10.6fi\n", basis[i].str().c_str(), basis[j].str().c_str(),
                  g.real(), g.imag(), c.real(), c.imag());
    }
  }
  const double scale = d.rabi * d.rabi / d.detuning;
  std::printf("max deviation %.3e rad/us (%.3e of Omega^2/Delta)\n", dev, dev / scale);
  for (const auto& w : model.warnings) std::printf("warning: %s\n", w.c_str());
  emit(cfg, t, {{"summary", {{"max_deviation", dev}, {"relative_deviation", dev / scale},
                             {"rabi_eff", model.rabi_eff}, {"validity_ratio", model.validity_ratio}}}});
  return 0;
}

int run_crossover(RunConfig& cfg) {
  Table t({{"n", "1", "principal quantum number"}, {"c3", "GHz um^3", "dipole coefficient"},
           {"defect", "GHz", "Forster defect"}, {"r_c", "um", "crossover distance"}});
  json summary = json::object();
  if (cfg.crossover.table) {
    std::ifstream is(*cfg.crossover.table);
    if (!is) throw rab::ConfigError("cannot open crossover table '" + *cfg.crossover.table + "'");
    const auto rows = ex::read_crossover_table(is);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
      const double rc = md::crossover_distance(r.c3, r.defect);
      t.row({r.n, r.c3, r.defect, rc});
      pts.emplace_back(r.n, rc);
    }
    const double k = ex::fit_power_law(pts);
    std::printf("R_c ~ n^%.4f over %zu points\n", k, pts.size());
    summary["exponent"] = k;
  } else {
    if (!cfg.crossover.c3 || !cfg.crossover.defect)
      throw rab::ConfigError("crossover needs either 'table' or both 'c3' and 'defect'");
    const double rc = md::crossover_distance(*cfg.crossover.c3, *cfg.crossover.defect);
    t.row({std::nan(""), *cfg.crossover.c3, *cfg.crossover.defect, rc});
    std::printf("R_c = %.6g um\n", rc);
    summary["r_c_um"] = rc;
  }
  emit(cfg, t, {{"summary", summary}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg antiblockade simulator"};
  app.require_subcommand(1);
  std::string config_path, preset, out_dir, run_id;
  std::size_t workers = 0;
  bool plot = false;
  double steps = 0.0;

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"dynamics", "population dynamics over one effective period"},
      {"gate", "single controlled-phase gate fidelity"},
      {"scan", "gate fidelity sweep"},
      {"geometric", "phase-switched geometric gates"},
      {"steady", "dissipative steady entanglement"},
      {"effective-check", "generated vs closed-form effective Hamiltonian"},
      {"crossover", "DD/vdW crossover distance"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "YAML run configuration");
    sub->add_option("-p,--preset", preset, "built-in parameter preset");
    sub->add_option("-o,--out", out_dir, std::string("output directory (default $") + kOutEnv + " or ./rabsim-out)");
    sub->add_option("-w,--workers", workers, "maximum concurrent sweep points");
    sub->add_option("--run-id", run_id, "override the content-derived run id");
    sub->add_option("--steps-per-cycle", steps, "RK4 steps per cycle of the fastest frequency");
    sub->add_flag("--plot", plot, "also write a plotting script");
    subs.push_back(sub);
  }
  auto* preset_cmd = app.add_subcommand("preset", "inspect built-in presets");
  preset_cmd->require_subcommand(1);
  auto* list_cmd = preset_cmd->add_subcommand("list", "list preset names");
  std::string show_name;
  auto* show_cmd = preset_cmd->add_subcommand("show", "print a preset as YAML");
  show_cmd->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& p : md::presets()) std::cout << p.name << '\n';
      return 0;
    }
    if (show_cmd->parsed()) {
      std::cout << rabsim::describe_preset(md::preset(show_name));
      return 0;
    }
    CLI::App* sub = nullptr;
    for (auto* s : subs)
      if (s->parsed()) sub = s;

    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw rab::ConfigError("cannot open config file '" + config_path + "'");
      std::stringstream ss;
      ss << is.rdbuf();
      cfg = rabsim::parse_config(ss.str(), config_path);
    } else {
      cfg = rabsim::parse_config("", "<none>");
    }
    cfg.verb = sub->get_name();
    if (!preset.empty()) {
      try {
        rabsim::apply_preset(cfg, preset);
      } catch (const rab::DomainError& e) {
        throw rab::ConfigError(e.what());
      }
      cfg.fingerprint += "\npreset=" + preset;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers) cfg.workers = workers;
    if (plot) cfg.plot = true;
    if (!run_id.empty()) cfg.run_id = run_id;
    if (steps > 0.0) {
      if (steps < 20.0) throw rab::ConfigError("--steps-per-cycle must be at least 20");
      cfg.steps_per_cycle = steps;
      cfg.fingerprint += "\nsteps=" + std::to_string(steps);
    }

    const std::string& v = cfg.verb;
    if (v == "dynamics") return run_dynamics(cfg);
    if (v == "gate") return run_gate(cfg);
    if (v == "scan") return run_scan(cfg);
    if (v == "geometric") return run_geometric(cfg);
    if (v == "steady") return run_steady(cfg);
    if (v == "effective-check") return run_effective_check(cfg);
    if (v == "crossover") return run_crossover(cfg);
    return 2;
  } catch (const rab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const rab::DomainError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const rab::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
