#pragma once

// Run configuration for the rabsim command-line tool: YAML ingestion with
// strict keys and unit-carrying physical quantities.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rab/experiments.hpp"
#include "rab/model.hpp"

namespace rabsim {

enum class Dimension { kFrequency, kTime, kLength, kAngle, kC3, kC6 };

/// Parses "<number> <unit>". Frequencies come back in rad/us: ordinary units
/// (Hz, kHz, MHz, GHz) are multiplied by 2*pi when `x2pi` is set; "rad/us"
/// and "rad/ns" are taken as angular. Times in us, lengths in um, angles in
/// rad, C3 in GHz um^3, C6 in GHz um^6. Throws rab::ConfigError.
double parse_quantity(const std::string& text, Dimension dim, bool x2pi = true);

struct GateOptions {
  std::optional<rab::experiments::GateModel> model;
  double theta = 3.141592653589793;
  rab::experiments::Deviations deviations;
  bool effective = false;
  bool phase_switch = false;
  bool align_to_beat = false;
};

struct ScanOptions {
  rab::experiments::ScanAxis axis = rab::experiments::ScanAxis::kDOmega;
  double from = -0.1;
  double to = 0.1;
  std::size_t points = 41;
  bool log_spacing = false;
  std::vector<rab::experiments::GateModel> series{rab::experiments::GateModel::kDdForster,
                                                   rab::experiments::GateModel::kVdwReference};
  int distance_case = 0;  // 1 or 2 selects the predefined distance pairs
  bool align_to_beat = false;
};

struct GeometricConfig {
  std::vector<double> thetas;
  bool effective = false;
  bool align_to_beat = true;
};

struct SteadyOptions {
  double ratio_from = 0.01;
  double ratio_to = 1.0;
  std::size_t points = 30;
  std::optional<double> full_check_ratio;
};

struct CrossoverOptions {
  std::optional<std::string> table;
  std::optional<double> c3;      // GHz um^3
  std::optional<double> defect;  // GHz
};

struct RunConfig {
  std::string verb;
  std::string preset_name = "forster-ravets";
  rab::model::Preset params;  // preset with overrides applied
  bool preset_given = false;
  bool rabi_given = false;
  std::optional<double> detuning;  // rad/us; default from the condition
  rab::model::ToneChoice tones = rab::model::ToneChoice::kBichromatic;
  bool dissipation = true;
  bool effective = false;  // dynamics verb

  double steps_per_cycle = 40.0;
  std::size_t samples = 400;
  std::size_t workers = 1;
  std::string out_dir;
  bool plot = false;
  std::optional<std::string> run_id;

  GateOptions gate;
  ScanOptions scan;
  GeometricConfig geometric;
  SteadyOptions steady;
  CrossoverOptions crossover;

  /// Text the run id is derived from.
  std::string fingerprint;
};

/// Parses YAML text. `source` names the file in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Applies a preset by name (resets physical parameters).
void apply_preset(RunConfig& cfg, const std::string& name);

/// First 12 hex digits of a 64-bit FNV-1a hash of `text`.
std::string run_id_for(const std::string& text);

/// YAML dump of a preset with units.
std::string describe_preset(const rab::model::Preset& p);

}  // namespace rabsim
