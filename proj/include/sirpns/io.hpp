#pragma once

#include "sirpns/discretization.hpp"
#include "sirpns/model.hpp"
#include "sirpns/monitor.hpp"
#include "sirpns/timestepper.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sirpns {

inline const std::vector<std::string> kExperimentIds = {"exp1", "exp2", "exp3", "exp4",
                                                        "pathogen_only", "custom"};

struct RunConfig {
  std::string experiment = "exp1";
  int nx = 32;
  int ny = 32;
  StepControls controls;
  double T = 40.0;
  ModelParams params;
  SchemeOptions scheme;
  InitialData::Preset initial = InitialData::Preset::Vortex;
  // values used by the uniform preset
  double S0 = 0.9, I0 = 0.1, R0 = 0.0, C0 = 0.0;
  std::filesystem::path output_dir = "out";
  int snapshot_every = 500;
  int monitor_every = 1;
  bool deterministic = true;  // no wall-clock figures in the log

  /// Throws std::invalid_argument naming the first broken field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Line-oriented "key = value" with optional [section] headers and # comments. The
/// experiment key selects the preset the remaining keys override; an empty text gives
/// experiment_preset("exp1").
/// A non-empty experiment_override replaces the experiment named in the text.
RunConfig parse_config(const std::string& text, const std::string& experiment_override = "");
RunConfig load_config(const std::filesystem::path& path, const std::string& experiment_override = "");
std::string serialize_config(const RunConfig& config);

/// Throws std::invalid_argument for unknown ids.
RunConfig experiment_preset(const std::string& id);

InitialData initial_data(const RunConfig& config);
/// Initial state for the config; the velocity is zeroed when the fluid is switched off.
State initial_state(const RunConfig& config, const Discretization& disc);

/// Legacy ASCII VTK, vertex values only (bubble dofs dropped), 9 significant digits.
void write_vtk_snapshot(const State& state, const Discretization& disc,
                        const std::filesystem::path& path);

inline const char* kMonitorHeader =
    "t,min_S,max_S,min_I,max_I,min_C,max_C,int_S,int_I,int_R,int_C,int_N,l2_U,h1_U,div_res,"
    "picard_iters";

/// Streams monitor rows to a CSV file, header first, 17 significant digits.
class MonitorCsv {
 public:
  explicit MonitorCsv(const std::filesystem::path& path);
  void append(const MonitorRecord& record);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_monitor_csv(const std::vector<MonitorRecord>& records, const std::filesystem::path& path);
std::vector<MonitorRecord> read_monitor_csv(const std::filesystem::path& path);

/// Exclusive lock file in an output directory, released on destruction.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Runs the configured experiment, writing config.cfg, monitor.csv and
/// snapshot_NNNNNN.vtk into config.output_dir. Progress goes to log when given.
RunResult run_experiment(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace sirpns
