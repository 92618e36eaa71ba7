#include "sirpns/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

namespace sirpns {

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

void RunConfig::validate() const {
  if (std::find(kExperimentIds.begin(), kExperimentIds.end(), experiment) == kExperimentIds.end()) {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  if (nx < 1 || ny < 1) throw std::invalid_argument("nx and ny must be at least 1");
  controls.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive");
  if (snapshot_every < 1) throw std::invalid_argument("snapshot_every must be at least 1");
  if (monitor_every < 1) throw std::invalid_argument("monitor_every must be at least 1");
  if (initial == InitialData::Preset::Custom) {
    throw std::invalid_argument("custom initial data cannot come from a config file");
  }
  for (double v : {S0, I0, R0, C0}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("uniform initial values must be nonnegative");
  }
  for (const auto& v : sirpns::validate(params)) {
    if (v.fatal) throw std::invalid_argument(v.message);
  }
  if (!(scheme.gmres.tol > 0.0) || scheme.gmres.restart < 1 || scheme.gmres.max_iters < 1) {
    throw std::invalid_argument("gmres settings must be positive");
  }
}

RunConfig experiment_preset(const std::string& id) {
  RunConfig c;
  c.experiment = id;
  auto& p = c.params;
  if (id == "exp1") {
    p.alpha = 0.0;
    p.beta = CoefficientFn::constant(kDefaultBeta0);
    c.scheme.fluid = false;
  } else if (id == "exp2") {
    p.beta = CoefficientFn::affine(kDefaultBeta0);
    c.scheme.fluid = false;
  } else if (id == "exp3") {
    p.beta = CoefficientFn::affine(kDefaultBeta0);
    p.nu = CoefficientFn::constant(kDefaultNu0);
  } else if (id == "exp4") {
    p.beta = CoefficientFn::affine(kDefaultBeta0);
    p.nu = CoefficientFn::affine(kDefaultNu0);
  } else if (id == "pathogen_only") {
    p.alpha = 0.0;
    c.scheme.sir_frozen = true;
  } else if (id != "custom") {
    throw std::invalid_argument("unknown experiment '" + id + "'");
  }
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + text + "'");
}

CoefficientFn::Kind parse_kind(const std::string& key, const std::string& text) {
  if (text == "constant") return CoefficientFn::Kind::Constant;
  if (text == "affine") return CoefficientFn::Kind::Affine;
  if (text == "clamped_affine") return CoefficientFn::Kind::ClampedAffine;
  throw std::invalid_argument(key + ": expected constant, affine or clamped_affine, got '" + text + "'");
}

std::string kind_name(CoefficientFn::Kind k) {
  switch (k) {
    case CoefficientFn::Kind::Constant: return "constant";
    case CoefficientFn::Kind::Affine: return "affine";
    case CoefficientFn::Kind::ClampedAffine: return "clamped_affine";
  }
  return "constant";
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key real(std::string section, std::string name, double RunConfig::*field) {
  return {section, name,
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_double(name, v); },
          [field](const RunConfig& c) { return format_double(c.*field); }};
}

Key real(std::string section, std::string name, std::function<double&(RunConfig&)> ref) {
  return {section, name,
          [name, ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(name, v); },
          [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

Key integer(std::string section, std::string name, std::function<int&(RunConfig&)> ref) {
  return {section, name,
          [name, ref](RunConfig& c, const std::string& v) { ref(c) = parse_int(name, v); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

Key boolean(std::string section, std::string name, std::function<bool&(RunConfig&)> ref) {
  return {section, name,
          [name, ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(name, v); },
          [ref](const RunConfig& c) -> std::string { return ref(const_cast<RunConfig&>(c)) ? "true" : "false"; }};
}

Key coefficient_kind(std::string name, CoefficientFn ModelParams::*fn) {
  return {"model", name,
          [name, fn](RunConfig& c, const std::string& v) { (c.params.*fn).kind = parse_kind(name, v); },
          [fn](const RunConfig& c) { return kind_name((c.params.*fn).kind); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"run", "experiment", [](RunConfig& c, const std::string& v) { c.experiment = v; },
                 [](const RunConfig& c) { return c.experiment; }});
    k.push_back({"run", "output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const RunConfig& c) { return c.output_dir.string(); }});
    k.push_back(integer("run", "snapshot_every", [](RunConfig& c) -> int& { return c.snapshot_every; }));
    k.push_back(integer("run", "monitor_every", [](RunConfig& c) -> int& { return c.monitor_every; }));
    k.push_back(boolean("run", "deterministic", [](RunConfig& c) -> bool& { return c.deterministic; }));

    k.push_back(integer("mesh", "nx", [](RunConfig& c) -> int& { return c.nx; }));
    k.push_back(integer("mesh", "ny", [](RunConfig& c) -> int& { return c.ny; }));

    k.push_back(real("time", "dt", [](RunConfig& c) -> double& { return c.controls.dt; }));
    k.push_back(real("time", "T", &RunConfig::T));
    k.push_back({"time", "picard_mode",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "to_convergence") {
                     c.controls.picard_mode = PicardMode::ToConvergence;
                   } else if (v == "single_sweep") {
                     c.controls.picard_mode = PicardMode::SingleSweep;
                   } else {
                     throw std::invalid_argument("picard_mode: expected to_convergence or single_sweep, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) -> std::string {
                   return c.controls.picard_mode == PicardMode::ToConvergence ? "to_convergence" : "single_sweep";
                 }});
    k.push_back(real("time", "picard_tol", [](RunConfig& c) -> double& { return c.controls.picard_tol; }));
    k.push_back(integer("time", "picard_max", [](RunConfig& c) -> int& { return c.controls.picard_max; }));

    using P = ModelParams;
    const auto param = [](std::string name, double P::*f) {
      return real("model", name, [f](RunConfig& c) -> double& { return c.params.*f; });
    };
    k.push_back(param("D_S", &P::D_S));
    k.push_back(param("D_I", &P::D_I));
    k.push_back(param("D_R", &P::D_R));
    k.push_back(param("D_C", &P::D_C));
    k.push_back(param("alpha", &P::alpha));
    k.push_back(param("gamma", &P::gamma));
    k.push_back(param("lambda", &P::lambda));
    k.push_back(param("eta", &P::eta));
    k.push_back(param("Lambda", &P::Lambda));
    k.push_back(param("n_floor", &P::n_floor));
    k.push_back(coefficient_kind("beta", &P::beta));
    k.push_back(real("model", "beta0", [](RunConfig& c) -> double& { return c.params.beta.c0; }));
    k.push_back(real("model", "beta_lo", [](RunConfig& c) -> double& { return c.params.beta.lo; }));
    k.push_back(real("model", "beta_hi", [](RunConfig& c) -> double& { return c.params.beta.hi; }));
    k.push_back(coefficient_kind("nu", &P::nu));
    k.push_back(real("model", "nu0", [](RunConfig& c) -> double& { return c.params.nu.c0; }));
    k.push_back(real("model", "nu_lo", [](RunConfig& c) -> double& { return c.params.nu.lo; }));
    k.push_back(real("model", "nu_hi", [](RunConfig& c) -> double& { return c.params.nu.hi; }));
    k.push_back(real("model", "force_x", [](RunConfig& c) -> double& { return c.params.body_force.x(); }));
    k.push_back(real("model", "force_y", [](RunConfig& c) -> double& { return c.params.body_force.y(); }));

    k.push_back({"initial", "preset",
                 [](RunConfig& c, const std::string& v) { c.initial = initial_preset_from_string(v); },
                 [](const RunConfig& c) { return to_string(c.initial); }});
    k.push_back(real("initial", "S0", &RunConfig::S0));
    k.push_back(real("initial", "I0", &RunConfig::I0));
    k.push_back(real("initial", "R0", &RunConfig::R0));
    k.push_back(real("initial", "C0", &RunConfig::C0));

    k.push_back(boolean("scheme", "fluid", [](RunConfig& c) -> bool& { return c.scheme.fluid; }));
    k.push_back(boolean("scheme", "momentum_convection",
                        [](RunConfig& c) -> bool& { return c.scheme.momentum_convection; }));
    k.push_back(boolean("scheme", "sir_frozen", [](RunConfig& c) -> bool& { return c.scheme.sir_frozen; }));
    k.push_back(boolean("scheme", "clip_negative", [](RunConfig& c) -> bool& { return c.scheme.clip_negative; }));
    k.push_back(boolean("scheme", "artificial_diffusion",
                        [](RunConfig& c) -> bool& { return c.scheme.artificial_diffusion; }));
    k.push_back({"scheme", "solver",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "direct") {
                     c.scheme.solver = LinearSolverKind::Direct;
                   } else if (v == "gmres") {
                     c.scheme.solver = LinearSolverKind::Gmres;
                   } else {
                     throw std::invalid_argument("solver: expected direct or gmres, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) -> std::string {
                   return c.scheme.solver == LinearSolverKind::Direct ? "direct" : "gmres";
                 }});
    k.push_back(real("scheme", "gmres_tol", [](RunConfig& c) -> double& { return c.scheme.gmres.tol; }));
    k.push_back(integer("scheme", "gmres_restart", [](RunConfig& c) -> int& { return c.scheme.gmres.restart; }));
    k.push_back(integer("scheme", "gmres_max_iters", [](RunConfig& c) -> int& { return c.scheme.gmres.max_iters; }));
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const auto& k : keys()) {
    if (k.section == s) return true;
  }
  return false;
}

struct Entry {
  const Key* key;
  std::string value;
  int line;
};

}  // namespace

namespace {

int blame_line(const std::vector<Entry>& entries, const std::string& message) {
  const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  int line = entries.empty() ? 0 : entries.back().line;
  int best = -1;
  for (const auto& e : entries) {
    const std::string& name = e.key->name;
    for (auto pos = message.find(name); pos != std::string::npos; pos = message.find(name, pos + 1)) {
      const bool left = pos == 0 || !is_word(message[pos - 1]);
      const auto end = pos + name.size();
      const bool right = end == message.size() || !is_word(message[end]);
      if (left && right && e.line > best) best = e.line;
    }
  }
  return best > 0 ? best : line;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& experiment_override) {
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  std::vector<std::string> unknown;
  int first_unknown_line = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value, got '" + line + "'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (name.empty()) throw ConfigError(line_no, "missing key before '='");
    if (value.empty()) throw ConfigError(line_no, "missing value for " + name);

    const Key* key = find_key(name);
    if (key == nullptr || (!section.empty() && key->section != section)) {
      unknown.push_back(section.empty() ? name : section + "." + name);
      if (first_unknown_line == 0) first_unknown_line = line_no;
      continue;
    }
    if (const auto it = seen.find(name); it != seen.end()) {
      throw ConfigError(line_no, "duplicate key " + name + " (first set on line " +
                                     std::to_string(it->second) + ")");
    }
    seen[name] = line_no;
    entries.push_back({key, value, line_no});
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw ConfigError(first_unknown_line, "unknown keys: " + list);
  }

  RunConfig config;
  const auto exp = std::find_if(entries.begin(), entries.end(),
                                [](const Entry& e) { return e.key->name == "experiment"; });
  if (!experiment_override.empty()) {
    if (exp != entries.end()) entries.erase(exp);
    try {
      config = experiment_preset(experiment_override);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(0, e.what());
    }
  } else {
    try {
      config = experiment_preset(exp == entries.end() ? "exp1" : exp->value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(exp->line, e.what());
    }
  }
  for (const auto& e : entries) {
    try {
      e.key->set(config, e.value);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(e.line, err.what());
    }
  }
  // Checked once all keys are in, so related keys may come in any order. The error is
  // reported on the last line whose key the message names.
  try {
    config.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(blame_line(entries, err.what()), err.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& experiment_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment_override);
}

std::string serialize_config(const RunConfig& config) {
  std::string out, section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

InitialData initial_data(const RunConfig& config) {
  switch (config.initial) {
    case InitialData::Preset::Vortex: return vortex_initial_data();
    case InitialData::Preset::Uniform:
      return uniform_initial_data(config.S0, config.I0, config.R0, config.C0);
    case InitialData::Preset::Zero: return zero_initial_data();
    case InitialData::Preset::Custom: break;
  }
  throw std::invalid_argument("custom initial data cannot come from a config file");
}

State initial_state(const RunConfig& config, const Discretization& disc) {
  State s = initial_state(initial_data(config), disc);
  if (!config.scheme.fluid) s.U.setZero();
  return s;
}

void write_vtk_snapshot(const State& state, const Discretization& disc,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const auto& mesh = disc.mesh;
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  out << std::setprecision(9);
  out << "# vtk DataFile Version 2.0\n";
  out << "SIRPNS state t=" << state.t << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";
  out << "POINT_DATA " << nv << '\n';
  const auto scalars = [&](const char* name, const Vector& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) out << (f.size() == nv ? f[v] : 0.0) << '\n';
  };
  scalars("S", state.S);
  scalars("I", state.I);
  scalars("R", state.R);
  scalars("C", state.C);
  scalars("p", state.p);
  out << "VECTORS U double\n";
  const bool has_u = state.U.size() == disc.velocity.size();
  for (int v = 0; v < nv; ++v) {
    const double u = has_u ? state.U[disc.velocity.vertex_dof(v, 0)] : 0.0;
    const double w = has_u ? state.U[disc.velocity.vertex_dof(v, 1)] : 0.0;
    out << u << ' ' << w << " 0\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MonitorCsv::MonitorCsv(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  out_ << kMonitorHeader << '\n';
  out_ << std::setprecision(17);
  out_.flush();
}

void MonitorCsv::append(const MonitorRecord& r) {
  for (double v : {r.t, r.min_S, r.max_S, r.min_I, r.max_I, r.min_C, r.max_C, r.int_S, r.int_I,
                   r.int_R, r.int_C, r.int_N, r.l2_U, r.h1_U, r.div_res}) {
    out_ << v << ',';
  }
  out_ << r.picard_iters << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void write_monitor_csv(const std::vector<MonitorRecord>& records, const std::filesystem::path& path) {
  MonitorCsv csv(path);
  for (const auto& r : records) csv.append(r);
}

std::vector<MonitorRecord> read_monitor_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMonitorHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<MonitorRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 16) throw std::runtime_error(path.string() + ": expected 16 columns");
    MonitorRecord r;
    r.t = v[0];
    r.min_S = v[1];
    r.max_S = v[2];
    r.min_I = v[3];
    r.max_I = v[4];
    r.min_C = v[5];
    r.max_C = v[6];
    r.int_S = v[7];
    r.int_I = v[8];
    r.int_R = v[9];
    r.int_C = v[10];
    r.int_N = v[11];
    r.l2_U = v[12];
    r.h1_U = v[13];
    r.div_res = v[14];
    r.picard_iters = static_cast<int>(v[15]);
    out.push_back(r);
  }
  return out;
}

RunLock::RunLock(const std::filesystem::path& dir) : path_(dir / ".run.lock") {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    throw std::runtime_error("output directory " + dir.string() +
                             " is locked by another run (remove " + path_.string() + " if stale)");
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

RunResult run_experiment(const RunConfig& config, std::ostream* log) {
  config.validate();
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  RunLock lock(dir);
  {
    std::ofstream cfg(dir / "config.cfg");
    cfg << serialize_config(config);
    if (!cfg) throw std::runtime_error("cannot write " + (dir / "config.cfg").string());
  }

  const auto disc = make_discretization(build_unit_square_mesh(config.nx, config.ny));
  const TimeStepper stepper(disc, config.params, config.controls, config.scheme);
  const State initial = initial_state(config, *disc);
  if (log) {
    for (const auto& v : validate(config.params)) {
      if (!v.fatal) *log << "warning: " << v.message << '\n';
    }
  }

  MonitorCsv csv(dir / "monitor.csv");
  const int steps = step_count(initial.t, config.T, config.controls.dt);
  const auto start = std::chrono::steady_clock::now();
  MonitorConfig mc;
  mc.monitor_every = config.monitor_every;
  mc.snapshot_every = config.snapshot_every;
  mc.on_monitor = [&](const MonitorRecord& r) { csv.append(r); };
  mc.on_snapshot = [&](int n, const State& s) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06d.vtk", n);
    write_vtk_snapshot(s, *disc, dir / name);
    if (log) {
      *log << "step " << n << '/' << steps << " t=" << s.t;
      if (!config.deterministic) {
        *log << " elapsed="
             << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << "s";
      }
      *log << '\n';
    }
  };
  mc.on_step = [&](int n, const State&, const StepReport& r) {
    if (log && !r.picard_converged) {
      *log << "warning: Picard iteration stopped at step " << n << " with update " << r.picard_update << '\n';
    }
  };
  return run(stepper, initial, config.T, mc);
}

}  // namespace sirpns
