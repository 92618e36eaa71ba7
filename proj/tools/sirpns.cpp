// Command-line entry point: run experiments, verification suites and mesh summaries.

#include "sirpns/io.hpp"
#include "sirpns/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

using namespace sirpns;

namespace {

bool report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  return ok;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

bool suite_ode(double T) {
  const auto d = ode_equivalence(ModelParams{}, 16, 0.01, T);
  std::cout << "max relative deviation vs RK4 (16x16, dt=0.01, T=" << T << "): S " << d.S
            << "  I " << d.I << "  R " << d.R << '\n';
  return report("ode", d.max() <= 1e-3, "max " + num(d.max()) + " (threshold 1e-3)");
}

bool suite_mms() {
  bool ok = true;
  const std::vector<int> meshes{16, 32, 64};

  ScalarMmsProblem transient;
  transient.U = Point(0.5, 0.3);
  auto t = mms_scalar_study(transient, meshes);
  std::cout << "scalar, time dependent, dt = h^2\n";
  t.print(std::cout);
  ok &= report("scalar transient L2 rate", t.min_rate(0) >= 1.9, num(t.min_rate(0)));

  ScalarMmsProblem steady;
  steady.steady = true;
  steady.lambda = 0.0;
  t = mms_scalar_study(steady, meshes);
  std::cout << "scalar, steady\n";
  t.print(std::cout);
  ok &= report("scalar steady L2 rate", t.min_rate(0) >= 1.9, num(t.min_rate(0)));

  StokesMmsProblem stokes;
  for (int variable = 0; variable < 2; ++variable) {
    if (variable) {
      stokes.nu = [](const Point& x) { return 0.1 + 0.5 * x.x() * x.y(); };
      stokes.grad_nu = [](const Point& x) { return Point(0.5 * x.y(), 0.5 * x.x()); };
    }
    t = mms_stokes_study(stokes, meshes);
    const std::string tag = variable ? "stokes nu(x)" : "stokes nu const";
    std::cout << tag << '\n';
    t.print(std::cout);
    ok &= report(tag + " u H1 rate", t.min_rate(1) >= 0.9, num(t.min_rate(1)));
    ok &= report(tag + " u L2 rate", t.min_rate(0) >= 1.7, num(t.min_rate(0)));
    ok &= report(tag + " p L2 rate", t.min_rate(2) >= 0.9, num(t.min_rate(2)));
  }
  return ok;
}

// Short coarse runs of every preset checking the monitored invariants.
bool suite_invariants() {
  bool ok = true;
  for (const std::string id : {"exp1", "exp2", "exp3", "exp4", "pathogen_only"}) {
    RunConfig cfg = experiment_preset(id);
    cfg.nx = cfg.ny = 16;
    cfg.T = 1.0;
    const auto disc = make_discretization(build_unit_square_mesh(cfg.nx, cfg.ny));
    const TimeStepper stepper(disc, cfg.params, cfg.controls, cfg.scheme);
    const auto result = run(stepper, initial_state(cfg, *disc), cfg.T);

    // The interpolated initial velocity is not discretely solenoidal; solved steps are.
    double min_value = std::numeric_limits<double>::infinity(), div = 0.0;
    for (std::size_t k = 0; k < result.monitors.size(); ++k) {
      const auto& m = result.monitors[k];
      min_value = std::min({min_value, m.min_S, m.min_I, m.min_R, m.min_C});
      if (k > 0) div = std::max(div, m.div_res / std::max(1.0, m.max_U));
    }
    ok &= report(id + " positivity", min_value >= -1e-8, "min nodal value " + num(min_value));
    ok &= report(id + " continuity", div <= 1e-8, "max |BU|/max(1,|U|) " + num(div));
    if (!cfg.scheme.sir_frozen) {
      const auto bal = population_balance(result.monitors, cfg.params, cfg.controls.dt, disc->area);
      ok &= report(id + " population balance", bal.max_relative <= 10 * cfg.controls.picard_tol,
                   "max relative defect " + num(bal.max_relative));
    }
  }

  // Pathogen decay without flow or shedding, Stokes energy decay without convection.
  const auto disc = make_discretization(build_unit_square_mesh(16, 16));
  ModelParams p;
  p.alpha = 0.0;
  SchemeOptions still;
  still.fluid = false;
  double worst = 0.0;
  State c = initial_state(vortex_initial_data(), *disc);
  const TimeStepper pathogen(disc, p, StepControls{}, still);
  for (int n = 0; n < 100; ++n) {
    State next = pathogen.step(c).first;
    worst = std::max(worst, l2_norm_p1(*disc, next.C) - l2_norm_p1(*disc, c.C));
    c = std::move(next);
  }
  ok &= report("pathogen L2 decay", worst <= 1e-9, "max increase " + num(worst));

  SchemeOptions stokes;
  stokes.momentum_convection = false;
  stokes.sir_frozen = true;
  ModelParams q;
  q.alpha = 0.0;
  State u = initial_state(vortex_initial_data(), *disc);
  const TimeStepper flow(disc, q, StepControls{}, stokes);
  worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    State next = flow.step(u).first;
    worst = std::max(worst, l2_norm_velocity(*disc, next.U) - l2_norm_velocity(*disc, u.U));
    u = std::move(next);
  }
  ok &= report("stokes L2 decay", worst <= 1e-9, "max increase " + num(worst));
  return ok;
}

int mesh_info(int nx, int ny) {
  const auto disc = make_discretization(build_unit_square_mesh(nx, ny));
  const auto& m = disc->mesh;
  std::cout << "vertices        " << m.num_vertices() << '\n'
            << "triangles       " << m.num_triangles() << '\n'
            << "boundary edges  " << m.boundary_edges().size() << '\n'
            << "h (max edge)    " << mesh_size(m) << '\n'
            << "area            " << m.total_area() << '\n'
            << "scalar dofs     " << disc->scalar.size() << '\n'
            << "velocity dofs   " << disc->velocity.size() << '\n'
            << "pressure dofs   " << disc->pressure.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SIR-pathogen-Navier-Stokes finite element simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run an experiment");
  std::string config_path, experiment, out_dir;
  run_cmd->add_option("--config", config_path, "config file");
  run_cmd->add_option("--experiment", experiment, "exp1, exp2, exp3, exp4, pathogen_only or custom");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  double ode_T = 40.0;
  verify_cmd->add_option("--suite", suite, "ode, mms or invariants")
      ->required()
      ->check(CLI::IsMember({"ode", "mms", "invariants"}));
  verify_cmd->add_option("--T", ode_T, "final time of the ode suite")->check(CLI::PositiveNumber);

  auto* mesh_cmd = app.add_subcommand("mesh-info", "summarize a unit-square mesh");
  int nx = 32, ny = 32;
  mesh_cmd->add_option("--nx", nx)->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--ny", ny)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) {
        if (!std::filesystem::exists(config_path)) {
          std::cerr << "error: config not found: " << config_path << '\n';
          return 1;
        }
        cfg = load_config(config_path, experiment);
      } else {
        cfg = experiment_preset(experiment.empty() ? "exp1" : experiment);
      }
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const auto result = run_experiment(cfg, &std::cout);
      std::cout << "done: " << result.steps << " steps, outputs in " << cfg.output_dir.string() << '\n';
      return 0;
    }
    if (*verify_cmd) {
      bool ok = false;
      if (suite == "ode") ok = suite_ode(ode_T);
      if (suite == "mms") ok = suite_mms();
      if (suite == "invariants") ok = suite_invariants();
      std::cout << (ok ? "verify " + suite + ": all checks passed\n" : "verify " + suite + ": FAILED\n");
      return ok ? 0 : 1;
    }
    return mesh_info(nx, ny);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
