#include "sirpns/io.hpp"
#include "sirpns/monitor.hpp"
#include "sirpns/timestepper.hpp"
#include "sirpns/verify.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace sirpns;

namespace {

std::shared_ptr<const Discretization> square(int n) {
  return make_discretization(build_unit_square_mesh(n, n));
}

double final_int_I(const std::shared_ptr<const Discretization>& disc, const RunConfig& cfg, double dt,
                   double T) {
  StepControls c = cfg.controls;
  c.dt = dt;
  const TimeStepper stepper(disc, cfg.params, c, cfg.scheme);
  const auto r = run(stepper, initial_state(cfg, *disc), T);
  return integrate(*disc, r.final_state.I);
}

}  // namespace

TEST_SUITE("timestepper") {

TEST_CASE("controls validation and step counting") {
  StepControls c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0.0;
  CHECK_THROWS_WITH(c.validate(), "dt must be positive");
  c = StepControls{};
  c.picard_max = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  CHECK(step_count(0.0, 40.0, 0.01) == 4000);
  CHECK(step_count(0.0, 1.0, 0.3) == 4);
  CHECK(step_count(2.0, 2.0, 0.1) == 0);
  CHECK_THROWS_AS(step_count(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero is a fixed point") {
  const auto disc = square(4);
  ModelParams p;
  p.Lambda = 0.0;
  const TimeStepper stepper(disc, p, StepControls{});
  const auto [next, report] = stepper.step(zero_state(*disc));
  CHECK(next.t == doctest::Approx(0.01));
  CHECK(next.U.norm() == 0.0);
  CHECK(next.p.norm() == 0.0);
  CHECK(next.C.norm() + next.S.norm() + next.I.norm() + next.R.norm() == 0.0);
  CHECK(report.picard_converged);
}

TEST_CASE("uniform state follows implicit Euler for the SIR system") {
  const auto disc = square(4);
  ModelParams p;
  p.alpha = 0.0;
  SchemeOptions o;
  o.fluid = false;
  StepControls c;
  c.picard_tol = 1e-13;
  c.picard_max = 200;
  const TimeStepper stepper(disc, p, c, o);
  State s = initial_state(uniform_initial_data(0.9, 0.1, 0.0), *disc);
  oracle::Sir y{0.9, 0.1, 0.0};
  for (int n = 0; n < 5; ++n) {
    const auto [next, report] = stepper.step(s);
    CHECK(report.picard_converged);
    y = oracle::implicit_euler_sir({0.3, p.gamma, p.eta, p.Lambda}, y, c.dt);
    CHECK((next.S.array() - y.S).abs().maxCoeff() <= 1e-10);
    CHECK((next.I.array() - y.I).abs().maxCoeff() <= 1e-10);
    CHECK((next.R.array() - y.R).abs().maxCoeff() <= 1e-10);
    CHECK(next.C.norm() == 0.0);
    s = next;
  }
}

TEST_CASE("single sweep performs one pass") {
  const auto disc = square(4);
  StepControls c;
  c.picard_mode = PicardMode::SingleSweep;
  const TimeStepper stepper(disc, ModelParams{}, c);
  const auto [next, report] = stepper.step(initial_state(vortex_initial_data(), *disc));
  CHECK(report.picard_iterations == 1);
  CHECK(report.picard_converged);
}

TEST_CASE("dissipation without sources") {
  const auto disc = square(8);
  ModelParams p;
  p.alpha = 0.0;
  SchemeOptions still;
  still.fluid = false;
  const TimeStepper pathogen(disc, p, StepControls{}, still);
  State s = initial_state(vortex_initial_data(), *disc);
  for (int n = 0; n < 30; ++n) {
    State next = pathogen.step(s).first;
    CHECK(l2_norm_p1(*disc, next.C) <= l2_norm_p1(*disc, s.C) + 1e-9);
    s = std::move(next);
  }

  SchemeOptions stokes;
  stokes.momentum_convection = false;
  stokes.sir_frozen = true;
  const TimeStepper flow(disc, p, StepControls{}, stokes);
  State u = initial_state(vortex_initial_data(), *disc);
  for (int n = 0; n < 30; ++n) {
    auto [next, report] = flow.step(u);
    CHECK(l2_norm_velocity(*disc, next.U) <= l2_norm_velocity(*disc, u.U) + 1e-9);
    CHECK(report.divergence_residual <= 1e-10);
    CHECK(std::abs(integrate(*disc, next.p)) <= 1e-12);
    for (int dof : disc->velocity_boundary_dofs) CHECK(next.U[dof] == 0.0);
    CHECK(next.S == u.S);
    u = std::move(next);
  }
}

TEST_CASE("population balance over a coupled run") {
  const auto disc = square(8);
  const RunConfig cfg = experiment_preset("exp3");
  const TimeStepper stepper(disc, cfg.params, cfg.controls, cfg.scheme);
  const auto r = run(stepper, initial_state(cfg, *disc), 0.2);
  const auto bal = population_balance(r.monitors, cfg.params, cfg.controls.dt, disc->area);
  CHECK(bal.max_relative <= 10 * cfg.controls.picard_tol);
  for (const auto& rep : r.reports) CHECK(rep.picard_converged);
  for (int b : disc->boundary_vertices) CHECK(r.final_state.C[b] == 0.0);
}

TEST_CASE("run bookkeeping") {
  const auto disc = square(2);
  SchemeOptions o;
  o.fluid = false;
  const TimeStepper stepper(disc, ModelParams{}, StepControls{}, o);
  const State init = initial_state(vortex_initial_data(), *disc);

  int snapshots = 0;
  MonitorConfig m;
  m.on_snapshot = [&](int, const State&) { ++snapshots; };
  auto r = run(stepper, init, 0.0, m);
  CHECK(r.steps == 0);
  CHECK(r.monitors.size() == 1);
  CHECK(snapshots == 1);

  snapshots = 0;
  std::vector<int> seen;
  m.snapshot_every = 3;
  m.on_snapshot = [&](int n, const State&) { seen.push_back(n); };
  r = run(stepper, init, 0.1, m);
  CHECK(r.steps == 10);
  CHECK(r.monitors.size() == 11);
  CHECK(seen == std::vector<int>{0, 3, 6, 9, 10});
  CHECK(r.final_state.t == doctest::Approx(0.1).epsilon(1e-14));

  m.monitor_every = 4;
  r = run(stepper, init, 0.1, m);
  CHECK(r.monitors.size() == 3);
  CHECK_THROWS_AS(run(stepper, init, -1.0), std::invalid_argument);

  // a full length run at the default step produces 4001 monitor rows
  const auto tiny = square(1);
  const TimeStepper cheap(tiny, ModelParams{}, StepControls{}, o);
  r = run(cheap, initial_state(vortex_initial_data(), *tiny), 40.0);
  CHECK(r.steps == 4000);
  CHECK(r.monitors.size() == 4001);
  CHECK(r.monitors.back().t == doctest::Approx(40.0));
}

TEST_CASE("runs are reproducible") {
  const auto disc = square(4);
  const RunConfig cfg = experiment_preset("exp4");
  const TimeStepper stepper(disc, cfg.params, cfg.controls, cfg.scheme);
  const auto a = run(stepper, initial_state(cfg, *disc), 0.05);
  const auto b = run(stepper, initial_state(cfg, *disc), 0.05);
  CHECK(a.final_state.U == b.final_state.U);
  CHECK(a.final_state.C == b.final_state.C);
  CHECK(a.final_state.I == b.final_state.I);
}

TEST_CASE("solver failure reports subsystem and time index") {
  const auto disc = square(4);
  SchemeOptions o;
  o.fluid = false;
  o.solver = LinearSolverKind::Gmres;
  o.gmres = GmresOptions{1e-15, 1, 1, Preconditioner::None};
  const TimeStepper stepper(disc, ModelParams{}, StepControls{}, o);
  try {
    run(stepper, initial_state(vortex_initial_data(), *disc), 0.1);
    FAIL("expected a step error");
  } catch (const StepError& e) {
    CHECK(e.subsystem() == "susceptible");
    CHECK(e.time_index() == 1);
    CHECK(std::string(e.what()).find("GMRES stalled") != std::string::npos);
  }
}

TEST_CASE("gmres and direct scalar solves agree") {
  const auto disc = square(6);
  SchemeOptions o;
  o.fluid = false;
  const TimeStepper direct(disc, ModelParams{}, StepControls{}, o);
  o.solver = LinearSolverKind::Gmres;
  const TimeStepper krylov(disc, ModelParams{}, StepControls{}, o);
  const State s = initial_state(vortex_initial_data(), *disc);
  const State a = direct.step(s).first, b = krylov.step(s).first;
  CHECK((a.I - b.I).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK((a.S - b.S).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("first order in time") {
  // reference at dt/32 so the error ratio of dt and dt/2 approaches 2
  const auto disc = square(8);
  const RunConfig cfg = experiment_preset("exp1");
  const double dt = 0.1, T = 2.0;
  const double ref = final_int_I(disc, cfg, dt / 32, T);
  const double e1 = std::abs(final_int_I(disc, cfg, dt, T) - ref);
  const double e2 = std::abs(final_int_I(disc, cfg, dt / 2, T) - ref);
  const double ratio = e1 / e2;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

}
