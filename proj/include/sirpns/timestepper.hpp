#pragma once

#include "sirpns/discretization.hpp"
#include "sirpns/model.hpp"
#include "sirpns/monitor.hpp"
#include "sirpns/sparse.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sirpns {

enum class PicardMode { SingleSweep, ToConvergence };

struct StepControls {
  double dt = 0.01;
  PicardMode picard_mode = PicardMode::ToConvergence;
  double picard_tol = 1e-8;
  int picard_max = 50;

  void validate() const;
  bool operator==(const StepControls&) const = default;
};

enum class LinearSolverKind { Direct, Gmres };

/// Switches selecting which parts of the coupled system are active.
struct SchemeOptions {
  bool fluid = true;                 // solve the momentum/continuity system
  bool momentum_convection = true;   // (U^{k+1} . grad) U^k term
  bool sir_frozen = false;           // hold S, I, R at their values from the previous step
  bool clip_negative = false;        // max(0, .) on S, I, R, C after each step
  bool artificial_diffusion = false; // adds h|U|/2 to D_C elementwise
  LinearSolverKind solver = LinearSolverKind::Direct;  // scalar systems only
  GmresOptions gmres{1e-12, 100, 5000, Preconditioner::Ilu0};

  bool operator==(const SchemeOptions& o) const {
    return fluid == o.fluid && momentum_convection == o.momentum_convection &&
           sir_frozen == o.sir_frozen && clip_negative == o.clip_negative &&
           artificial_diffusion == o.artificial_diffusion && solver == o.solver;
  }
};

struct StepReport {
  int picard_iterations = 0;
  bool picard_converged = false;
  double picard_update = 0.0;        // last max relative L2 update
  double divergence_residual = 0.0;  // ||B U||_inf after the step
};

class StepError : public std::runtime_error {
 public:
  StepError(const std::string& subsystem, const std::string& what, int time_index = -1);
  const std::string& subsystem() const { return subsystem_; }
  const std::string& detail() const { return detail_; }
  int time_index() const { return time_index_; }

 private:
  std::string subsystem_;
  std::string detail_;
  int time_index_;
};

struct SaddlePointSolution {
  Vector velocity;
  Vector pressure;  // zero mean
};

/// Solves [A -B^T; -B 0] (U, p) = (rhs, 0) with U = 0 on the boundary. One pressure dof
/// is pinned during the solve; the result is shifted to zero mean.
SaddlePointSolution solve_saddle_point(const Discretization& disc, const SparseMatrix& momentum,
                                       const Vector& rhs);

/// Backward Euler in time with a Picard loop over the lagged couplings.
class TimeStepper {
 public:
  TimeStepper(std::shared_ptr<const Discretization> disc, ModelParams params,
              StepControls controls, SchemeOptions options = {});

  std::pair<State, StepReport> step(const State& now) const;

  const Discretization& discretization() const { return *disc_; }
  const ModelParams& params() const { return params_; }
  const StepControls& controls() const { return controls_; }
  const SchemeOptions& options() const { return options_; }

 private:
  Vector solve_scalar(const SparseMatrix& a, const Vector& b, const char* subsystem) const;
  SaddlePointSolution solve_momentum(const State& now, const Vector& c_lag, const Vector& u_lag) const;
  Vector solve_pathogen(const State& now, const Vector& u_new, const Vector& c_lag,
                        const Vector& i_new) const;

  std::shared_ptr<const Discretization> disc_;
  ModelParams params_;
  StepControls controls_;
  SchemeOptions options_;

  SparseMatrix s_base_;  // M/dt + D_S K + eta M
  SparseMatrix i_base_;  // M/dt + D_I K + (eta + gamma) M
  SparseMatrix r_matrix_;
  SparseMatrix c_matrix_;  // Dirichlet rows applied
  DirectSolver r_solver_;
  DirectSolver c_solver_;
  Vector birth_load_;
};

struct MonitorConfig {
  int monitor_every = 1;
  int snapshot_every = 500;
  std::function<void(int step, const State&)> on_snapshot;
  std::function<void(const MonitorRecord&)> on_monitor;
  std::function<void(int step, const State&, const StepReport&)> on_step;
};

struct RunResult {
  int steps = 0;
  State final_state;
  std::vector<MonitorRecord> monitors;
  std::vector<StepReport> reports;
};

/// Number of steps needed to reach T from t0 with step dt.
int step_count(double t0, double T, double dt);

/// Steps until t >= T. Step failures are rethrown as StepError carrying the time index.
RunResult run(const TimeStepper& stepper, const State& initial, double T,
              const MonitorConfig& monitors = {});

}  // namespace sirpns
