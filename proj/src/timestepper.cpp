#include "sirpns/timestepper.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sirpns {

void StepControls::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
  if (picard_max < 1) throw std::invalid_argument("picard_max must be at least 1");
}

StepError::StepError(const std::string& subsystem, const std::string& what, int time_index)
    : std::runtime_error(subsystem + ": " + what +
                         (time_index >= 0 ? " (time index " + std::to_string(time_index) + ")" : "")),
      subsystem_(subsystem),
      detail_(what),
      time_index_(time_index) {}

SaddlePointSolution solve_saddle_point(const Discretization& disc, const SparseMatrix& momentum,
                                       const Vector& rhs) {
  const int nu = disc.velocity.size();
  const int np = disc.pressure.size();
  if (momentum.rows() != nu || momentum.cols() != nu || rhs.size() != nu) {
    throw std::invalid_argument("momentum block does not match the velocity layout");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(momentum.nonZeros() + 2 * disc.divergence.nonZeros());
  for (int i = 0; i < momentum.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(momentum, i); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int q = 0; q < disc.divergence.outerSize(); ++q) {
    for (SparseMatrix::InnerIterator it(disc.divergence, q); it; ++it) {
      const int u = static_cast<int>(it.col());
      triplets.emplace_back(u, nu + q, -it.value());
      triplets.emplace_back(nu + q, u, -it.value());
    }
  }
  triplets.emplace_back(nu, nu, 0.0);  // slot for the pressure pin
  SparseMatrix system = csr_from_triplets(triplets, nu + np, nu + np);
  Vector b = Vector::Zero(nu + np);
  b.head(nu) = rhs;

  std::vector<int> dofs = disc.velocity_boundary_dofs;
  dofs.push_back(nu);  // pressure dof 0
  const std::vector<double> values(dofs.size(), 0.0);
  apply_dirichlet(system, b, dofs, values);

  // Bubbles only couple within their own triangle, so they are eliminated elementwise
  // and the remaining vertex-velocity/pressure system is factorized.
  const int nt = disc.mesh.num_triangles();
  const int n = nu + np;
  std::vector<int> reduced(n, -1), bubble_slot(n, -1);
  int nr = 0;
  for (int t = 0; t < nt; ++t) {
    for (int c = 0; c < 2; ++c) bubble_slot[disc.velocity.bubble_dof(t, c)] = 2 * t + c;
  }
  for (int i = 0; i < n; ++i) {
    if (bubble_slot[i] < 0) reduced[i] = nr++;
  }

  std::vector<Triplet> rr, rb, br, dinv;
  Vector bb(2 * nt);
  std::vector<Eigen::Matrix2d> blocks(nt, Eigen::Matrix2d::Zero());
  for (int i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(system, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      const double v = it.value();
      if (bubble_slot[i] < 0 && bubble_slot[j] < 0) {
        rr.emplace_back(reduced[i], reduced[j], v);
      } else if (bubble_slot[i] < 0) {
        rb.emplace_back(reduced[i], bubble_slot[j], v);
      } else if (bubble_slot[j] < 0) {
        br.emplace_back(bubble_slot[i], reduced[j], v);
      } else {
        if (bubble_slot[i] / 2 != bubble_slot[j] / 2) {
          throw std::logic_error("bubble dofs coupled across triangles");
        }
        blocks[bubble_slot[i] / 2](bubble_slot[i] % 2, bubble_slot[j] % 2) = v;
      }
    }
    if (bubble_slot[i] >= 0) bb[bubble_slot[i]] = b[i];
  }
  for (int t = 0; t < nt; ++t) {
    const double det = blocks[t].determinant();
    if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) {
      throw SingularMatrixError("singular bubble block in triangle " + std::to_string(t));
    }
    const Eigen::Matrix2d inv = blocks[t].inverse();
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) dinv.emplace_back(2 * t + a, 2 * t + c, inv(a, c));
    }
  }
  const SparseMatrix s_rr = csr_from_triplets(rr, nr, nr);
  const SparseMatrix s_rb = csr_from_triplets(rb, nr, 2 * nt);
  const SparseMatrix s_br = csr_from_triplets(br, 2 * nt, nr);
  const SparseMatrix d_inv = csr_from_triplets(dinv, 2 * nt, 2 * nt);
  const SparseMatrix d_inv_br = d_inv * s_br;
  const SparseMatrix coupling = s_rb * d_inv_br;
  const SparseMatrix schur = s_rr - coupling;
  Vector b_r(nr);
  for (int i = 0; i < n; ++i) {
    if (reduced[i] >= 0) b_r[reduced[i]] = b[i];
  }
  const Vector d_inv_bb = d_inv * bb;
  const Vector x_r = solve_direct(schur, b_r - s_rb * d_inv_bb);
  const Vector x_b = d_inv_bb - d_inv_br * x_r;

  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = reduced[i] >= 0 ? x_r[reduced[i]] : x_b[bubble_slot[i]];
  if (relative_residual(system, x, b) > 1e-9) {
    throw SingularMatrixError("saddle-point residual " + std::to_string(relative_residual(system, x, b)) +
                              " after bubble elimination");
  }
  SaddlePointSolution out;
  out.velocity = x.head(nu);
  out.pressure = x.tail(np);
  out.pressure.array() -= disc.weights.dot(out.pressure) / disc.area;
  return out;
}

TimeStepper::TimeStepper(std::shared_ptr<const Discretization> disc, ModelParams params,
                         StepControls controls, SchemeOptions options)
    : disc_(std::move(disc)),
      params_(std::move(params)),
      controls_(controls),
      options_(options) {
  controls_.validate();
  const auto violations = validate(params_);
  if (has_fatal(violations)) {
    std::string msg = "invalid model parameters:";
    for (const auto& v : violations) {
      if (v.fatal) msg += " " + v.message + ";";
    }
    throw std::invalid_argument(msg);
  }

  const auto& d = *disc_;
  const double inv_dt = 1.0 / controls_.dt;
  s_base_ = inv_dt * d.mass + params_.D_S * d.stiffness + params_.eta * d.mass;
  i_base_ = inv_dt * d.mass + params_.D_I * d.stiffness + (params_.eta + params_.gamma) * d.mass;
  r_matrix_ = inv_dt * d.mass + params_.D_R * d.stiffness + params_.eta * d.mass;
  c_matrix_ = inv_dt * d.mass + params_.D_C * d.stiffness + params_.lambda * d.mass;
  Vector scratch = Vector::Zero(d.scalar.size());
  const std::vector<double> zeros(d.boundary_vertices.size(), 0.0);
  apply_dirichlet(c_matrix_, scratch, d.boundary_vertices, zeros);
  try {
    r_solver_.factorize(r_matrix_);
    c_solver_.factorize(c_matrix_);
  } catch (const SingularMatrixError& e) {
    throw StepError("setup", e.what());
  }
  birth_load_ = params_.Lambda * d.weights;
}

Vector TimeStepper::solve_scalar(const SparseMatrix& a, const Vector& b, const char* subsystem) const {
  try {
    if (options_.solver == LinearSolverKind::Gmres) {
      auto [x, report] = solve_gmres(a, b, options_.gmres);
      if (!report.converged) {
        std::ostringstream os;
        os << "GMRES stalled at relative residual " << report.residual << " after "
           << report.iterations << " iterations";
        throw StepError(subsystem, os.str());
      }
      return x;
    }
    return solve_direct(a, b);
  } catch (const SingularMatrixError& e) {
    throw StepError(subsystem, e.what());
  }
}

SaddlePointSolution TimeStepper::solve_momentum(const State& now, const Vector& c_lag,
                                                const Vector& u_lag) const {
  const auto& d = *disc_;
  const auto nu = p1_field(d.mesh, c_lag, [fn = params_.nu](double s) { return fn(s); });
  const Vector advected =
      options_.momentum_convection ? u_lag : Vector::Zero(d.velocity.size()).eval();
  const SparseMatrix a = assemble_mini_momentum_block(d.mesh, nu, advected, controls_.dt);

  Vector rhs = (1.0 / controls_.dt) * (d.mini_mass * now.U);
  const double t_next = now.t + controls_.dt;
  if (params_.forcing_field || !params_.body_force.isZero(0.0)) {
    rhs += assemble_mini_load(d.mesh, [&](const Point& x) { return params_.forcing(x, t_next); });
  }
  try {
    return solve_saddle_point(d, a, rhs);
  } catch (const SingularMatrixError& e) {
    throw StepError("momentum", e.what());
  }
}

Vector TimeStepper::solve_pathogen(const State& now, const Vector& u_new, const Vector& c_lag,
                                   const Vector& i_new) const {
  const auto& d = *disc_;
  Vector rhs = d.mass * ((1.0 / controls_.dt) * now.C + params_.alpha * i_new);
  if (!u_new.isZero(0.0)) rhs -= assemble_scalar_convection(d.mesh, u_new, c_lag);
  for (int v : d.boundary_vertices) rhs[v] = 0.0;

  if (!options_.artificial_diffusion || u_new.isZero(0.0)) {
    try {
      return c_solver_.solve(rhs);
    } catch (const SingularMatrixError& e) {
      throw StepError("pathogen", e.what());
    }
  }
  const double dc = params_.D_C;
  const PointField diffusion = [&](const QuadPoint& q) {
    const auto& tri = d.mesh.triangle(q.triangle);
    double h = 0.0;
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, (d.mesh.vertex(tri[k]) - d.mesh.vertex(tri[(k + 1) % 3])).norm());
    }
    return dc + 0.5 * h * eval_mini(d.mesh, u_new, q.triangle, q.bary).norm();
  };
  SparseMatrix a = (1.0 / controls_.dt + params_.lambda) * d.mass +
                   assemble_stiffness_p1(d.mesh, diffusion);
  const std::vector<double> zeros(d.boundary_vertices.size(), 0.0);
  apply_dirichlet(a, rhs, d.boundary_vertices, zeros);
  return solve_scalar(a, rhs, "pathogen");
}

namespace {

double relative_update(const SparseMatrix& mass, const Vector& next, const Vector& prev) {
  const Vector diff = next - prev;
  const double num = std::sqrt(std::max(0.0, diff.dot(mass * diff)));
  const double den = std::sqrt(std::max(0.0, prev.dot(mass * prev)));
  return num / std::max(den, 1e-14);
}

}  // namespace

std::pair<State, StepReport> TimeStepper::step(const State& now) const {
  const auto& d = *disc_;
  const double dt = controls_.dt;
  const int block = d.velocity.block_size();
  const Vector mass_S = d.mass * now.S;
  const Vector mass_I = d.mass * now.I;
  const Vector mass_R = d.mass * now.R;

  State iter = now;  // iterate k
  StepReport report;
  const int max_iters = controls_.picard_mode == PicardMode::SingleSweep ? 1 : controls_.picard_max;

  for (int k = 0; k < max_iters; ++k) {
    State next = iter;
    next.t = now.t + dt;

    // (1) momentum + continuity with viscosity and advected field from iterate k
    if (options_.fluid) {
      auto sol = solve_momentum(now, iter.C, iter.U);
      next.U = std::move(sol.velocity);
      next.p = std::move(sol.pressure);
    }

    // (2) host compartments with incidence weights lagged at iterate k
    if (!options_.sir_frozen) {
      const auto& mesh = d.mesh;
      const double floor = params_.n_floor;
      const auto beta = params_.beta;
      const PointField weight_S = [&](const QuadPoint& q) {
        const double s = eval_p1(mesh, iter.S, q.triangle, q.bary);
        const double i = eval_p1(mesh, iter.I, q.triangle, q.bary);
        const double r = eval_p1(mesh, iter.R, q.triangle, q.bary);
        const double c = eval_p1(mesh, iter.C, q.triangle, q.bary);
        return beta(c) * i / safe_population(s, i, r, floor);
      };
      const PointField weight_I = [&](const QuadPoint& q) {
        const double s = eval_p1(mesh, iter.S, q.triangle, q.bary);
        const double i = eval_p1(mesh, iter.I, q.triangle, q.bary);
        const double r = eval_p1(mesh, iter.R, q.triangle, q.bary);
        const double c = eval_p1(mesh, iter.C, q.triangle, q.bary);
        return beta(c) * s / safe_population(s, i, r, floor);
      };
      try {
        const SparseMatrix a_S = s_base_ + assemble_reaction_weighted_mass(mesh, weight_S);
        const SparseMatrix a_I = i_base_ - assemble_reaction_weighted_mass(mesh, weight_I);
        next.S = solve_scalar(a_S, mass_S / dt + birth_load_, "susceptible");
        next.I = solve_scalar(a_I, mass_I / dt, "infected");
        next.R = r_solver_.solve(mass_R / dt + params_.gamma * (d.mass * iter.I));
      } catch (const NumericError& e) {
        throw StepError("host", e.what());
      } catch (const SingularMatrixError& e) {
        throw StepError("recovered", e.what());
      }
    }

    // (3) pathogen with shedding from I^{k+1} and advection load from (U^{k+1}, grad C^k)
    next.C = solve_pathogen(now, next.U, iter.C, next.I);

    // (4) convergence
    double update = 0.0;
    for (int c = 0; c < 2; ++c) {
      update = std::max(update, relative_update(d.mini_block_mass, next.U.segment(c * block, block),
                                                iter.U.segment(c * block, block)));
    }
    update = std::max(update, relative_update(d.mass, next.C, iter.C));
    update = std::max(update, relative_update(d.mass, next.S, iter.S));
    update = std::max(update, relative_update(d.mass, next.I, iter.I));
    update = std::max(update, relative_update(d.mass, next.R, iter.R));

    iter = std::move(next);
    report.picard_iterations = k + 1;
    report.picard_update = update;
    if (!iter.all_finite()) throw StepError("picard", "non-finite values in iterate");
    if (update < controls_.picard_tol) {
      report.picard_converged = true;
      break;
    }
  }
  if (controls_.picard_mode == PicardMode::SingleSweep) report.picard_converged = true;

  if (options_.clip_negative) {
    for (Vector* v : {&iter.S, &iter.I, &iter.R, &iter.C}) *v = v->cwiseMax(0.0);
  }
  report.divergence_residual = (d.divergence * iter.U).lpNorm<Eigen::Infinity>();
  return {std::move(iter), report};
}

int step_count(double t0, double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (T <= t0) return 0;
  return static_cast<int>(std::ceil((T - t0) / dt - 1e-9));
}

RunResult run(const TimeStepper& stepper, const State& initial, double T,
              const MonitorConfig& monitors) {
  if (T < initial.t) throw std::invalid_argument("final time precedes the initial time");
  if (monitors.monitor_every < 1 || monitors.snapshot_every < 1) {
    throw std::invalid_argument("cadences must be at least 1");
  }
  const auto& disc = stepper.discretization();
  const double dt = stepper.controls().dt;
  const int steps = step_count(initial.t, T, dt);

  RunResult result;
  result.steps = steps;
  const auto emit_monitor = [&](const State& s, int picard) {
    result.monitors.push_back(monitor_row(s, disc, picard));
    if (monitors.on_monitor) monitors.on_monitor(result.monitors.back());
  };
  emit_monitor(initial, 0);
  if (monitors.on_snapshot) monitors.on_snapshot(0, initial);

  State state = initial;
  for (int n = 1; n <= steps; ++n) {
    try {
      auto [next, report] = stepper.step(state);
      next.t = initial.t + n * dt;
      state = std::move(next);
      result.reports.push_back(report);
      if (monitors.on_step) monitors.on_step(n, state, report);
      if (n % monitors.monitor_every == 0) emit_monitor(state, report.picard_iterations);
    } catch (const StepError& e) {
      throw StepError(e.subsystem(), e.detail(), n);
    } catch (const std::exception& e) {
      throw StepError("step", e.what(), n);
    }
    if (monitors.on_snapshot && (n % monitors.snapshot_every == 0 || n == steps)) {
      monitors.on_snapshot(n, state);
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace sirpns
