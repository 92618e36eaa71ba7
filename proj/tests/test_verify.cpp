#include "sirpns/verify.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace sirpns;

TEST_SUITE("verify") {

TEST_CASE("ode oracle closed forms") {
  ModelParams p;
  p.beta = CoefficientFn::constant(0.0);
  // no transmission: I decays with gamma + eta, S relaxes to Lambda / eta
  auto traj = sir_ode_oracle(p, {0.0, 0.9, 0.1, 0.0}, 1.0, 1e-3);
  REQUIRE(traj.size() == 1001);
  CHECK(traj.back().t == doctest::Approx(1.0));
  CHECK(traj.back().I == doctest::Approx(0.1 * std::exp(-0.45)).epsilon(1e-12));
  CHECK(traj.back().I == doctest::Approx(0.063763).epsilon(1e-5));
  traj = sir_ode_oracle(p, {0.0, 0.9, 0.1, 0.0}, 200.0, 1e-2, 100);
  CHECK(traj.size() == 201);
  CHECK(std::abs(traj.back().S - (8.0 - 7.1 * std::exp(-10.0))) <= 1e-9);
  CHECK(std::abs(traj.back().S - 8.0) <= 1e-3);
}

TEST_CASE("ode oracle is fourth order") {
  const ModelParams p;
  const OdeState y0{0.0, 0.9, 0.1, 0.0};
  const double ref = sir_ode_oracle(p, y0, 5.0, 1e-3).back().I;
  const double e1 = std::abs(sir_ode_oracle(p, y0, 5.0, 0.1).back().I - ref);
  const double e2 = std::abs(sir_ode_oracle(p, y0, 5.0, 0.05).back().I - ref);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("endemic equilibrium is stationary") {
  ModelParams p;
  p.beta = CoefficientFn::constant(0.9);
  const double n = p.Lambda / p.eta;
  const double s = n * (p.gamma + p.eta) / 0.9;
  const double i = (p.Lambda - p.eta * s) * n / (0.9 * s);
  const double r = p.gamma * i / p.eta;
  const OdeState f = sir_ode_rhs(p, {0.0, s, i, r});
  CHECK(std::abs(f.S) + std::abs(f.I) + std::abs(f.R) <= 1e-8);
  const auto traj = sir_ode_oracle(p, {0.0, 0.9, 0.1, 0.0}, 400.0, 0.05, 8000);
  CHECK(traj.back().I == doctest::Approx(i).epsilon(1e-6));
}

TEST_CASE("oracle rejects unsupported input") {
  ModelParams p;
  p.beta = CoefficientFn::affine(0.3);
  CHECK_THROWS_AS(sir_ode_oracle(p, {}, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sir_ode_oracle(ModelParams{}, {}, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ode_equivalence(ModelParams{}, 2, 0.0105, 0.1), std::invalid_argument);
}

TEST_CASE("trajectory comparison") {
  const auto a = sir_ode_oracle(ModelParams{}, {0.0, 0.9, 0.1, 0.0}, 1.0, 0.1);
  CHECK(compare_pde_to_ode(a, a).max() == 0.0);
  auto b = a;
  b[3].I *= 1.01;
  CHECK(compare_pde_to_ode(b, a).I == doctest::Approx(0.01));
  b.pop_back();
  CHECK_THROWS_AS(compare_pde_to_ode(b, a), std::invalid_argument);
  b = a;
  b[2].t += 1e-3;
  CHECK_THROWS_AS(compare_pde_to_ode(b, a), std::invalid_argument);

  std::vector<MonitorRecord> m(2);
  m[1].t = 0.5;
  m[1].int_S = 2.0;
  m[1].int_I = 1.0;
  const auto mean = mean_trajectory(m, 4.0);
  CHECK(mean[1].t == 0.5);
  CHECK(mean[1].S == 0.5);
  CHECK(mean[1].I == 0.25);
}

TEST_CASE("uniform host field follows the ode over a short horizon") {
  const auto d = ode_equivalence(ModelParams{}, 2, 0.01, 0.5);
  // backward Euler against RK4: O(dt) error
  CHECK(d.max() <= 2e-3);
  CHECK(d.max() > 0.0);
}

TEST_CASE("vortex flow derivatives against finite differences") {
  const VortexFlow v{0.7};
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 50; ++k) {
    const Point x(u(gen), u(gen));
    const Eigen::Matrix2d g = v.grad(x);
    CHECK(std::abs(g.trace()) <= 1e-14);
    for (int c = 0; c < 2; ++c) {
      const auto comp = [&](double a, double b) { return v.u(Point(a, b))[c]; };
      CHECK(g(c, 0) == doctest::Approx(oracle::d_dx(comp, x.x(), x.y())).epsilon(1e-6));
      CHECK(g(c, 1) == doctest::Approx(oracle::d_dy(comp, x.x(), x.y())).epsilon(1e-6));
      CHECK(std::abs(v.laplacian(x)[c] - oracle::laplacian(comp, x.x(), x.y())) <= 1e-5);
    }
    const auto p = [&](double a, double b) { return v.p(Point(a, b)); };
    CHECK(std::abs(v.grad_p(x).x() - oracle::d_dx(p, x.x(), x.y())) <= 1e-8);
    CHECK(std::abs(v.grad_p(x).y() - oracle::d_dy(p, x.x(), x.y())) <= 1e-8);

    // forcing = -div(nu grad u) + grad p with nu = 0.2 + 0.3 x y
    const auto nu = [](double a, double b) { return 0.2 + 0.3 * a * b; };
    Point div_flux;
    for (int c = 0; c < 2; ++c) {
      const auto fx = [&](double a, double b) {
        const auto cc = [&](double s, double t) { return v.u(Point(s, t))[c]; };
        return nu(a, b) * oracle::d_dx(cc, a, b, 1e-4);
      };
      const auto fy = [&](double a, double b) {
        const auto cc = [&](double s, double t) { return v.u(Point(s, t))[c]; };
        return nu(a, b) * oracle::d_dy(cc, a, b, 1e-4);
      };
      div_flux[c] = oracle::d_dx(fx, x.x(), x.y(), 1e-4) + oracle::d_dy(fy, x.x(), x.y(), 1e-4);
    }
    const Point f = v.forcing(x, nu(x.x(), x.y()), Point(0.3 * x.y(), 0.3 * x.x()));
    CHECK((f - (-div_flux + v.grad_p(x))).norm() <= 1e-5);
  }
  for (int k = 0; k <= 10; ++k) {
    const double s = k / 10.0;
    CHECK(v.u(Point(s, 0.0)).norm() <= 1e-15);
    CHECK(v.u(Point(1.0, s)).norm() <= 1e-15);
  }
}

TEST_CASE("manufactured zero solutions give zero error") {
  ScalarMmsProblem s;
  s.zero = true;
  s.U = Point(0.5, 0.3);
  auto t = mms_scalar_study(s, {4, 8});
  REQUIRE(t.errors.size() == 2);
  for (const auto& row : t.errors) {
    for (double e : row) CHECK(e <= 1e-14);
  }
  StokesMmsProblem k;
  k.zero = true;
  t = mms_stokes_study(k, {4, 8});
  for (const auto& row : t.errors) {
    for (double e : row) CHECK(e <= 1e-14);
  }
}

TEST_CASE("convergence table") {
  ConvergenceTable t;
  t.norms = {"L2", "H1"};
  t.add_level(0.5, {1.0, 2.0});
  t.add_level(0.25, {0.25, 1.0});
  t.add_level(0.125, {0.0625, 0.5});
  CHECK(t.rate(1, 0) == doctest::Approx(2.0));
  CHECK(t.min_rate(1) == doctest::Approx(1.0));
  CHECK(std::isnan(t.rate(0, 0)));
  CHECK(t.norm_index("H1") == 1);
  CHECK_THROWS_AS(t.norm_index("H2"), std::out_of_range);
  CHECK_THROWS_AS(t.add_level(0.5, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(t.add_level(0.01, {1.0}), std::invalid_argument);
  std::ostringstream csv;
  t.write_csv(csv);
  CHECK(csv.str().rfind("h,L2,L2_rate,H1,H1_rate\n", 0) == 0);
  std::ostringstream text;
  t.print(text);
  CHECK(text.str().find("2.000") != std::string::npos);
}

TEST_CASE("population balance defect") {
  ModelParams p;
  std::vector<MonitorRecord> m(3);
  m[0].int_N = 1.0;
  // exact implicit balance: N1 = (N0 + dt Lambda |Omega|) / (1 + dt eta)
  m[1].int_N = (1.0 + 0.01 * p.Lambda) / (1.0 + 0.01 * p.eta);
  m[2].int_N = m[1].int_N * 1.001;
  const auto d = population_balance(m, p, 0.01, 1.0);
  CHECK(d.worst_step == 2);
  CHECK(d.max_relative > 1e-4);
  m.pop_back();
  CHECK(population_balance(m, p, 0.01, 1.0).max_relative <= 1e-15);
}

}
