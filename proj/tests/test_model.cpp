#include "sirpns/discretization.hpp"
#include "sirpns/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sirpns;

namespace {

bool mentions(const std::vector<Violation>& v, const std::string& text) {
  for (const auto& x : v) {
    if (x.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("table values validate cleanly") {
  const ModelParams p;
  CHECK(p.D_S == 0.2);
  CHECK(p.D_I == 0.3);
  CHECK(p.D_R == 0.4);
  CHECK(p.D_C == 0.1);
  CHECK(p.alpha == 0.6);
  CHECK(p.gamma == 0.4);
  CHECK(p.lambda == 0.4);
  CHECK(p.eta == 0.05);
  CHECK(p.Lambda == 0.4);
  CHECK(validate(p).empty());
}

TEST_CASE("violations") {
  ModelParams p;
  p.D_C = 0.0;
  auto v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message == "(A-diffusion): D_C must be positive");
  CHECK(v[0].fatal);

  p = ModelParams{};
  p.gamma = -0.1;
  p.n_floor = 0.0;
  v = validate(p);
  CHECK(mentions(v, "gamma must be nonnegative"));
  CHECK(mentions(v, "n_floor"));
  CHECK(has_fatal(v));

  p = ModelParams{};
  p.beta = CoefficientFn::affine(0.3);
  v = validate(p);
  REQUIRE(v.size() == 1);
  CHECK_FALSE(v[0].fatal);
  CHECK(mentions(v, "unbounded beta"));
  CHECK_FALSE(has_fatal(v));

  p.beta = CoefficientFn::clamped_affine(0.3, 0.5, 0.2);
  CHECK(has_fatal(validate(p)));
  p.beta = CoefficientFn::clamped_affine(0.3, 0.1, 2.0);
  CHECK(validate(p).empty());

  p = ModelParams{};
  p.nu = CoefficientFn::constant(0.0);
  CHECK(mentions(validate(p), "nu must be positive"));
  p = ModelParams{};
  p.D_S = std::nan("");
  CHECK(has_fatal(validate(p)));
}

TEST_CASE("coefficient functions") {
  CHECK(eval_coefficient(CoefficientFn::constant(0.4), 7.0) == 0.4);
  CHECK(eval_coefficient(CoefficientFn::affine(0.3), 0.0) == 0.3);
  CHECK(eval_coefficient(CoefficientFn::affine(0.3), 0.5) == doctest::Approx(0.8));
  const auto clamp = CoefficientFn::clamped_affine(0.1, 0.05, 2.0);
  CHECK(eval_coefficient(clamp, 5.0) == 2.0);
  CHECK(eval_coefficient(clamp, -1.0) == 0.05);
  CHECK(eval_coefficient(clamp, 0.4) == doctest::Approx(0.5));

  std::mt19937 gen(1);
  std::uniform_real_distribution<double> s(-100, 100);
  for (int k = 0; k < 10000; ++k) {
    const double a = s(gen), b = s(gen);
    const double fa = clamp(a), fb = clamp(b);
    CHECK((fa >= 0.05 && fa <= 2.0));
    CHECK(std::abs(fa - fb) <= std::abs(a - b));
  }
}

TEST_CASE("population guard") {
  CHECK(safe_population(0.9, 0.1, 0.0, 1e-10) == doctest::Approx(1.0));
  CHECK(safe_population(0.0, 0.0, 0.0, 1e-10) == 1e-10);
  CHECK(safe_population(0.5, 0.25, 0.25, 1e-10) == 1.0);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(-1e-9, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(gen), b = u(gen), c = u(gen);
    const double n = safe_population(a, b, c, 1e-10);
    CHECK(n >= 1e-10);
    if (a + b + c >= 1e-10) CHECK(n == a + b + c);
  }
}

TEST_CASE("initial data") {
  const auto d = vortex_initial_data();
  CHECK(d.I0(Point(0.5, 0.5)) == doctest::Approx(0.1));
  CHECK(d.I0(Point(0.9, 0.9)) == 0.0);
  CHECK(d.S0(Point(0.5, 0.5)) == doctest::Approx(0.9));
  CHECK(d.S0(Point(1.0, 1.0)) == doctest::Approx(0.9 * std::exp(-0.5)));
  CHECK(d.R0(Point(0.7, 0.3)) == doctest::Approx(0.005));
  CHECK(d.C0(Point(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(d.C0(Point(0.0, 0.0)) == doctest::Approx((0.5 + 50.0) * std::exp(-0.5)));
  // cutoff on the I0 disk
  const double r = std::sqrt(0.1);
  CHECK(d.I0(Point(0.5 + r * 0.999, 0.5)) > 0.0);
  CHECK(d.I0(Point(0.5 + r * 1.001, 0.5)) == 0.0);

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Point x(u(gen), u(gen));
    CHECK(d.C0(x) >= 0.0);
    CHECK(d.S0(x) >= 0.0);
    CHECK(d.I0(x) >= 0.0);
    CHECK(d.R0(x) >= 0.0);
  }
}

TEST_CASE("vortex velocity is solenoidal and vanishes on the boundary") {
  const auto d = vortex_initial_data();
  const auto ux = [&](double x, double y) { return d.U0(Point(x, y)).x(); };
  const auto uy = [&](double x, double y) { return d.U0(Point(x, y)).y(); };
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 200; ++k) {
    const double x = u(gen), y = u(gen);
    CHECK(std::abs(oracle::d_dx(ux, x, y) + oracle::d_dy(uy, x, y)) <= 1e-8);
  }
  for (int k = 0; k <= 20; ++k) {
    const double s = k / 20.0;
    for (const Point& p : {Point(s, 0), Point(s, 1), Point(0, s), Point(1, s)}) {
      CHECK(d.U0(p).norm() <= 1e-15);
    }
  }
}

TEST_CASE("initial integral of I against quadrature oracle") {
  const auto d = vortex_initial_data();
  const double exact = 0.1 * std::numbers::pi * (1.0 - std::exp(-0.1));
  CHECK(exact == doctest::Approx(0.029896).epsilon(1e-4));
  // polar integration of the disk profile
  const double polar = 2.0 * std::numbers::pi *
                       oracle::simpson([](double r) { return 0.1 * std::exp(-r * r) * r; }, 0.0,
                                       std::sqrt(0.1), 1e-12);
  CHECK(polar == doctest::Approx(exact).epsilon(1e-10));
  const auto disc = make_discretization(build_unit_square_mesh(64, 64));
  const State s = initial_state(d, *disc);
  CHECK(std::abs(disc->weights.dot(s.I) - exact) <= 1e-3);
}

TEST_CASE("initial state presets") {
  const auto disc = make_discretization(build_unit_square_mesh(8, 8));
  const State z = initial_state(zero_initial_data(), *disc);
  CHECK(z.U.norm() == 0.0);
  CHECK(z.C.norm() + z.S.norm() + z.I.norm() + z.R.norm() == 0.0);
  const State u = initial_state(uniform_initial_data(0.9, 0.1, 0.0), *disc);
  CHECK((u.S.array() == 0.9).all());
  CHECK((u.I.array() == 0.1).all());

  const State v = initial_state(vortex_initial_data(), *disc);
  for (int b : disc->boundary_vertices) CHECK(v.C[b] == 0.0);
  for (int dof : disc->velocity_boundary_dofs) CHECK(std::abs(v.U[dof]) <= 1e-15);
  CHECK(v.all_finite());

  CHECK(to_string(InitialData::Preset::Vortex) == "vortex");
  for (auto p : {InitialData::Preset::Vortex, InitialData::Preset::Uniform, InitialData::Preset::Zero,
                 InitialData::Preset::Custom}) {
    CHECK(initial_preset_from_string(to_string(p)) == p);
  }
  CHECK_THROWS_AS(initial_preset_from_string("spiral"), std::invalid_argument);
}

}
