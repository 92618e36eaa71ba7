#include "sirpns/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sirpns {

double CoefficientFn::operator()(double s) const {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Affine:
      return c0 + s;
    case Kind::ClampedAffine:
      return std::min(hi, std::max(lo, c0 + s));
  }
  return c0;
}

double eval_coefficient(const CoefficientFn& fn, double s) { return fn(s); }

bool ModelParams::operator==(const ModelParams& o) const {
  return D_S == o.D_S && D_I == o.D_I && D_R == o.D_R && D_C == o.D_C && alpha == o.alpha &&
         gamma == o.gamma && lambda == o.lambda && eta == o.eta && Lambda == o.Lambda &&
         beta == o.beta && nu == o.nu && body_force == o.body_force && n_floor == o.n_floor;
}

std::vector<Violation> validate(const ModelParams& p) {
  std::vector<Violation> out;
  const auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      out.push_back({"A-diffusion", std::string("(A-diffusion): ") + name + " must be positive"});
    }
  };
  positive(p.D_S, "D_S");
  positive(p.D_I, "D_I");
  positive(p.D_R, "D_R");
  positive(p.D_C, "D_C");

  const auto nonnegative = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      out.push_back({"A-rates", std::string("(A-rates): ") + name + " must be nonnegative"});
    }
  };
  nonnegative(p.alpha, "alpha");
  nonnegative(p.gamma, "gamma");
  nonnegative(p.lambda, "lambda");
  nonnegative(p.eta, "eta");
  nonnegative(p.Lambda, "Lambda");

  if (!(p.n_floor > 0.0)) out.push_back({"A-floor", "(A-floor): n_floor must be positive"});
  if (!p.body_force.allFinite()) out.push_back({"A-forcing", "(A-forcing): body force must be finite"});

  const auto check_coefficient = [&](const CoefficientFn& fn, const char* name) {
    const std::string n(name);
    switch (fn.kind) {
      case CoefficientFn::Kind::Constant:
        if (!(fn.c0 > 0.0)) out.push_back({"A-bounds", "(A-bounds): " + n + " must be positive"});
        break;
      case CoefficientFn::Kind::Affine:
        if (!(fn.c0 > 0.0)) out.push_back({"A-bounds", "(A-bounds): " + n + "0 must be positive"});
        out.push_back({"A-bounds", "(A-bounds): unbounded " + n + " violates the upper bound", false});
        break;
      case CoefficientFn::Kind::ClampedAffine:
        if (!(fn.lo > 0.0 && fn.lo <= fn.hi)) {
          out.push_back({"A-bounds", "(A-bounds): " + n + " clamp needs 0 < lo <= hi"});
        }
        break;
    }
  };
  check_coefficient(p.beta, "beta");
  check_coefficient(p.nu, "nu");
  return out;
}

bool has_fatal(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(), [](const Violation& v) { return v.fatal; });
}

InitialData vortex_initial_data() {
  using std::numbers::pi;
  InitialData d;
  d.preset = InitialData::Preset::Vortex;
  d.U0 = [](const Point& p) {
    const double x = p.x() - 1.0, y = p.y() - 1.0;
    const double sx = std::sin(pi * x), cx = std::cos(pi * x);
    const double sy = std::sin(pi * y), cy = std::cos(pi * y);
    return Point(sx * sx * sy * cy, -sy * sy * sx * cx);
  };
  d.C0 = [](const Point& p) {
    const double r2 = (p.x() - 0.5) * (p.x() - 0.5) + (p.y() - 0.5) * (p.y() - 0.5);
    return (0.5 + 100.0 * r2) * std::exp(-r2);
  };
  d.S0 = [](const Point& p) {
    const double r2 = (p.x() - 0.5) * (p.x() - 0.5) + (p.y() - 0.5) * (p.y() - 0.5);
    return r2 <= 1.0 ? 0.9 * std::exp(-r2) : 0.0;
  };
  d.I0 = [](const Point& p) {
    const double r2 = (p.x() - 0.5) * (p.x() - 0.5) + (p.y() - 0.5) * (p.y() - 0.5);
    return r2 <= 0.1 ? 0.1 * std::exp(-r2) : 0.0;
  };
  d.R0 = [](const Point& p) {
    const double dx = p.x() - 0.7, dy = p.y() - 0.3;
    return 0.01 * (0.5 + 5.0 * (dx * dx + dy * dy)) * std::exp(-100.0 * dx * dx - 100.0 * dy * dy);
  };
  return d;
}

InitialData uniform_initial_data(double s, double i, double r, double c) {
  InitialData d;
  d.preset = InitialData::Preset::Uniform;
  d.U0 = [](const Point&) { return Point::Zero().eval(); };
  d.C0 = [c](const Point&) { return c; };
  d.S0 = [s](const Point&) { return s; };
  d.I0 = [i](const Point&) { return i; };
  d.R0 = [r](const Point&) { return r; };
  return d;
}

InitialData zero_initial_data() {
  InitialData d = uniform_initial_data(0.0, 0.0, 0.0, 0.0);
  d.preset = InitialData::Preset::Zero;
  return d;
}

std::string to_string(InitialData::Preset preset) {
  switch (preset) {
    case InitialData::Preset::Vortex:
      return "vortex";
    case InitialData::Preset::Uniform:
      return "uniform";
    case InitialData::Preset::Zero:
      return "zero";
    case InitialData::Preset::Custom:
      return "custom";
  }
  return "custom";
}

InitialData::Preset initial_preset_from_string(const std::string& name) {
  if (name == "vortex") return InitialData::Preset::Vortex;
  if (name == "uniform") return InitialData::Preset::Uniform;
  if (name == "zero") return InitialData::Preset::Zero;
  if (name == "custom") return InitialData::Preset::Custom;
  throw std::invalid_argument("unknown initial preset '" + name + "'");
}

}  // namespace sirpns
