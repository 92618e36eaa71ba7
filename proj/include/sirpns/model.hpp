#pragma once

#include "sirpns/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sirpns {

/// Scalar response c(s) used for the transmission rate beta(C) and viscosity nu(C).
struct CoefficientFn {
  enum class Kind { Constant, Affine, ClampedAffine };

  Kind kind = Kind::Constant;
  double c0 = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  static CoefficientFn constant(double c0) { return {Kind::Constant, c0, c0, c0}; }
  static CoefficientFn affine(double c0) { return {Kind::Affine, c0, 0.0, 0.0}; }
  static CoefficientFn clamped_affine(double c0, double lo, double hi) {
    return {Kind::ClampedAffine, c0, lo, hi};
  }

  double operator()(double s) const;
  bool bounded() const { return kind != Kind::Affine; }
  /// Tightest known bounds; meaningless for the unbounded affine kind.
  double lower_bound() const { return kind == Kind::Constant ? c0 : lo; }
  double upper_bound() const { return kind == Kind::Constant ? c0 : hi; }

  bool operator==(const CoefficientFn&) const = default;
};

double eval_coefficient(const CoefficientFn& fn, double s);

/// Vector body force f(x, t).
using ForcingField = std::function<Point(const Point&, double)>;

struct ModelParams {
  double D_S = 0.2;
  double D_I = 0.3;
  double D_R = 0.4;
  double D_C = 0.1;
  double alpha = 0.6;   // shedding
  double gamma = 0.4;   // recovery
  double lambda = 0.4;  // pathogen decay
  double eta = 0.05;    // death
  double Lambda = 0.4;  // birth
  CoefficientFn beta = CoefficientFn::constant(0.3);
  CoefficientFn nu = CoefficientFn::constant(0.1);
  Point body_force = Point::Zero();
  /// Optional space/time dependent force added to body_force (not part of config files).
  ForcingField forcing_field;
  double n_floor = 1e-10;

  Point forcing(const Point& x, double t) const {
    return forcing_field ? Point(body_force + forcing_field(x, t)) : body_force;
  }

  /// Compares every configurable value; forcing_field is ignored.
  bool operator==(const ModelParams& o) const;
};

inline constexpr double kDefaultBeta0 = 0.3;
inline constexpr double kDefaultNu0 = 0.1;

struct Violation {
  std::string assumption;
  std::string message;
  bool fatal = true;
};

/// Reports every breached modelling assumption; never throws.
std::vector<Violation> validate(const ModelParams& params);
bool has_fatal(const std::vector<Violation>& violations);

/// max(S + I + R, n_floor): the denominator of the incidence term.
inline double safe_population(double s, double i, double r, double n_floor) {
  const double n = s + i + r;
  return n > n_floor ? n : n_floor;
}

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

struct InitialData {
  enum class Preset { Vortex, Uniform, Zero, Custom };

  Preset preset = Preset::Vortex;
  VectorField U0;
  ScalarField C0, S0, I0, R0;
};

/// Vortex velocity, radial pathogen bump, and disk-limited S/I profiles on the unit square.
InitialData vortex_initial_data();
InitialData uniform_initial_data(double s, double i, double r, double c = 0.0);
InitialData zero_initial_data();

std::string to_string(InitialData::Preset preset);
InitialData::Preset initial_preset_from_string(const std::string& name);

}  // namespace sirpns
