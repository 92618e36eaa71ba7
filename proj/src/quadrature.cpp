#include "sirpns/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sirpns {

namespace {

QuadratureRule make_symmetric(const std::vector<std::pair<double, double>>& orbits, int degree) {
  // Each orbit is (a, w): points (1-2a, a, a) and permutations, weight w of the unit-area rule.
  QuadratureRule rule;
  rule.degree = degree;
  for (const auto& [a, w] : orbits) {
    const double b = 1.0 - 2.0 * a;
    for (const Eigen::Vector3d& p : {Eigen::Vector3d(b, a, a), Eigen::Vector3d(a, b, a),
                                     Eigen::Vector3d(a, a, b)}) {
      rule.points.push_back(p);
      rule.weights.push_back(0.5 * w);
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& triangle_rule_degree2() {
  static const QuadratureRule rule = make_symmetric({{1.0 / 6.0, 1.0 / 3.0}}, 2);
  return rule;
}

const QuadratureRule& triangle_rule_degree4() {
  // Strang-Fix / Dunavant 6-point rule.
  static const QuadratureRule rule = make_symmetric(
      {{0.44594849091596488631832925388305, 0.22338158967801146569500700843312},
       {0.091576213509770743459571463402202, 0.10995174365532186763832632490021}},
      4);
  return rule;
}

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule collapsed_gauss_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("negative quadrature degree");
  // After the Duffy map a degree-d monomial becomes degree d+1 in the collapsed direction.
  const int n = (degree + 2 + 1) / 2;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = x[i];
      const double eta = x[j] * (1.0 - x[i]);
      rule.points.emplace_back(1.0 - xi - eta, xi, eta);
      rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  }
  return rule;
}

const QuadratureRule& triangle_rule_mini() {
  static const QuadratureRule rule = collapsed_gauss_rule(8);
  return rule;
}

}  // namespace sirpns
