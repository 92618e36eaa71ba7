#pragma once

#include <Eigen/Core>

#include <vector>

namespace sirpns {

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)}.
/// Points are barycentric (l0, l1, l2) with l1 = xi, l2 = eta; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Symmetric 3-point rule, exact for degree 2.
const QuadratureRule& triangle_rule_degree2();
/// Symmetric 6-point rule, exact for degree 4.
const QuadratureRule& triangle_rule_degree4();
/// Collapsed (Duffy) Gauss-Legendre product rule exact for the requested degree.
QuadratureRule collapsed_gauss_rule(int degree);
/// Rule used for the MINI velocity blocks (exact to degree 8).
const QuadratureRule& triangle_rule_mini();

/// n-point Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace sirpns
