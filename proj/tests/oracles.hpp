#pragma once

// Reference computations that share no code with the library.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> dense_solve(Dense a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (a[piv][k] == 0.0) throw std::runtime_error("singular");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

struct Sir {
  double S, I, R;
};

struct SirRates {
  double beta, gamma, eta, Lambda;
};

// One backward Euler step of the homogeneous SIR system, solved by Newton's method
// on the fully implicit 3x3 residual.
inline Sir implicit_euler_sir(const SirRates& p, const Sir& y0, double dt) {
  Sir y = y0;
  for (int it = 0; it < 100; ++it) {
    const double n = y.S + y.I + y.R;
    const double inc = p.beta * y.S * y.I / n;
    const std::array<double, 3> f{y.S - y0.S - dt * (p.Lambda - inc - p.eta * y.S),
                                  y.I - y0.I - dt * (inc - (p.gamma + p.eta) * y.I),
                                  y.R - y0.R - dt * (p.gamma * y.I - p.eta * y.R)};
    // d(inc)/dS, dI, dR
    const double dS = p.beta * y.I * (n - y.S) / (n * n);
    const double dI = p.beta * y.S * (n - y.I) / (n * n);
    const double dR = -p.beta * y.S * y.I / (n * n);
    Dense j{{1 + dt * (dS + p.eta), dt * dI, dt * dR},
            {-dt * dS, 1 - dt * (dI - p.gamma - p.eta), -dt * dR},
            {0.0, -dt * p.gamma, 1 + dt * p.eta}};
    const auto d = dense_solve(j, {-f[0], -f[1], -f[2]});
    y.S += d[0];
    y.I += d[1];
    y.R += d[2];
    if (std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2]) < 1e-15) break;
  }
  return y;
}

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 40) {
  const auto rule = [&](double l, double r, double fl, double fm, double fr) {
    return (r - l) / 6.0 * (fl + 4.0 * fm + fr);
  };
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double l, double r, double fl, double fm, double fr, double whole, double eps, int d) {
        const double m = 0.5 * (l + r);
        const double lm = 0.5 * (l + m), rm = 0.5 * (m + r);
        const double flm = f(lm), frm = f(rm);
        const double left = rule(l, m, fl, flm, fm), right = rule(m, r, fm, frm, fr);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(l, m, fl, flm, fm, left, 0.5 * eps, d - 1) +
               rec(m, r, fm, frm, fr, right, 0.5 * eps, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), tol, depth);
}

// Iterated adaptive Simpson over [x0,x1] x [y0,y1].
inline double simpson_2d(const std::function<double(double, double)>& f, double x0, double x1,
                         double y0, double y1, double tol) {
  return simpson([&](double x) { return simpson([&](double y) { return f(x, y); }, y0, y1, tol); },
                 x0, x1, tol);
}

// Central differences.
inline double d_dx(const std::function<double(double, double)>& f, double x, double y, double h = 1e-5) {
  return (f(x + h, y) - f(x - h, y)) / (2 * h);
}
inline double d_dy(const std::function<double(double, double)>& f, double x, double y, double h = 1e-5) {
  return (f(x, y + h) - f(x, y - h)) / (2 * h);
}
inline double laplacian(const std::function<double(double, double)>& f, double x, double y,
                        double h = 1e-4) {
  return (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4 * f(x, y)) / (h * h);
}

}  // namespace oracle
