#pragma once

namespace amcnet {

/// Position of a particle on the Rosenbrock surface.
struct Rosenbrock {
  double x = -2.0;
  double y = 2.0;
};

/// (1 - x)^2 + 100 (y - x^2)^2; global minimum 0 at (1, 1).
double rosenbrock_eval(double x, double y);
inline double rosenbrock_eval(const Rosenbrock& p) { return rosenbrock_eval(p.x, p.y); }

}  // namespace amcnet
