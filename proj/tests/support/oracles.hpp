#pragma once

// Closed forms coded independently of the library, used as test oracles.

#include <cmath>
#include <vector>

namespace oracle {

inline double cri(double min_dt, bool at_goal) {
  if (min_dt < 0) return -0.25;
  if (min_dt < 0.2) return 0.25 * (-0.1 + min_dt / 2);
  if (at_goal) return 1.0;
  return 0.0;
}

inline double sfm(double min_dt, bool at_goal, double vx, double vy, double px, double py, double dg, double t,
                  bool discounted, double k = 0.001) {
  if (min_dt < 0) return -0.25;
  if (min_dt < 0.2) return -0.03 * std::exp(-10 * min_dt);
  if (at_goal) return (discounted && t >= 10) ? 1 - 0.02 * (t - 10) : 1.0;
  const double ex = k * (vx - px), ey = k * (vy - py);
  return k - std::sqrt(ex * ex + ey * ey) / 2 - 0.0001 * dg;
}

struct F {
  double x, y;
};

inline F repulse(double sx, double sy, double ox, double oy, double a, double b, double dz) {
  const double dx = sx - ox, dy = sy - oy;
  const double d = std::sqrt(dx * dx + dy * dy);
  const double m = a * std::exp((dz - d) / b);
  return {m * dx / d, m * dy / d};
}

}  // namespace oracle
