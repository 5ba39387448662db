#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace renev {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Uniform draw inside a disc.
template <typename Rng>
Point sample_in_disc(Rng& rng, Point center, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

// Maps a point of the unit square onto the disc with the area-preserving
// polar transform.
inline Point square_to_disc(double u, double v, Point center, double radius) {
  const double r = radius * std::sqrt(u);
  const double theta = 2.0 * std::numbers::pi * v;
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

}  // namespace renev
