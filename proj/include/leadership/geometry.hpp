#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace leadership {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;
};

inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

// z of (b - a) x (c - a); > 0 when c is left of a->b
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

/// Convex hull by monotone chain. Counterclockwise, no collinear vertices.
/// Collinear input yields the two extreme points; a single distinct point
/// yields one vertex.
inline std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = pts[i];
    while (k >= lower && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

/// Containment test against a hull from convex_hull_2d. Boundary counts as
/// inside; near-boundary slack is relative so the test is scale free.
inline bool hull_contains(const std::vector<Point2>& hull, Point2 p) {
  constexpr double rel = 1e-12;
  if (hull.empty()) return false;
  if (hull.size() == 1) return norm(p - hull[0]) <= rel * (norm(p) + norm(hull[0]));
  if (hull.size() == 2) {
    const Point2 a = hull[0], b = hull[1];
    const Point2 ab = b - a, ap = p - a;
    const double len = norm(ab);
    if (std::abs(cross(ab, ap)) > rel * len * (norm(ap) + len)) return false;
    const double t = dot(ap, ab);
    return t >= -rel * len * len && t <= len * len * (1.0 + rel);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 a = hull[i], b = hull[(i + 1) % hull.size()];
    const Point2 ab = b - a, ap = p - a;
    if (cross(ab, ap) < -rel * norm(ab) * norm(ap)) return false;
  }
  return true;
}

}  // namespace leadership
