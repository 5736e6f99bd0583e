#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace aeroduo {

constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double norm_xy() const { return std::hypot(x, y); }

  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? *this / n : Vec3{};
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double distance_xy(const Vec3& a, const Vec3& b) { return (a - b).norm_xy(); }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// Axis-aligned box: rectangular footprint extruded from the ground up to `height`.
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
  double height = 0.0;

  bool footprint_contains(double x, double y) const {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }
  bool contains(const Vec3& p) const {
    return footprint_contains(p.x, p.y) && p.z >= 0.0 && p.z <= height;
  }
  // Euclidean distance from a point to the solid (0 inside).
  double distance_to(const Vec3& p) const {
    double dx = std::max({x1 - p.x, 0.0, p.x - x2});
    double dy = std::max({y1 - p.y, 0.0, p.y - y2});
    double dz = std::max({0.0 - p.z, 0.0, p.z - height});
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  bool overlaps_footprint(const Box& o) const {
    return x1 < o.x2 && o.x1 < x2 && y1 < o.y2 && o.y1 < y2;
  }
};

// Slab test against the box solid [x1,x2]x[y1,y2]x[0,h].
// Returns entry parameter t >= 0 along origin + t*dir, or nullopt.
inline std::optional<double> ray_box_intersect(const Vec3& origin, const Vec3& dir,
                                               const Box& box) {
  double tmin = 0.0;
  double tmax = std::numeric_limits<double>::infinity();
  const double lo[3] = {box.x1, box.y1, 0.0};
  const double hi[3] = {box.x2, box.y2, box.height};
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
    } else {
      double t1 = (lo[i] - o[i]) / d[i];
      double t2 = (hi[i] - o[i]) / d[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return std::nullopt;
    }
  }
  return tmin;
}

}  // namespace aeroduo
