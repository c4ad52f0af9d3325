// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace irsbeam {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_sq(v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n < 1e-15) throw std::invalid_argument("normalized(): zero-length vector");
  return v / n;
}

// Cosine of a physical angle, kept in the half-open interval [-1, 1).
// Addition/subtraction wrap modulo 2 so the result stays in range:
//   a (-) b = ((a - b + 1) mod 2) - 1,   a (+) b = ((a + b + 1) mod 2) - 1.
class CosAngle {
 public:
  CosAngle() = default;
  explicit CosAngle(double v) : v_(wrap(v)) {}

  double value() const { return v_; }

  static double wrap(double x) {
    if (x >= -1.0 && x < 1.0) return x;  // bit-exact for in-range values
    double w = std::fmod(x + 1.0, 2.0);
    if (w < 0.0) w += 2.0;
    w -= 1.0;
    if (w >= 1.0 || w < -1.0) w = -1.0;  // rounding at the seam
    return w;
  }

 private:
  double v_ = 0.0;
};

inline CosAngle cos_sub(CosAngle a, CosAngle b) { return CosAngle(a.value() - b.value()); }
inline CosAngle cos_add(CosAngle a, CosAngle b) { return CosAngle(a.value() + b.value()); }

// Uniform linear array, half-wavelength spacing; `direction` is the array axis.
struct ArrayGeometry {
  int size = 1;
  Vec3 direction{1.0, 0.0, 0.0};

  ArrayGeometry() = default;
  ArrayGeometry(int n, const Vec3& dir) : size(n), direction(normalized(dir)) {
    if (n < 1) throw std::invalid_argument("ArrayGeometry: size must be >= 1");
  }
};

// Axis-aligned box used for the cuboid user obstacles.
struct Box {
  Vec3 center;
  Vec3 half_extents;

  Box() = default;
  Box(const Vec3& c, const Vec3& he) : center(c), half_extents(he) {
    if (he.x <= 0.0 || he.y <= 0.0 || he.z <= 0.0)
      throw std::invalid_argument("Box: half extents must be positive");
  }
};

// ULA steering vector, entry k = exp(j*pi*k*psi).
inline Eigen::VectorXcd steering_vector(int n, CosAngle psi) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  Eigen::VectorXcd a(n);
  constexpr double pi = 3.14159265358979323846;
  for (int k = 0; k < n; ++k) a(k) = std::polar(1.0, pi * k * psi.value());
  return a;
}

// Cosine of the bearing from `anchor_pos` to `p` measured against `axis`.
// An exact +1 is mapped to the largest double below 1 so the wrapped
// arithmetic never folds a true boresight hit onto -1.
inline CosAngle cosine_of_direction(const Vec3& p, const Vec3& anchor_pos, const Vec3& axis) {
  const Vec3 d = p - anchor_pos;
  const double r = norm(d);
  if (r < 1e-15) throw std::invalid_argument("cosine_of_direction: degenerate geometry");
  double c = dot(d, axis) / r;
  if (c >= 1.0) c = std::nextafter(1.0, -1.0);
  if (c < -1.0) c = -1.0;
  return CosAngle(c);
}

// Slab-clipping test of segment (a, b) against a closed axis-aligned box.
// Boundary grazes within `tol` count as intersections (obstacles block
// conservatively).
inline bool segment_intersects_box(const Vec3& a, const Vec3& b, const Box& box,
                                   double tol = 1e-12) {
  const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
  const double o[3] = {a.x - box.center.x, a.y - box.center.y, a.z - box.center.z};
  const double h[3] = {box.half_extents.x, box.half_extents.y, box.half_extents.z};

  double tmin = 0.0, tmax = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > h[i] + tol) return false;
      continue;
    }
    double t1 = (-h[i] - o[i]) / d[i];
    double t2 = (h[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax + tol) return false;
  }
  return true;
}

}  // namespace irsbeam
