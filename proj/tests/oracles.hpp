#pragma once

// Reference computations used as test oracles. Each one is written
// independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "embres/point_cloud.hpp"
#include "embres/rng.hpp"

namespace oracle {

// Brute-force closed-ball count.
inline std::size_t naive_count(const embres::PointCloud& cloud, std::span<const double> c, double r) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (embres::squared_distance(cloud.point(i), c) <= r * r) ++n;
  return n;
}

// Least-squares slope from the normal equations in long double.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double m = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((m * sxy - sx * sy) / (m * sxx - sx * sx));
}

inline double deg(double d) { return d * 3.14159265358979323846 / 180.0; }

// Angle between lines spanned by a and b, via acos of |cos|.
inline double line_angle(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return std::acos(std::min(1.0, std::abs(ab) / std::sqrt(aa * bb)));
}

inline embres::PointCloud gaussian_cloud(std::size_t N, std::size_t n, std::uint64_t seed, double scale = 1.0) {
  embres::Rng rng(seed);
  std::vector<double> c(N * n);
  for (auto& x : c) x = scale * rng.normal();
  return embres::PointCloud(n, std::move(c));
}

// Random orthogonal matrix (row-major n x n) by Gram-Schmidt.
inline std::vector<double> random_rotation(std::size_t n, std::uint64_t seed) {
  embres::Rng rng(seed);
  std::vector<std::vector<double>> rows;
  while (rows.size() < n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    for (const auto& r : rows) {
      double d = 0;
      for (std::size_t k = 0; k < n; ++k) d += r[k] * v[k];
      for (std::size_t k = 0; k < n; ++k) v[k] -= d * r[k];
    }
    double len = 0;
    for (double x : v) len += x * x;
    len = std::sqrt(len);
    if (len < 1e-6) continue;
    for (auto& x : v) x /= len;
    rows.push_back(v);
  }
  std::vector<double> q;
  for (const auto& r : rows) q.insert(q.end(), r.begin(), r.end());
  return q;
}

inline embres::PointCloud transform(const embres::PointCloud& cloud, const std::vector<double>& q,
                                    const std::vector<double>& shift) {
  const std::size_t n = cloud.dim();
  std::vector<double> out(cloud.size() * n);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0;
      for (std::size_t b = 0; b < n; ++b) s += q[a * n + b] * p[b];
      out[i * n + a] = s + shift[a];
    }
  }
  return embres::PointCloud(n, std::move(out));
}

inline std::vector<double> apply(const std::vector<double>& q, std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out[a] += q[a * n + b] * v[b];
  return out;
}

}  // namespace oracle
