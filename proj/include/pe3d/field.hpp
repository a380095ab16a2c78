/**
 * @file field.hpp
 * @brief Node-based 2D arrays and the finite-difference operators shared by
 *        every solver stage.
 *
 * Arrays hold (I+1) x (J+1) nodes including both boundaries. Storage is
 * row-major in y, so index i (the x direction) is contiguous.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pe3d {

/// Base exception for every library failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Field2D {
 public:
  Field2D() = default;
  Field2D(int nx, int ny, double value = 0.0)
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, value) {
    if (nx < 1 || ny < 1) throw Error("Field2D: empty shape");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  std::span<double> row(int j) {
    return {data_.data() + static_cast<std::size_t>(j) * nx_, static_cast<std::size_t>(nx_)};
  }
  std::span<const double> row(int j) const {
    return {data_.data() + static_cast<std::size_t>(j) * nx_, static_cast<std::size_t>(nx_)};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Field2D& other) const { return nx_ == other.nx_ && ny_ == other.ny_; }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Field2D& operator+=(const Field2D& o) {
    require_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Field2D& operator-=(const Field2D& o) {
    require_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Field2D& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  /// this += a * x
  void axpy(double a, const Field2D& x) {
    require_shape(x);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += a * x.data_[k];
  }

  /// this += x .* y
  void add_product(const Field2D& x, const Field2D& y, double scale = 1.0) {
    require_shape(x);
    require_shape(y);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += scale * x.data_[k] * y.data_[k];
  }

  /// Sub-block with nodes [i0, i1] x [j0, j1], inclusive.
  Field2D block(int i0, int i1, int j0, int j1) const {
    if (i0 < 0 || j0 < 0 || i1 >= nx_ || j1 >= ny_ || i1 < i0 || j1 < j0)
      throw Error("Field2D::block: rectangle outside array");
    Field2D out(i1 - i0 + 1, j1 - j0 + 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) out(i - i0, j - j0) = (*this)(i, j);
    return out;
  }

  friend bool operator==(const Field2D&, const Field2D&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i);
  }
  void require_shape(const Field2D& o) const {
    if (!same_shape(o)) throw Error("Field2D: shape mismatch");
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> data_;
};

inline Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
inline Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
inline Field2D operator*(double s, Field2D a) { return a *= s; }

// Centered differences in the interior, 2-point one-sided on the boundary.
// Both are exact on linear fields.

inline Field2D derivative_x(const Field2D& f, double dx) {
  const int nx = f.nx(), ny = f.ny();
  Field2D out(nx, ny);
  if (nx < 2) return out;
  const double inv2 = 0.5 / dx, inv1 = 1.0 / dx;
  for (int j = 0; j < ny; ++j) {
    auto src = f.row(j);
    auto dst = out.row(j);
    dst[0] = (src[1] - src[0]) * inv1;
    for (int i = 1; i < nx - 1; ++i) dst[i] = (src[i + 1] - src[i - 1]) * inv2;
    dst[nx - 1] = (src[nx - 1] - src[nx - 2]) * inv1;
  }
  return out;
}

inline Field2D derivative_y(const Field2D& f, double dy) {
  const int nx = f.nx(), ny = f.ny();
  Field2D out(nx, ny);
  if (ny < 2) return out;
  const double inv2 = 0.5 / dy, inv1 = 1.0 / dy;
  for (int j = 0; j < ny; ++j) {
    const int jm = (j == 0) ? 0 : j - 1;
    const int jp = (j == ny - 1) ? ny - 1 : j + 1;
    const double w = (j == 0 || j == ny - 1) ? inv1 : inv2;
    auto lo = f.row(jm);
    auto hi = f.row(jp);
    auto dst = out.row(j);
    for (int i = 0; i < nx; ++i) dst[i] = (hi[i] - lo[i]) * w;
  }
  return out;
}

inline Field2D divergence(const Field2D& u, const Field2D& v, double dx, double dy) {
  return derivative_x(u, dx) + derivative_y(v, dy);
}

/// Largest |divergence| over interior nodes.
inline double max_interior_divergence(const Field2D& u, const Field2D& v, double dx, double dy) {
  const Field2D d = divergence(u, v, dx, dy);
  double m = 0.0;
  for (int j = 1; j < d.ny() - 1; ++j)
    for (int i = 1; i < d.nx() - 1; ++i) m = std::max(m, std::abs(d(i, j)));
  return m;
}

}  // namespace pe3d
