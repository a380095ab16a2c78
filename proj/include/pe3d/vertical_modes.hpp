/**
 * @file vertical_modes.hpp
 * @brief Rigid-lid vertical eigenbasis, modal projection/synthesis and the
 *        sub/supercritical classification of baroclinic modes.
 *
 * Depth runs over z in [-H, 0]. The cosine family U_n carries u, v and phi,
 * the sine family W_n carries w and psi:
 *
 *   lambda_n = n pi / H,
 *   U_0 = 1/sqrt(H),  U_n = sqrt(2/H) cos(lambda_n z),  W_n = sqrt(2/H) sin(lambda_n z).
 */
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pe3d/field.hpp"

namespace pe3d {

/**
 * @brief Constants of the uniformly stratified base state and the reference
 *        horizontal domain. Defaults are the nested-domain experiment values.
 *
 * Construction validates positivity and rejects the resonant case where
 * H N / (pi U0) is an integer (no mode would be critical-free).
 */
struct PhysicalParams {
  double U0_bar = 20.0;      ///< base zonal velocity (m/s)
  double coriolis = 1.0e-4;  ///< f (1/s)
  double buoyancy = 1.0e-2;  ///< Brunt-Vaisala frequency N (1/s)
  double depth = 1.0e4;      ///< H (m)
  double length_x = 1.0e6;   ///< L1 (m)
  double length_y = 5.0e5;   ///< L2 (m)

  PhysicalParams() = default;
  PhysicalParams(double U0, double f, double N, double H, double L1, double L2)
      : U0_bar(U0), coriolis(f), buoyancy(N), depth(H), length_x(L1), length_y(L2) {
    validate();
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(std::string("PhysicalParams: ") + name + " must be positive and finite");
    };
    positive(U0_bar, "U0");
    positive(buoyancy, "N");
    positive(depth, "H");
    positive(length_x, "L1");
    positive(length_y, "L2");
    if (!std::isfinite(coriolis)) throw Error("PhysicalParams: f must be finite");
    const double r = critical_ratio();
    if (std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r)))
      throw Error("PhysicalParams: H*N/(pi*U0) is an integer (resonant, no generic mode split)");
  }

  /// H N / (pi U0); its integer part is the number of subcritical modes.
  double critical_ratio() const { return depth * buoyancy / (std::numbers::pi * U0_bar); }

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

enum class ModeKind { zero, subcritical, supercritical };
enum class Basis { U, W };

inline const char* to_string(ModeKind k) {
  switch (k) {
    case ModeKind::zero: return "zero";
    case ModeKind::subcritical: return "subcritical";
    case ModeKind::supercritical: return "supercritical";
  }
  return "?";
}

struct ModeIndex {
  int n = 0;
  ModeKind kind = ModeKind::zero;
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

inline double eigen_lambda(int n, const PhysicalParams& p) {
  if (n < 1) throw Error("eigen_lambda: n must be >= 1");
  return n * std::numbers::pi / p.depth;
}

/// Internal gravity wave speed N / lambda_n of mode n >= 1.
inline double wave_speed(int n, const PhysicalParams& p) { return p.buoyancy / eigen_lambda(n, p); }

inline double evaluate_mode(Basis basis, int n, double z, const PhysicalParams& p) {
  if (!(z >= -p.depth && z <= 0.0)) throw Error("evaluate_mode: z outside [-H, 0]");
  if (n < 0) throw Error("evaluate_mode: negative mode number");
  const double norm = std::sqrt(2.0 / p.depth);
  if (basis == Basis::U) {
    if (n == 0) return 1.0 / std::sqrt(p.depth);
    return norm * std::cos(eigen_lambda(n, p) * z);
  }
  if (n == 0) throw Error("evaluate_mode: W_0 is not a basis function");
  return norm * std::sin(eigen_lambda(n, p) * z);
}

/// d/dz of a basis function: U_n' = -lambda_n W_n, W_n' = lambda_n U_n.
inline double evaluate_mode_derivative(Basis basis, int n, double z, const PhysicalParams& p) {
  if (basis == Basis::U) {
    if (n == 0) return 0.0;
    return -eigen_lambda(n, p) * evaluate_mode(Basis::W, n, z, p);
  }
  return eigen_lambda(n, p) * evaluate_mode(Basis::U, n, z, p);
}

inline ModeIndex classify_mode(int n, const PhysicalParams& p) {
  if (n < 0) throw Error("classify_mode: negative mode number");
  if (n == 0) return {0, ModeKind::zero};
  const double speed = p.U0_bar - wave_speed(n, p);
  return {n, speed < 0.0 ? ModeKind::subcritical : ModeKind::supercritical};
}

/// Uniform depth levels z_k = -H + k H / intervals, k = 0..intervals.
inline std::vector<double> uniform_levels(int intervals, const PhysicalParams& p) {
  if (intervals < 1) throw Error("uniform_levels: need at least one interval");
  std::vector<double> z(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) z[k] = -p.depth + p.depth * k / intervals;
  z[intervals] = 0.0;
  return z;
}

/// Composite Simpson rule on uniformly spaced samples (even interval count).
inline double simpson(std::span<const double> f, double h) {
  const std::size_t m = f.size() - 1;
  if (f.size() < 3 || m % 2 != 0) throw Error("simpson: need an even number of intervals");
  double s = f[0] + f[m];
  for (std::size_t k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
  return s * h / 3.0;
}

/**
 * @brief Integral over [-H, 0] of samples(z) times the basis function.
 *
 * Samples live on the uniform grid of samples.size()-1 intervals. An odd
 * interval count is refined by a factor of four with linear interpolation
 * before Simpson is applied.
 */
inline double project_coefficient(std::span<const double> samples, Basis basis, int n,
                                  const PhysicalParams& p) {
  const int intervals = static_cast<int>(samples.size()) - 1;
  if (intervals < 2 * n + 2) throw Error("project_coefficient: vertical grid too coarse");
  for (double s : samples)
    if (!std::isfinite(s)) throw Error("project_coefficient: non-finite sample");
  if (basis == Basis::W && n == 0) throw Error("project_coefficient: W_0 is not a basis function");

  std::vector<double> values;
  int m = intervals;
  if (intervals % 2 == 0) {
    values.assign(samples.begin(), samples.end());
  } else {
    m = 4 * intervals;
    values.resize(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k < m; ++k) {
      const int base = k / 4;
      const double t = (k % 4) / 4.0;
      values[k] = (1.0 - t) * samples[base] + t * samples[base + 1];
    }
    values[m] = samples[intervals];
  }
  const double h = p.depth / m;
  for (int k = 0; k <= m; ++k) {
    const double z = (k == m) ? 0.0 : -p.depth + h * k;
    values[k] *= evaluate_mode(basis, n, z, p);
  }
  return simpson(values, h);
}

/**
 * @brief Truncated modal sum at depth z.
 *
 * For Basis::U, coeffs[k] multiplies U_k (k = 0..N_max). For Basis::W,
 * coeffs[k] multiplies W_{k+1} (k = 0..N_max-1).
 */
inline double synthesize_profile(std::span<const double> coeffs, Basis basis, double z,
                                 const PhysicalParams& p) {
  double s = 0.0;
  const int offset = basis == Basis::U ? 0 : 1;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    s += coeffs[k] * evaluate_mode(basis, static_cast<int>(k) + offset, z, p);
  return s;
}

}  // namespace pe3d
