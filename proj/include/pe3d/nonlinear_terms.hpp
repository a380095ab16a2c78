/**
 * @file nonlinear_terms.hpp
 * @brief Vertical integrals of the advection operator
 *        B(u,v,w;theta) = u theta_x + v theta_y + w theta_z
 *        against the mode basis, evaluated as convolutions of modal
 *        coefficients, plus a physical-space quadrature oracle.
 *
 * The convolutions follow from the exact triple-product integrals of the
 * basis. Let A(a, b) = u_a d_x theta_b + v_a d_y theta_b. For theta = u or v
 * against U_n, n >= 1:
 *
 *   1/sqrt(H)   [A(0,n) + A(n,0)]
 * + 1/sqrt(2H)  [ sum_{m=1}^{n-1} A(n-m,m) + sum_{m>n} A(m-n,m) + sum_{m>=1} A(m+n,m) ]
 * - 1/sqrt(2H)  [ sum_{m>=1} l_m w_{m+n} theta_m + sum_{m>n} l_m w_{m-n} theta_m
 *                 - sum_{m=1}^{n-1} l_m w_{n-m} theta_m ]
 *
 * and for psi against W_n:
 *
 *   1/sqrt(H)   A(0,n)
 * + 1/sqrt(2H)  [ sum_{m>n} A(m-n,m) + sum_{m=1}^{n-1} A(n-m,m) - sum_{m>=1} A(m+n,m) ]
 * + 1/sqrt(2H)  [ sum_{m>=1} l_m w_{m+n} psi_m + sum_{m=1}^{n-1} l_m w_{n-m} psi_m
 *                 - sum_{m>n} l_m w_{m-n} psi_m ]
 *
 * with l_m = lambda_m. Every index outside [0, N_max] (or [1, N_max] for w
 * and psi) is treated as a zero coefficient, which makes the formulas exact
 * for the truncated expansion.
 */
#pragma once

#include <vector>

#include "pe3d/modal_state.hpp"

namespace pe3d {

enum class IntegralKind { u_against_U0, v_against_U0, u_against_Un, v_against_Un, psi_against_Wn };

inline constexpr IntegralKind kAllIntegralKinds[] = {
    IntegralKind::u_against_U0, IntegralKind::v_against_U0, IntegralKind::u_against_Un,
    IntegralKind::v_against_Un, IntegralKind::psi_against_Wn};

inline const char* to_string(IntegralKind k) {
  switch (k) {
    case IntegralKind::u_against_U0: return "u-against-U0";
    case IntegralKind::v_against_U0: return "v-against-U0";
    case IntegralKind::u_against_Un: return "u-against-Un";
    case IntegralKind::v_against_Un: return "v-against-Un";
    case IntegralKind::psi_against_Wn: return "psi-against-Wn";
  }
  return "?";
}

/// Horizontal derivatives of every prognostic coefficient, computed once per level.
struct ModalDerivatives {
  std::vector<Field2D> ux, uy, vx, vy, psix, psiy;

  explicit ModalDerivatives(const ModalState& s) {
    const double dx = s.grid.dx, dy = s.grid.dy;
    for (const auto& m : s.modes) {
      ux.push_back(derivative_x(m.u, dx));
      uy.push_back(derivative_y(m.u, dy));
      vx.push_back(derivative_x(m.v, dx));
      vy.push_back(derivative_y(m.v, dy));
      psix.push_back(derivative_x(m.psi, dx));
      psiy.push_back(derivative_y(m.psi, dy));
    }
  }
};

namespace detail {

inline bool against_zero_mode(IntegralKind k) {
  return k == IntegralKind::u_against_U0 || k == IntegralKind::v_against_U0;
}

inline const Field2D& advected_value(const ModalState& s, IntegralKind kind, int m) {
  switch (kind) {
    case IntegralKind::u_against_U0:
    case IntegralKind::u_against_Un: return s.modes[m].u;
    case IntegralKind::v_against_U0:
    case IntegralKind::v_against_Un: return s.modes[m].v;
    case IntegralKind::psi_against_Wn: return s.modes[m].psi;
  }
  return s.modes[m].u;
}

inline const std::vector<Field2D>& advected_dx(const ModalDerivatives& d, IntegralKind kind) {
  switch (kind) {
    case IntegralKind::u_against_U0:
    case IntegralKind::u_against_Un: return d.ux;
    case IntegralKind::v_against_U0:
    case IntegralKind::v_against_Un: return d.vx;
    case IntegralKind::psi_against_Wn: return d.psix;
  }
  return d.ux;
}

inline const std::vector<Field2D>& advected_dy(const ModalDerivatives& d, IntegralKind kind) {
  switch (kind) {
    case IntegralKind::u_against_U0:
    case IntegralKind::u_against_Un: return d.uy;
    case IntegralKind::v_against_U0:
    case IntegralKind::v_against_Un: return d.vy;
    case IntegralKind::psi_against_Wn: return d.psiy;
  }
  return d.uy;
}

}  // namespace detail

/// Convolution evaluation with precomputed derivatives; w_m must be current.
inline Field2D b_integral(IntegralKind kind, int n, const ModalState& s, const ModalDerivatives& d) {
  const int nmax = s.n_max();
  const bool zero_target = detail::against_zero_mode(kind);
  if (zero_target ? n != 0 : (n < 1 || n > nmax)) throw Error("b_integral: mode index out of range");

  const auto& tx = detail::advected_dx(d, kind);
  const auto& ty = detail::advected_dy(d, kind);
  const double r1 = 1.0 / std::sqrt(s.params.depth);
  const double r2 = 1.0 / std::sqrt(2.0 * s.params.depth);
  Field2D out = s.grid.zeros();

  // A(a, b) accumulated with weight c
  auto advect = [&](int a, int b, double c) {
    if (a < 0 || a > nmax || b < 0 || b > nmax) return;
    if (kind == IntegralKind::psi_against_Wn && b == 0) return;
    out.add_product(s.modes[a].u, tx[b], c);
    out.add_product(s.modes[a].v, ty[b], c);
  };
  // lambda_m w_a theta_m with weight c
  auto vertical = [&](int a, int m, double c) {
    if (a < 1 || a > nmax || m < 1 || m > nmax) return;
    const double lm = eigen_lambda(m, s.params);
    out.add_product(s.modes[a].w, detail::advected_value(s, kind, m), c * lm);
  };

  if (zero_target) {
    for (int m = 0; m <= nmax; ++m) advect(m, m, r1);
    for (int m = 1; m <= nmax; ++m) vertical(m, m, -r1);
    return out;
  }

  if (kind == IntegralKind::psi_against_Wn) {
    advect(0, n, r1);
    for (int m = n + 1; m <= nmax; ++m) advect(m - n, m, r2);
    for (int m = 1; m <= n - 1; ++m) advect(n - m, m, r2);
    for (int m = 1; m + n <= nmax; ++m) advect(m + n, m, -r2);
    for (int m = 1; m + n <= nmax; ++m) vertical(m + n, m, r2);
    for (int m = 1; m <= n - 1; ++m) vertical(n - m, m, r2);
    for (int m = n + 1; m <= nmax; ++m) vertical(m - n, m, -r2);
    return out;
  }

  advect(0, n, r1);
  advect(n, 0, r1);
  for (int m = 1; m <= n - 1; ++m) advect(n - m, m, r2);
  for (int m = n + 1; m <= nmax; ++m) advect(m - n, m, r2);
  for (int m = 1; m + n <= nmax; ++m) advect(m + n, m, r2);
  for (int m = 1; m + n <= nmax; ++m) vertical(m + n, m, -r2);
  for (int m = n + 1; m <= nmax; ++m) vertical(m - n, m, -r2);
  for (int m = 1; m <= n - 1; ++m) vertical(n - m, m, r2);
  return out;
}

/// Throws when any stored w_m differs from the value its u_m, v_m imply.
inline void require_current_diagnostics(const ModalState& s) {
  for (int n = 1; n <= s.n_max(); ++n) {
    ModeField fresh = s.modes[n];
    compute_diagnostics(fresh, s.grid, s.params);
    if (!(fresh.w == s.modes[n].w)) throw Error("stale diagnostics: w_" + std::to_string(n));
  }
}

inline Field2D b_integral(IntegralKind kind, int n, const ModalState& s) {
  require_current_diagnostics(s);
  return b_integral(kind, n, s, ModalDerivatives(s));
}

/**
 * @brief Physical-space evaluation of the same integral.
 *
 * Reconstructs u, v, w and theta on z_resolution+1 levels, forms B pointwise
 * (horizontal derivatives with the shared stencils, vertical derivatives from
 * the analytic basis derivative) and integrates against the target basis
 * function by composite Simpson. Used for testing only.
 */
inline Field2D quadrature_oracle(IntegralKind kind, int n, const ModalState& state, int z_resolution) {
  const int nmax = state.n_max();
  if (z_resolution < 8 * nmax) throw Error("quadrature_oracle: z resolution below 8*N_max");
  if (z_resolution % 2) ++z_resolution;
  const bool zero_target = detail::against_zero_mode(kind);
  if (zero_target ? n != 0 : (n < 1 || n > nmax))
    throw Error("quadrature_oracle: mode index out of range");

  ModalState s = state;
  compute_diagnostics(s);
  const PhysicalParams& p = s.params;
  const Grid2D& g = s.grid;
  const auto z = uniform_levels(z_resolution, p);
  const bool sine_theta = kind == IntegralKind::psi_against_Wn;
  const Basis target = sine_theta ? Basis::W : Basis::U;
  const Basis theta_basis = sine_theta ? Basis::W : Basis::U;

  std::vector<Field2D> integrand;
  integrand.reserve(z.size());
  for (double zk : z) {
    Field2D u = synthesize_level(s, Variable::u, zk);
    Field2D v = synthesize_level(s, Variable::v, zk);
    Field2D w = synthesize_level(s, Variable::w, zk);
    Field2D theta = g.zeros();
    Field2D theta_z = g.zeros();
    for (int m = sine_theta ? 1 : 0; m <= nmax; ++m) {
      const Field2D& c = detail::advected_value(s, kind, m);
      theta.axpy(evaluate_mode(theta_basis, m, zk, p), c);
      theta_z.axpy(evaluate_mode_derivative(theta_basis, m, zk, p), c);
    }
    Field2D b = g.zeros();
    b.add_product(u, derivative_x(theta, g.dx));
    b.add_product(v, derivative_y(theta, g.dy));
    b.add_product(w, theta_z);
    b *= evaluate_mode(target, n, zk, p);
    integrand.push_back(std::move(b));
  }

  Field2D out = g.zeros();
  const double h = p.depth / z_resolution;
  std::vector<double> column(z.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      for (std::size_t k = 0; k < z.size(); ++k) column[k] = integrand[k](i, j);
      out(i, j) = simpson(column, h);
    }
  return out;
}

/**
 * @brief Right-hand sides of one time step, all frozen at level k.
 *
 * G0 is the zero-mode forcing (x and y components, the latter including the
 * constant f U0 sqrt(H) term). S1, S2, S3 are the x-substep right-hand sides
 * for xi, v and eta of mode n, already containing the level-k values:
 *
 *   S1 = xi  + dt ( f v - Bu_n + Bpsi_n / N )
 *   S2 = v   + dt (-f (xi + eta)/2 - Bv_n )
 *   S3 = eta + dt ( f v - Bu_n - Bpsi_n / N )
 */
struct SourceBundle {
  Field2D G0x, G0y;
  std::vector<Field2D> S1, S2, S3;  // index n, entry 0 unused

  friend bool operator==(const SourceBundle&, const SourceBundle&) = default;
};

inline SourceBundle assemble_sources(const ModalState& s, double dt) {
  for (const auto& m : s.modes)
    if (!m.u.same_shape(s.grid.zeros()) || !m.v.same_shape(m.u) || !m.psi.same_shape(m.u) ||
        !m.w.same_shape(m.u))
      throw Error("assemble_sources: field shape does not match grid");

  const PhysicalParams& p = s.params;
  const ModalDerivatives d(s);
  SourceBundle out;
  out.G0x = b_integral(IntegralKind::u_against_U0, 0, s, d);
  out.G0y = b_integral(IntegralKind::v_against_U0, 0, s, d);
  const double constant_forcing = p.coriolis * p.U0_bar * std::sqrt(p.depth);
  for (double& x : out.G0y.values()) x += constant_forcing;

  const int nmax = s.n_max();
  out.S1.resize(nmax + 1);
  out.S2.resize(nmax + 1);
  out.S3.resize(nmax + 1);
  const double f = p.coriolis, inv_n = 1.0 / p.buoyancy;
  for (int n = 1; n <= nmax; ++n) {
    const ModeField& m = s.modes[n];
    const Field2D bu = b_integral(IntegralKind::u_against_Un, n, s, d);
    const Field2D bv = b_integral(IntegralKind::v_against_Un, n, s, d);
    const Field2D bpsi = b_integral(IntegralKind::psi_against_Wn, n, s, d);
    const CharacteristicViewX c = to_characteristics_x(m, p);

    Field2D s1 = c.xi, s2 = c.v, s3 = c.eta;
    auto S1v = s1.values(), S2v = s2.values(), S3v = s3.values();
    auto v = m.v.values(), xi = c.xi.values(), eta = c.eta.values();
    auto bu_v = bu.values(), bv_v = bv.values(), bpsi_v = bpsi.values();
    for (std::size_t k = 0; k < S1v.size(); ++k) {
      const double common = f * v[k] - bu_v[k];
      S1v[k] += dt * (common + inv_n * bpsi_v[k]);
      S2v[k] += dt * (-f * 0.5 * (xi[k] + eta[k]) - bv_v[k]);
      S3v[k] += dt * (common - inv_n * bpsi_v[k]);
    }
    out.S1[n] = std::move(s1);
    out.S2[n] = std::move(s2);
    out.S3[n] = std::move(s3);
  }
  return out;
}

}  // namespace pe3d
