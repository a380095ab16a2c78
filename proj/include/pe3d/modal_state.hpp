/**
 * @file modal_state.hpp
 * @brief Horizontal grids, per-mode fields, characteristic variables and
 *        reconstruction of physical 3D fields from the modal expansion.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pe3d/field.hpp"
#include "pe3d/vertical_modes.hpp"

namespace pe3d {

/// Node rectangle [i0, i1] x [j0, j1] in the index space of a parent grid.
struct NodeRect {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  friend bool operator==(const NodeRect&, const NodeRect&) = default;
};

/**
 * @brief Collocated node lattice x_i = (i_offset + i) dx, y_j = (j_offset + j) dy.
 *
 * Offsets let a sub-grid share node coordinates bit-for-bit with its parent.
 */
struct Grid2D {
  int I = 0;
  int J = 0;
  double dx = 0.0;
  double dy = 0.0;
  int i_offset = 0;
  int j_offset = 0;

  static Grid2D uniform(int I, int J, double L1, double L2) {
    Grid2D g;
    g.I = I;
    g.J = J;
    g.dx = L1 / I;
    g.dy = L2 / J;
    g.validate();
    return g;
  }

  void validate() const {
    if (I < 4 || J < 4) throw Error("Grid2D: need at least 4 intervals per direction");
    if (!(dx > 0.0) || !(dy > 0.0)) throw Error("Grid2D: spacing must be positive");
  }

  int nx() const { return I + 1; }
  int ny() const { return J + 1; }
  double x(int i) const { return (i_offset + i) * dx; }
  double y(int j) const { return (j_offset + j) * dy; }
  Field2D zeros() const { return Field2D(nx(), ny()); }

  /// Sub-grid on the given node rectangle, same spacing and node coordinates.
  Grid2D restrict_to(const NodeRect& r) const {
    if (r.i0 < 0 || r.j0 < 0 || r.i1 > I || r.j1 > J || r.i1 - r.i0 < 4 || r.j1 - r.j0 < 4)
      throw Error("Grid2D::restrict_to: rectangle misaligned or too small");
    Grid2D g = *this;
    g.I = r.i1 - r.i0;
    g.J = r.j1 - r.j0;
    g.i_offset = i_offset + r.i0;
    g.j_offset = j_offset + r.j0;
    return g;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

struct TimeGrid {
  int K = 1600;
  double T = 5.0e4;

  double dt() const { return T / K; }
  void validate() const {
    if (K < 1) throw Error("TimeGrid: K must be >= 1");
    if (!(T > 0.0)) throw Error("TimeGrid: T must be positive");
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/**
 * @brief Horizontal coefficient fields of one vertical mode.
 *
 * For n = 0 psi and w stay zero and phi is the projection's pressure. For
 * n >= 1 phi and w are diagnostic (see compute_diagnostics).
 */
struct ModeField {
  ModeIndex index;
  Field2D u, v, psi, phi, w;

  ModeField() = default;
  ModeField(ModeIndex idx, const Grid2D& g)
      : index(idx), u(g.zeros()), v(g.zeros()), psi(g.zeros()), phi(g.zeros()), w(g.zeros()) {}

  int n() const { return index.n; }

  bool all_finite() const {
    return u.all_finite() && v.all_finite() && psi.all_finite() && phi.all_finite() &&
           w.all_finite();
  }

  ModeField block(const NodeRect& r) const {
    ModeField out;
    out.index = index;
    out.u = u.block(r.i0, r.i1, r.j0, r.j1);
    out.v = v.block(r.i0, r.i1, r.j0, r.j1);
    out.psi = psi.block(r.i0, r.i1, r.j0, r.j1);
    out.phi = phi.block(r.i0, r.i1, r.j0, r.j1);
    out.w = w.block(r.i0, r.i1, r.j0, r.j1);
    return out;
  }

  friend bool operator==(const ModeField&, const ModeField&) = default;
};

struct ModalState {
  PhysicalParams params;
  Grid2D grid;
  std::vector<ModeField> modes;  // modes[n] for n = 0..N_max

  ModalState() = default;
  ModalState(const PhysicalParams& p, const Grid2D& g, int n_max) : params(p), grid(g) {
    if (n_max < 1) throw Error("ModalState: N_max must be >= 1");
    p.validate();
    g.validate();
    modes.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) modes.emplace_back(classify_mode(n, p), g);
  }

  int n_max() const { return static_cast<int>(modes.size()) - 1; }

  ModalState block(const NodeRect& r) const {
    ModalState out;
    out.params = params;
    out.grid = grid.restrict_to(r);
    for (const auto& m : modes) out.modes.push_back(m.block(r));
    return out;
  }

  friend bool operator==(const ModalState&, const ModalState&) = default;
};

struct CharacteristicViewX {
  Field2D xi, v, eta;
};

struct CharacteristicViewY {
  Field2D u, alpha, beta;
};

inline void require_baroclinic(const ModeField& m, const char* what) {
  if (m.n() < 1) throw Error(std::string(what) + ": zero mode has no characteristic form");
}

/// (u, v, psi) -> (xi, v, eta) = (u - psi/N, v, u + psi/N)
inline CharacteristicViewX to_characteristics_x(const ModeField& m, const PhysicalParams& p) {
  require_baroclinic(m, "to_characteristics_x");
  const double inv_n = 1.0 / p.buoyancy;
  CharacteristicViewX out{m.u, m.v, m.u};
  out.xi.axpy(-inv_n, m.psi);
  out.eta.axpy(inv_n, m.psi);
  return out;
}

inline void from_characteristics_x(const CharacteristicViewX& c, ModeField& m,
                                   const PhysicalParams& p) {
  require_baroclinic(m, "from_characteristics_x");
  const double half_n = 0.5 * p.buoyancy;
  auto xi = c.xi.values();
  auto eta = c.eta.values();
  auto u = m.u.values();
  auto psi = m.psi.values();
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = 0.5 * (xi[k] + eta[k]);
    psi[k] = half_n * (eta[k] - xi[k]);
  }
  m.v = c.v;
}

/// (u, v, psi) -> (u, alpha, beta) = (u, v + psi/N, v - psi/N)
inline CharacteristicViewY to_characteristics_y(const ModeField& m, const PhysicalParams& p) {
  require_baroclinic(m, "to_characteristics_y");
  const double inv_n = 1.0 / p.buoyancy;
  CharacteristicViewY out{m.u, m.v, m.v};
  out.alpha.axpy(inv_n, m.psi);
  out.beta.axpy(-inv_n, m.psi);
  return out;
}

inline void from_characteristics_y(const CharacteristicViewY& c, ModeField& m,
                                   const PhysicalParams& p) {
  require_baroclinic(m, "from_characteristics_y");
  const double half_n = 0.5 * p.buoyancy;
  auto al = c.alpha.values();
  auto be = c.beta.values();
  auto v = m.v.values();
  auto psi = m.psi.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = 0.5 * (al[k] + be[k]);
    psi[k] = half_n * (al[k] - be[k]);
  }
  m.u = c.u;
}

/// phi_n = -psi_n / lambda_n and w_n = -(D_x u_n + D_y v_n) / lambda_n.
inline void compute_diagnostics(ModeField& m, const Grid2D& g, const PhysicalParams& p) {
  if (m.n() < 1) throw Error("compute_diagnostics: zero mode has no diagnostic relations");
  const double inv_lambda = 1.0 / eigen_lambda(m.n(), p);
  m.phi = m.psi;
  m.phi *= -inv_lambda;
  m.w = divergence(m.u, m.v, g.dx, g.dy);
  m.w *= -inv_lambda;
}

inline void compute_diagnostics(ModalState& s) {
  for (int n = 1; n <= s.n_max(); ++n) compute_diagnostics(s.modes[n], s.grid, s.params);
}

enum class Variable { u, v, w, psi, phi };

inline const char* to_string(Variable v) {
  switch (v) {
    case Variable::u: return "u";
    case Variable::v: return "v";
    case Variable::w: return "w";
    case Variable::psi: return "psi";
    case Variable::phi: return "phi";
  }
  return "?";
}

inline Variable parse_variable(const std::string& name) {
  for (Variable v : {Variable::u, Variable::v, Variable::w, Variable::psi, Variable::phi})
    if (name == to_string(v)) return v;
  throw Error("unknown variable '" + name + "'");
}

inline constexpr Variable kAllVariables[] = {Variable::u, Variable::v, Variable::w,
                                             Variable::psi, Variable::phi};

/// Physical field of one variable on a single depth level.
inline Field2D synthesize_level(const ModalState& s, Variable var, double z) {
  if (!(z >= -s.params.depth && z <= 0.0)) throw Error("synthesize_level: z outside [-H, 0]");
  Field2D out = s.grid.zeros();
  const bool sine = var == Variable::w || var == Variable::psi;
  for (int n = sine ? 1 : 0; n <= s.n_max(); ++n) {
    const ModeField& m = s.modes[n];
    const double b = evaluate_mode(sine ? Basis::W : Basis::U, n, z, s.params);
    const Field2D* src = nullptr;
    switch (var) {
      case Variable::u: src = &m.u; break;
      case Variable::v: src = &m.v; break;
      case Variable::w: src = &m.w; break;
      case Variable::psi: src = &m.psi; break;
      case Variable::phi: src = &m.phi; break;
    }
    out.axpy(b, *src);
  }
  return out;
}

/// Physical fields on a stack of depth levels; index [level].
struct PhysicalFields {
  std::vector<double> z;
  std::vector<Field2D> u, v, w, psi, phi;

  const std::vector<Field2D>& get(Variable var) const {
    switch (var) {
      case Variable::u: return u;
      case Variable::v: return v;
      case Variable::w: return w;
      case Variable::psi: return psi;
      case Variable::phi: return phi;
    }
    return u;
  }
};

/// Synthesizes u, v, phi with U_0..U_N and w, psi with W_1..W_N. Diagnostics
/// are recomputed on a copy first so stale phi/w never leak into the output.
inline PhysicalFields reconstruct_physical(const ModalState& state, std::span<const double> z_levels) {
  ModalState s = state;
  compute_diagnostics(s);
  PhysicalFields out;
  out.z.assign(z_levels.begin(), z_levels.end());
  for (double z : z_levels) {
    out.u.push_back(synthesize_level(s, Variable::u, z));
    out.v.push_back(synthesize_level(s, Variable::v, z));
    out.w.push_back(synthesize_level(s, Variable::w, z));
    out.psi.push_back(synthesize_level(s, Variable::psi, z));
    out.phi.push_back(synthesize_level(s, Variable::phi, z));
  }
  return out;
}

}  // namespace pe3d
