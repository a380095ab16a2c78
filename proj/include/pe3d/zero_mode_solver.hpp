/**
 * @file zero_mode_solver.hpp
 * @brief Barotropic (n = 0) step: implicit upwind predictor followed by a
 *        pressure-correction projection onto discretely divergence-free
 *        velocities.
 *
 * The projection solves for the pressure increment dphi so that
 *
 *   v^{k+1} = v* - dt grad(dphi)
 *
 * has zero centered divergence at every interior node and the prescribed
 * normal component on every boundary node. The gradient is centered in the
 * interior and one-sided on the boundary, so the normal condition becomes a
 * one-sided Neumann condition for dphi. The interior operator is the exact
 * composition div(grad(.)) of the stencils used to measure divergence, which
 * is what lets the divergence vanish to rounding rather than to O(dx^2).
 */
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <span>
#include <vector>

#include "pe3d/modal_state.hpp"

namespace pe3d {

/// Prescribed normal velocity: u on west/east (size J+1), v on south/north (size I+1).
struct NormalVelocityData {
  std::vector<double> west, east, south, north;

  static NormalVelocityData zeros(const Grid2D& g) {
    return {std::vector<double>(g.ny(), 0.0), std::vector<double>(g.ny(), 0.0),
            std::vector<double>(g.nx(), 0.0), std::vector<double>(g.nx(), 0.0)};
  }

  void validate(const Grid2D& g) const {
    const auto ny = static_cast<std::size_t>(g.ny()), nx = static_cast<std::size_t>(g.nx());
    if (west.size() != ny || east.size() != ny || south.size() != nx || north.size() != nx)
      throw Error("NormalVelocityData: edge length does not match grid");
  }
};

/// Boundary data of one zero-mode step.
struct ZeroModeBoundary {
  std::vector<double> inflow_u;  ///< u at x = 0 for the predictor (size J+1)
  std::vector<double> inflow_v;  ///< v at x = 0 for the predictor and the final state
  NormalVelocityData normal;     ///< normal components for the projection

  static ZeroModeBoundary zeros(const Grid2D& g) {
    return {std::vector<double>(g.ny(), 0.0), std::vector<double>(g.ny(), 0.0),
            NormalVelocityData::zeros(g)};
  }
};

struct VelocityPair {
  Field2D u, v;
};

/**
 * @brief Implicit upwind predictor
 *
 *   (v* - v^k)/dt + U0 D_x^- v* + f k x v^k + grad phi^k + G0 = 0,  v*|_{x=0} = inflow,
 *
 * solved row by row with a forward substitution from x = 0.
 */
inline VelocityPair predictor_substep(const Field2D& u, const Field2D& v, const Field2D& phi,
                                      const Field2D& G0x, const Field2D& G0y,
                                      std::span<const double> inflow_u,
                                      std::span<const double> inflow_v, const Grid2D& g, double dt,
                                      const PhysicalParams& p) {
  if (!(dt > 0.0)) throw Error("predictor_substep: dt must be positive");
  if (inflow_u.size() != static_cast<std::size_t>(g.ny()) ||
      inflow_v.size() != static_cast<std::size_t>(g.ny()))
    throw Error("predictor_substep: inflow length does not match grid");
  if (!u.all_finite() || !v.all_finite() || !phi.all_finite() || !G0x.all_finite() ||
      !G0y.all_finite())
    throw Error("predictor_substep: non-finite input");

  const Field2D phix = derivative_x(phi, g.dx);
  const Field2D phiy = derivative_y(phi, g.dy);
  const double f = p.coriolis;
  const double c = p.U0_bar * dt / g.dx;
  const double inv = 1.0 / (1.0 + c);

  VelocityPair out{g.zeros(), g.zeros()};
  for (int j = 0; j < g.ny(); ++j) {
    auto ur = out.u.row(j);
    auto vr = out.v.row(j);
    auto uk = u.row(j), vk = v.row(j), px = phix.row(j), py = phiy.row(j), gx = G0x.row(j),
         gy = G0y.row(j);
    ur[0] = inflow_u[j];
    vr[0] = inflow_v[j];
    for (int i = 1; i < g.nx(); ++i) {
      const double ru = uk[i] - dt * (-f * vk[i] + px[i] + gx[i]);
      const double rv = vk[i] - dt * (f * uk[i] + py[i] + gy[i]);
      ur[i] = (ru + c * ur[i - 1]) * inv;
      vr[i] = (rv + c * vr[i - 1]) * inv;
    }
  }
  return out;
}

/**
 * @brief Factorized projection operator for one grid.
 *
 * Unknowns are dphi at every node plus a scalar flux shift s. Rows:
 *  - interior nodes: div(grad dphi) = div(v*)/dt, boundary normals taken from the data;
 *  - non-corner boundary nodes: one-sided Neumann condition;
 *  - corners: zero mixed difference, dphi_c - dphi_h - dphi_v + dphi_d = 0,
 *    so linear pressures are reproduced exactly;
 *  - one pin row fixing the gauge, removed afterwards by subtracting the mean.
 * The extra column shifts every outward normal velocity by s, absorbing any
 * incompatibility of the boundary fluxes with the discrete Gauss identity.
 */
class PressureProjector {
 public:
  struct Result {
    Field2D delta_phi;
    double residual = 0.0;    ///< relative residual of the bordered system
    double flux_shift = 0.0;  ///< uniform outward normal-velocity correction
    int refinements = 0;
  };

  PressureProjector(const Grid2D& g, double tolerance = 1e-10) : grid_(g), tolerance_(tolerance) {
    g.validate();
    assemble();
  }

  const Grid2D& grid() const { return grid_; }
  double tolerance() const { return tolerance_; }

  Result solve(const Field2D& u_star, const Field2D& v_star, const NormalVelocityData& bc, double dt,
               const Field2D* initial_guess = nullptr) const {
    if (!(dt > 0.0)) throw Error("pressure_poisson_solve: dt must be positive");
    if (!u_star.same_shape(grid_.zeros()) || !v_star.same_shape(u_star))
      throw Error("pressure_poisson_solve: velocity shape does not match grid");
    bc.validate(grid_);
    const Eigen::VectorXd rhs = right_hand_side(u_star, v_star, bc, dt);

    Result out;
    out.delta_phi = grid_.zeros();
    const double rhs_norm = rhs.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    if (initial_guess) {
      if (!initial_guess->same_shape(out.delta_phi))
        throw Error("pressure_poisson_solve: initial guess shape mismatch");
      auto gv = initial_guess->values();
      for (std::size_t k = 0; k < gv.size(); ++k) x[static_cast<Eigen::Index>(k)] = gv[k];
    }
    if (rhs_norm == 0.0) {
      x.setZero();
    } else {
      Eigen::VectorXd r = rhs - matrix_ * x;
      const int cap = std::max(10, 10 * grid_.I * grid_.J);
      while (true) {
        out.residual = r.norm() / rhs_norm;
        if (out.residual <= tolerance_ || out.refinements >= std::min(cap, 20)) break;
        x += lu_->solve(r);
        r = rhs - matrix_ * x;
        ++out.refinements;
      }
      if (!(out.residual <= tolerance_))
        throw Error("pressure_poisson_solve: no convergence, relative residual " +
                    std::to_string(out.residual));
    }

    auto d = out.delta_phi.values();
    double mean = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = x[static_cast<Eigen::Index>(k)];
      mean += d[k];
    }
    mean /= static_cast<double>(d.size());
    for (double& e : d) e -= mean;
    // The bordered column is assembled with dt = 1, so the unknown is s / dt.
    out.flux_shift = x[static_cast<Eigen::Index>(d.size())] * dt;
    return out;
  }

  /// Normal data after the compatibility shift, i.e. what the corrected velocity satisfies.
  static NormalVelocityData shifted(NormalVelocityData bc, double s) {
    for (double& x : bc.west) x -= s;
    for (double& x : bc.east) x += s;
    for (double& x : bc.south) x -= s;
    for (double& x : bc.north) x += s;
    return bc;
  }

  /// Bordered system matrix (exposed for verification against dense solves).
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

  Eigen::VectorXd right_hand_side(const Field2D& u_star, const Field2D& v_star,
                                  const NormalVelocityData& bc, double dt) const {
    const int nx = grid_.nx(), ny = grid_.ny(), I = grid_.I, J = grid_.J;
    const double dx = grid_.dx, dy = grid_.dy;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx) * ny + 1);
    auto U = [&](int i, int j) {
      if (i == 0) return bc.west[j];
      if (i == I) return bc.east[j];
      return u_star(i, j);
    };
    auto V = [&](int i, int j) {
      if (j == 0) return bc.south[i];
      if (j == J) return bc.north[i];
      return v_star(i, j);
    };
    for (int j = 1; j < J; ++j)
      for (int i = 1; i < I; ++i)
        rhs[id(i, j)] =
            ((U(i + 1, j) - U(i - 1, j)) / (2 * dx) + (V(i, j + 1) - V(i, j - 1)) / (2 * dy)) / dt;
    for (int j = 1; j < J; ++j) {
      rhs[id(0, j)] = (u_star(0, j) - bc.west[j]) / (dt * dx);
      rhs[id(I, j)] = (u_star(I, j) - bc.east[j]) / (dt * dx);
    }
    for (int i = 1; i < I; ++i) {
      rhs[id(i, 0)] = (v_star(i, 0) - bc.south[i]) / (dt * dy);
      rhs[id(i, J)] = (v_star(i, J) - bc.north[i]) / (dt * dy);
    }
    return rhs;
  }

 private:
  Eigen::Index id(int i, int j) const { return static_cast<Eigen::Index>(j) * grid_.nx() + i; }

  void assemble() {
    const int nx = grid_.nx(), ny = grid_.ny(), I = grid_.I, J = grid_.J;
    const double dx = grid_.dx, dy = grid_.dy;
    const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n) * 9);

    const double cx = 1.0 / (4 * dx * dx), cy = 1.0 / (4 * dy * dy);
    for (int j = 1; j < J; ++j)
      for (int i = 1; i < I; ++i) {
        const auto row = id(i, j);
        // +U(i+1,j)/(2dx), U = -dt Gx: contributes (dphi(i+2) - dphi(i)) / (4 dx^2)
        if (i + 1 <= I - 1) {
          t.emplace_back(row, id(i + 2, j), cx);
          t.emplace_back(row, id(i, j), -cx);
        }
        if (i - 1 >= 1) {
          t.emplace_back(row, id(i, j), -cx);
          t.emplace_back(row, id(i - 2, j), cx);
        }
        if (j + 1 <= J - 1) {
          t.emplace_back(row, id(i, j + 2), cy);
          t.emplace_back(row, id(i, j), -cy);
        }
        if (j - 1 >= 1) {
          t.emplace_back(row, id(i, j), -cy);
          t.emplace_back(row, id(i, j - 2), cy);
        }
      }
    const double nxw = 1.0 / (dx * dx), nyw = 1.0 / (dy * dy);
    for (int j = 1; j < J; ++j) {
      t.emplace_back(id(0, j), id(1, j), nxw);
      t.emplace_back(id(0, j), id(0, j), -nxw);
      t.emplace_back(id(I, j), id(I, j), nxw);
      t.emplace_back(id(I, j), id(I - 1, j), -nxw);
    }
    for (int i = 1; i < I; ++i) {
      t.emplace_back(id(i, 0), id(i, 1), nyw);
      t.emplace_back(id(i, 0), id(i, 0), -nyw);
      t.emplace_back(id(i, J), id(i, J), nyw);
      t.emplace_back(id(i, J), id(i, J - 1), -nyw);
    }
    const int ci[4] = {0, I, 0, I}, cj[4] = {0, 0, J, J};
    for (int c = 0; c < 4; ++c) {
      const int i = ci[c], j = cj[c];
      const int ih = i == 0 ? 1 : I - 1, jv = j == 0 ? 1 : J - 1;
      t.emplace_back(id(i, j), id(i, j), nxw);
      t.emplace_back(id(i, j), id(ih, j), -nxw);
      t.emplace_back(id(i, j), id(i, jv), -nxw);
      t.emplace_back(id(i, j), id(ih, jv), nxw);
    }

    // Column n: -d(rhs)/ds for a unit outward shift of the normal data.
    NormalVelocityData unit = NormalVelocityData::zeros(grid_);
    unit = shifted(unit, 1.0);
    const Field2D zero = grid_.zeros();
    const Eigen::VectorXd w = right_hand_side(zero, zero, unit, 1.0);
    for (Eigen::Index k = 0; k < n; ++k)
      if (w[k] != 0.0) t.emplace_back(k, n, -w[k]);
    // Gauge pin on the grid centre.
    t.emplace_back(n, id(I / 2, J / 2), nxw);

    matrix_.resize(n + 1, n + 1);
    matrix_.setFromTriplets(t.begin(), t.end());
    matrix_.makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
    lu_->compute(matrix_);
    if (lu_->info() != Eigen::Success)
      throw Error("PressureProjector: factorization failed (" + lu_->lastErrorMessage() + ")");
  }

  Grid2D grid_;
  double tolerance_;
  Eigen::SparseMatrix<double> matrix_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;
};

/// One-shot projection solve (factorizes on every call; steppers reuse a PressureProjector).
inline PressureProjector::Result pressure_poisson_solve(const Field2D& u_star, const Field2D& v_star,
                                                        const NormalVelocityData& bc,
                                                        const Grid2D& g, double dt) {
  return PressureProjector(g).solve(u_star, v_star, bc, dt);
}

struct CorrectedState {
  Field2D u, v, phi;
};

/// v^{k+1} = v* - dt grad(dphi), phi^{k+1} = phi^k + dphi.
inline CorrectedState correction_substep(const Field2D& u_star, const Field2D& v_star,
                                         const Field2D& delta_phi, const Field2D& phi_k,
                                         const Grid2D& g, double dt) {
  if (!u_star.same_shape(v_star) || !u_star.same_shape(delta_phi) || !u_star.same_shape(phi_k))
    throw Error("correction_substep: shape mismatch");
  CorrectedState out{u_star, v_star, phi_k};
  out.u.axpy(-dt, derivative_x(delta_phi, g.dx));
  out.v.axpy(-dt, derivative_y(delta_phi, g.dy));
  out.phi += delta_phi;
  return out;
}

struct ZeroModeWork {
  Field2D u_star, v_star, delta_phi;
  double residual = 0.0;
  double flux_shift = 0.0;
};

/**
 * @brief Full zero-mode step: predictor, projection, correction.
 *
 * The x = 0 values are imposed on the predictor output. South and north keep
 * the predicted normal velocity, so the Neumann data carries the mismatch.
 * After the correction every prescribed boundary value
 * (normal components on all four sides, v at x = 0) is written back so that
 * corners carry the data too. Interior divergence is unaffected by this.
 */
inline ZeroModeWork step_zero_mode(ModeField& mode0, const Field2D& G0x, const Field2D& G0y,
                                   const ZeroModeBoundary& bc, const PressureProjector& projector,
                                   double dt, const PhysicalParams& p) {
  if (mode0.n() != 0) throw Error("step_zero_mode: expected mode 0");
  const Grid2D& g = projector.grid();
  bc.normal.validate(g);
  VelocityPair star =
      predictor_substep(mode0.u, mode0.v, mode0.phi, G0x, G0y, bc.inflow_u, bc.inflow_v, g, dt, p);
  for (int j = 0; j < g.ny(); ++j) star.v(0, j) = bc.inflow_v[j];

  auto solved = projector.solve(star.u, star.v, bc.normal, dt);
  CorrectedState next = correction_substep(star.u, star.v, solved.delta_phi, mode0.phi, g, dt);

  const NormalVelocityData eff = PressureProjector::shifted(bc.normal, solved.flux_shift);
  for (int i = 0; i < g.nx(); ++i) {
    next.v(i, 0) = eff.south[i];
    next.v(i, g.J) = eff.north[i];
  }
  for (int j = 0; j < g.ny(); ++j) {
    next.u(0, j) = eff.west[j];
    next.u(g.I, j) = eff.east[j];
    next.v(0, j) = bc.inflow_v[j];
  }

  mode0.u = std::move(next.u);
  mode0.v = std::move(next.v);
  mode0.phi = std::move(next.phi);
  mode0.psi.fill(0.0);
  mode0.w.fill(0.0);
  return {std::move(star.u), std::move(star.v), std::move(solved.delta_phi), solved.residual,
          solved.flux_shift};
}

/// Reported (never enforced) quantities of the projection scheme's stability bound.
struct StabilityDiagnostic {
  double ratio = 0.0;  ///< dt / (dx^2 + dy^2)^2
  bool dt_below_eighth = false;
};

inline StabilityDiagnostic stability_diagnostic(const Grid2D& g, double dt) {
  const double h2 = g.dx * g.dx + g.dy * g.dy;
  return {dt / (h2 * h2), dt <= 0.125};
}

}  // namespace pe3d
