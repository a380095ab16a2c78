/**
 * @file baroclinic_solver.hpp
 * @brief Splitting step for modes n >= 1: implicit upwind sweeps along x in
 *        (xi, v, eta), then along y in (u, alpha, beta).
 *
 * Characteristic speeds: xi moves with U0 + N/lambda_n, v with U0, eta with
 * U0 - N/lambda_n (negative for subcritical modes, so eta enters at x = L1),
 * alpha with -N/lambda_n (enters at y = L2) and beta with +N/lambda_n
 * (enters at y = 0). Every recurrence is
 *
 *   value_i = (rhs_i + c value_{i -/+ 1}) / (1 + c),   c = |speed| dt / h,
 *
 * swept away from the inflow node, which holds the boundary datum.
 */
#pragma once

#include <span>
#include <vector>

#include "pe3d/modal_state.hpp"

namespace pe3d {

enum class SweepDirection { increasing, decreasing };

struct SweepSpec {
  double speed = 0.0;
  SweepDirection direction = SweepDirection::increasing;

  static SweepSpec from_speed(double speed) {
    if (speed == 0.0) throw Error("SweepSpec: zero advection speed has no inflow side");
    return {speed, speed > 0.0 ? SweepDirection::increasing : SweepDirection::decreasing};
  }
};

/// Solves one line of the implicit upwind recurrence in place of `out`.
inline void implicit_upwind_line(std::span<const double> rhs, double courant, SweepDirection dir,
                                 double inflow, std::span<double> out) {
  const std::size_t n = rhs.size();
  const double inv = 1.0 / (1.0 + courant);
  if (dir == SweepDirection::increasing) {
    out[0] = inflow;
    for (std::size_t i = 1; i < n; ++i) out[i] = (rhs[i] + courant * out[i - 1]) * inv;
  } else {
    out[n - 1] = inflow;
    for (std::size_t i = n - 1; i-- > 0;) out[i] = (rhs[i] + courant * out[i + 1]) * inv;
  }
}

/// Sweep of a whole field along x, one inflow value per row.
inline Field2D sweep_x(const Field2D& rhs, double courant, SweepDirection dir,
                       std::span<const double> inflow) {
  if (inflow.size() != static_cast<std::size_t>(rhs.ny()))
    throw Error("sweep_x: inflow length does not match grid");
  Field2D out(rhs.nx(), rhs.ny());
  for (int j = 0; j < rhs.ny(); ++j) implicit_upwind_line(rhs.row(j), courant, dir, inflow[j], out.row(j));
  return out;
}

/// Sweep along y, vectorized over rows; one inflow value per column.
inline Field2D sweep_y(const Field2D& rhs, double courant, SweepDirection dir,
                       std::span<const double> inflow) {
  if (inflow.size() != static_cast<std::size_t>(rhs.nx()))
    throw Error("sweep_y: inflow length does not match grid");
  const int nx = rhs.nx(), ny = rhs.ny();
  const double inv = 1.0 / (1.0 + courant);
  Field2D out(nx, ny);
  const int first = dir == SweepDirection::increasing ? 0 : ny - 1;
  const int step = dir == SweepDirection::increasing ? 1 : -1;
  std::copy(inflow.begin(), inflow.end(), out.row(first).begin());
  for (int j = first + step; j >= 0 && j < ny; j += step) {
    auto prev = out.row(j - step);
    auto cur = out.row(j);
    auto r = rhs.row(j);
    for (int i = 0; i < nx; ++i) cur[i] = (r[i] + courant * prev[i]) * inv;
  }
  return out;
}

/// Inflow data of the x-substep; eta_inflow lies on x = L1 for subcritical modes, x = 0 otherwise.
struct XInflow {
  std::vector<double> xi_west, v_west, eta_inflow;

  static XInflow zeros(const Grid2D& g) {
    return {std::vector<double>(g.ny(), 0.0), std::vector<double>(g.ny(), 0.0),
            std::vector<double>(g.ny(), 0.0)};
  }
};

/// Inflow data of the y-substep: alpha on y = L2, beta on y = 0.
struct YInflow {
  std::vector<double> alpha_north, beta_south;

  static YInflow zeros(const Grid2D& g) {
    return {std::vector<double>(g.nx(), 0.0), std::vector<double>(g.nx(), 0.0)};
  }
};

inline SweepSpec eta_sweep(int n, const PhysicalParams& p) {
  return SweepSpec::from_speed(p.U0_bar - wave_speed(n, p));
}

/**
 * @brief x-substep. S1..S3 already hold the level-k value plus dt times the
 *        explicit forcing, so each node solves value = (S + c upwind) / (1 + c).
 */
inline CharacteristicViewX x_sweep(const Field2D& S1, const Field2D& S2, const Field2D& S3,
                                   ModeIndex mode, const XInflow& bc, const Grid2D& g, double dt,
                                   const PhysicalParams& p) {
  if (mode.kind == ModeKind::zero || mode.n < 1) throw Error("x_sweep: zero mode is not swept");
  if (!S1.all_finite() || !S2.all_finite() || !S3.all_finite())
    throw Error("x_sweep: non-finite source");
  const double cn = wave_speed(mode.n, p);
  const SweepSpec eta = eta_sweep(mode.n, p);
  if ((mode.kind == ModeKind::subcritical) != (eta.direction == SweepDirection::decreasing))
    throw Error("x_sweep: mode classification disagrees with the eta characteristic speed");
  const double r = dt / g.dx;
  CharacteristicViewX out;
  out.xi = sweep_x(S1, (p.U0_bar + cn) * r, SweepDirection::increasing, bc.xi_west);
  out.v = sweep_x(S2, p.U0_bar * r, SweepDirection::increasing, bc.v_west);
  out.eta = sweep_x(S3, std::abs(eta.speed) * r, eta.direction, bc.eta_inflow);
  return out;
}

/// y-substep: u is copied, alpha and beta are swept with speed N/lambda_n.
inline CharacteristicViewY y_sweep(const CharacteristicViewY& half, int n, const YInflow& bc,
                                   const Grid2D& g, double dt, const PhysicalParams& p) {
  if (n < 1) throw Error("y_sweep: zero mode is not swept");
  const double c = wave_speed(n, p) * dt / g.dy;
  CharacteristicViewY out;
  out.u = half.u;
  out.alpha = sweep_y(half.alpha, c, SweepDirection::decreasing, bc.alpha_north);
  out.beta = sweep_y(half.beta, c, SweepDirection::increasing, bc.beta_south);
  return out;
}

/// Result of one mode step; the x-substep output is kept for trace recording.
struct ModeStepResult {
  CharacteristicViewX half;
};

/**
 * @brief x-substep, y-substep, diagnostics. Pure function of its inputs:
 *        the returned field depends only on (sources, boundary data).
 */
inline ModeStepResult step_mode(ModeField& mode, const Field2D& S1, const Field2D& S2,
                                const Field2D& S3, const XInflow& xbc, const YInflow& ybc,
                                const Grid2D& g, double dt, const PhysicalParams& p) {
  ModeStepResult result{x_sweep(S1, S2, S3, mode.index, xbc, g, dt, p)};
  from_characteristics_x(result.half, mode, p);
  const CharacteristicViewY full = y_sweep(to_characteristics_y(mode, p), mode.n(), ybc, g, dt, p);
  from_characteristics_y(full, mode, p);
  compute_diagnostics(mode, g, p);
  return result;
}

}  // namespace pe3d
