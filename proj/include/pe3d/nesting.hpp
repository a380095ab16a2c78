/**
 * @file nesting.hpp
 * @brief Run configuration, initial state, the time loop, and the one-way
 *        nested experiment with its comparison metrics.
 */
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pe3d/boundary.hpp"
#include "pe3d/nonlinear_terms.hpp"

namespace pe3d {

enum class InitialKind { standard, zero };
enum class BoundaryKind { homogeneous, playback };

/**
 * @brief Everything that defines one run.
 *
 * `inner` is in node indices of the full grid; all zeros selects the middle
 * half. With boundary = playback the run happens on the inner rectangle and
 * reads traces from the directory `traces`.
 */
struct RunConfig {
  PhysicalParams params;
  int I = 400;
  int J = 200;
  TimeGrid time;
  int n_max = 5;
  int levels = 40;  ///< vertical segments used for projection and 3D norms
  int cadence = 100;
  NodeRect inner{};
  InitialKind initial = InitialKind::standard;
  BoundaryKind boundary = BoundaryKind::homogeneous;
  std::string traces;
  double slice_depth = -2500.0;

  Grid2D grid() const { return Grid2D::uniform(I, J, params.length_x, params.length_y); }

  NodeRect inner_rect() const {
    if (inner == NodeRect{}) return {I / 4, 3 * I / 4, J / 4, 3 * J / 4};
    return inner;
  }

  /// Grid of the run itself: the full grid, or the inner rectangle for playback.
  Grid2D run_grid() const {
    return boundary == BoundaryKind::playback ? grid().restrict_to(inner_rect()) : grid();
  }

  void validate() const {
    params.validate();
    const Grid2D g = grid();
    time.validate();
    if (n_max < 1) throw Error("config: n_max must be >= 1");
    if (levels < 2 * n_max + 2) throw Error("config: levels must be >= 2*n_max+2");
    if (cadence < 1) throw Error("config: cadence must be >= 1");
    require_aligned(g, inner_rect());
    if (!(slice_depth >= -params.depth && slice_depth <= 0.0))
      throw Error("config: slice_depth outside [-H, 0]");
    if (boundary == BoundaryKind::playback && traces.empty())
      throw Error("config: boundary=playback needs a traces directory");
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// ---------------------------------------------------------------------------
// Initial state

/// Closed-form initial fields at one point.
struct InitialPoint {
  double u, v, w, phi, psi;
};

inline InitialPoint initial_fields(double x, double y, double z, const PhysicalParams& p) {
  constexpr double pi = std::numbers::pi;
  const double L1 = p.length_x, L2 = p.length_y, H = p.depth, U = p.U0_bar;
  const double sx2 = std::sin(2 * pi * x / L1), cx2 = std::cos(2 * pi * x / L1);
  const double sx4 = std::sin(4 * pi * x / L1), cx4 = std::cos(4 * pi * x / L1);
  const double sy2 = std::sin(2 * pi * y / L2), cy2 = std::cos(2 * pi * y / L2);
  const double sy4 = std::sin(4 * pi * y / L2), cy4 = std::cos(4 * pi * y / L2);
  const double cz1 = std::cos(pi * z / H), cz2 = std::cos(2 * pi * z / H);
  const double sz1 = std::sin(pi * z / H), sz2 = std::sin(2 * pi * z / H);
  InitialPoint out;
  out.u = (x / L1) * (2 * pi / L2) * sx2 * cy2 + sx4 * cy4 * cz1;
  out.v = (-1.0 / L1) * (sx2 + (2 * pi * x / L1) * cx2) * sy2 + (L2 / L1) * (sx4 * sx4 + sx4 * sy4 * cz1);
  out.w = (-4 * H / L1) * (sx4 + cx4) * cy4 * sz1;
  out.phi = U * sx2 * sy2 * (cz1 - cz2);
  out.psi = (pi * U / H) * sx2 * sy2 * (2 * sz2 - sz1);
  return out;
}

/**
 * @brief Column-wise projection of the closed-form fields onto modes 0..n_max.
 *
 * All five fields are projected, so phi and w hold the projected values;
 * the time loop recomputes the diagnostic ones before its first step.
 */
inline ModalState initial_condition(const Grid2D& g, int levels, int n_max, const PhysicalParams& p) {
  ModalState s(p, g, n_max);
  const auto z = uniform_levels(levels, p);
  std::vector<double> cu(z.size()), cv(z.size()), cw(z.size()), cphi(z.size()), cpsi(z.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      for (std::size_t k = 0; k < z.size(); ++k) {
        const InitialPoint q = initial_fields(g.x(i), g.y(j), z[k], p);
        cu[k] = q.u;
        cv[k] = q.v;
        cw[k] = q.w;
        cphi[k] = q.phi;
        cpsi[k] = q.psi;
      }
      for (int n = 0; n <= n_max; ++n) {
        ModeField& m = s.modes[n];
        m.u(i, j) = project_coefficient(cu, Basis::U, n, p);
        m.v(i, j) = project_coefficient(cv, Basis::U, n, p);
        m.phi(i, j) = project_coefficient(cphi, Basis::U, n, p);
        if (n >= 1) {
          m.w(i, j) = project_coefficient(cw, Basis::W, n, p);
          m.psi(i, j) = project_coefficient(cpsi, Basis::W, n, p);
        }
      }
    }
  return s;
}

/// Largest boundary value of each homogeneous condition the state is meant to satisfy.
struct BoundaryCheckEntry {
  int n;
  TraceKey key;
  double max_abs;
};

/// Evaluates the homogeneous boundary conditions on the edges of the grid.
inline std::vector<BoundaryCheckEntry> check_homogeneous_boundary(const ModalState& s) {
  const NodeRect whole{0, s.grid.I, 0, s.grid.J};
  std::vector<BoundaryCheckEntry> out;
  auto max_abs = [](const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  };
  for (int n = 0; n <= s.n_max(); ++n) {
    const ModeField& m = s.modes[n];
    for (const TraceKey& key : trace_keys(m.index.kind)) {
      const Field2D* src = nullptr;
      CharacteristicViewX xv;
      CharacteristicViewY yv;
      if (n == 0) {
        src = key.var == TraceVar::u ? &m.u : &m.v;
      } else {
        xv = to_characteristics_x(m, s.params);
        yv = to_characteristics_y(m, s.params);
        switch (key.var) {
          case TraceVar::xi: src = &xv.xi; break;
          case TraceVar::v: src = &xv.v; break;
          case TraceVar::eta: src = &xv.eta; break;
          case TraceVar::alpha: src = &yv.alpha; break;
          case TraceVar::beta: src = &yv.beta; break;
          case TraceVar::u: src = &m.u; break;
        }
      }
      out.push_back({n, key, max_abs(extract_line(*src, whole, key.line))});
    }
  }
  return out;
}

inline ModalState make_initial_state(const RunConfig& cfg, const Grid2D& g) {
  if (cfg.initial == InitialKind::zero) return ModalState(cfg.params, g, cfg.n_max);
  return initial_condition(g, cfg.levels, cfg.n_max, cfg.params);
}

// ---------------------------------------------------------------------------
// Norms and metrics

enum class Norm { L2, Linf };

/// Grid-weighted root sum of squares, or max abs.
inline double norm(const Field2D& f, Norm kind, double cell) {
  if (kind == Norm::Linf) return f.max_abs();
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  return std::sqrt(s * cell);
}

inline double norm(const std::vector<Field2D>& f, Norm kind, double cell) {
  if (kind == Norm::Linf) {
    double m = 0.0;
    for (const auto& l : f) m = std::max(m, l.max_abs());
    return m;
  }
  double s = 0.0;
  for (const auto& l : f)
    for (double x : l.values()) s += x * x;
  return std::sqrt(s * cell);
}

/// ||inner - outer|| / ||outer||; NaN when the denominator vanishes.
inline double relative_error(const Field2D& inner, const Field2D& outer, Norm kind) {
  if (!inner.same_shape(outer)) throw Error("relative_error: shape mismatch");
  const double den = norm(outer, kind, 1.0);
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return norm(inner - outer, kind, 1.0) / den;
}

inline double relative_error(const std::vector<Field2D>& inner, const std::vector<Field2D>& outer,
                             Norm kind) {
  if (inner.size() != outer.size()) throw Error("relative_error: level count mismatch");
  std::vector<Field2D> diff;
  for (std::size_t l = 0; l < inner.size(); ++l) {
    if (!inner[l].same_shape(outer[l])) throw Error("relative_error: shape mismatch");
    diff.push_back(inner[l] - outer[l]);
  }
  const double den = norm(outer, kind, 1.0);
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return norm(diff, kind, 1.0) / den;
}

/// Mean over interior nodes of |D_x u + D_y v|.
inline double mean_abs_divergence(const Field2D& u, const Field2D& v, const Grid2D& g) {
  const Field2D d = divergence(u, v, g.dx, g.dy);
  double s = 0.0;
  for (int j = 1; j < g.J; ++j)
    for (int i = 1; i < g.I; ++i) s += std::abs(d(i, j));
  return s / (static_cast<double>(g.I - 1) * (g.J - 1));
}

inline double mean_abs_divergence(const ModalState& s) {
  return mean_abs_divergence(s.modes[0].u, s.modes[0].v, s.grid);
}

/// L2 and Linf of one variable on the slice and over the 3D lattice.
struct VariableNorms {
  double slice_l2 = 0, slice_linf = 0, volume_l2 = 0, volume_linf = 0;
};

struct NormSample {
  int step = 0;
  double time = 0.0;
  VariableNorms vars[5];  // indexed like kAllVariables
  double divergence = 0.0;
};

inline std::vector<double> slice_and_levels(double slice_depth, int levels, const PhysicalParams& p) {
  std::vector<double> z = uniform_levels(levels, p);
  z.push_back(slice_depth);
  return z;
}

inline NormSample sample_norms(const ModalState& s, int step, double time, double slice_depth,
                               int levels) {
  const auto z = slice_and_levels(slice_depth, levels, s.params);
  const PhysicalFields f = reconstruct_physical(s, z);
  const double cell = s.grid.dx * s.grid.dy;
  const double dz = s.params.depth / levels;
  NormSample out;
  out.step = step;
  out.time = time;
  for (std::size_t a = 0; a < 5; ++a) {
    const auto& all = f.get(kAllVariables[a]);
    const std::vector<Field2D> vol(all.begin(), all.end() - 1);
    out.vars[a] = {norm(all.back(), Norm::L2, cell), norm(all.back(), Norm::Linf, cell),
                   norm(vol, Norm::L2, cell * dz), norm(vol, Norm::Linf, cell)};
  }
  out.divergence = mean_abs_divergence(s);
  return out;
}

// ---------------------------------------------------------------------------
// Time loop

class BlowUpError : public Error {
 public:
  BlowUpError(int step, std::string variable)
      : Error("blow-up at step " + std::to_string(step) + " in " + variable),
        step_(step),
        variable_(std::move(variable)) {}
  int step() const { return step_; }
  const std::string& variable() const { return variable_; }

 private:
  int step_;
  std::string variable_;
};

inline void require_finite(const ModalState& s, int step) {
  for (const auto& m : s.modes) {
    const std::string n = "_" + std::to_string(m.n());
    if (!m.u.all_finite()) throw BlowUpError(step, "u" + n);
    if (!m.v.all_finite()) throw BlowUpError(step, "v" + n);
    if (!m.psi.all_finite()) throw BlowUpError(step, "psi" + n);
    if (!m.phi.all_finite()) throw BlowUpError(step, "phi" + n);
    if (!m.w.all_finite()) throw BlowUpError(step, "w" + n);
  }
}

struct RunOptions {
  int cadence = 100;
  int levels = 40;
  double slice_depth = -2500.0;
  std::optional<NodeRect> record_rect;
  /// Called after every completed step and once for k = 0.
  std::function<void(int, const ModalState&)> on_step;
  /// Called on sample steps (multiples of cadence, and the last step).
  std::function<void(int, const ModalState&)> on_sample;
};

struct Trajectory {
  ModalState final_state;
  std::vector<NormSample> samples;
  std::vector<double> divergence;  ///< mean absolute divergence per time index
  std::optional<TraceRecord> traces;
  StabilityDiagnostic stability;
  double max_poisson_residual = 0.0;
  double max_flux_shift = 0.0;
};

inline bool is_sample_step(int k, int K, int cadence) { return k % cadence == 0 || k == K; }

/**
 * @brief Advances `initial` through K steps.
 *
 * Per step: sources at level k, zero-mode step, mode steps for n = 1..N_max,
 * finiteness check, trace recording, metrics. Throws BlowUpError on the first
 * non-finite value.
 */
inline Trajectory run_simulation(const ModalState& initial, const TimeGrid& time,
                                 const BoundaryProvider& provider, const RunOptions& opt) {
  time.validate();
  if (opt.cadence < 1) throw Error("run_simulation: cadence must be >= 1");
  const double dt = time.dt();
  const Grid2D& g = initial.grid;
  const PhysicalParams& p = initial.params;
  if (provider.is_playback()) {
    const TraceRecord& r = *provider.record();
    if (!(r.inner_grid() == g)) throw Error("run_simulation: trace grid differs from run grid");
    if (r.dt() != dt) throw Error("run_simulation: trace time step differs from run time step");
    if (r.levels() < time.K + 1) throw Error("run_simulation: traces shorter than the run");
    if (static_cast<int>(r.modes().size()) != initial.n_max() + 1)
      throw Error("run_simulation: trace mode count differs from run");
  }

  Trajectory out;
  out.stability = stability_diagnostic(g, dt);
  ModalState s = initial;
  compute_diagnostics(s);
  require_finite(s, 0);
  const PressureProjector projector(g);

  if (opt.record_rect) {
    out.traces.emplace(g.restrict_to(*opt.record_rect), [&] {
      std::vector<ModeIndex> idx;
      for (const auto& m : s.modes) idx.push_back(m.index);
      return idx;
    }(), dt);
    record_traces(s, *opt.record_rect, 0, *out.traces);
  }
  out.divergence.push_back(mean_abs_divergence(s));
  if (opt.on_step) opt.on_step(0, s);
  out.samples.push_back(sample_norms(s, 0, 0.0, opt.slice_depth, opt.levels));
  if (opt.on_sample) opt.on_sample(0, s);

  std::vector<CharacteristicViewX> halves(s.modes.size());
  for (int k = 0; k < time.K; ++k) {
    const int next = k + 1;
    const SourceBundle src = assemble_sources(s, dt);
    const ZeroModeWork z0 =
        step_zero_mode(s.modes[0], src.G0x, src.G0y, provider.zero_mode(next, g), projector, dt, p);
    out.max_poisson_residual = std::max(out.max_poisson_residual, z0.residual);
    out.max_flux_shift = std::max(out.max_flux_shift, std::abs(z0.flux_shift));
    for (int n = 1; n <= s.n_max(); ++n) {
      ModeField& m = s.modes[n];
      ModeStepResult r = step_mode(m, src.S1[n], src.S2[n], src.S3[n],
                                   provider.x_inflow(next, m.index, g),
                                   provider.y_inflow(next, m.index, g), g, dt, p);
      halves[n] = std::move(r.half);
    }
    require_finite(s, next);
    if (opt.record_rect) record_traces(s, halves, *opt.record_rect, next, *out.traces);
    out.divergence.push_back(mean_abs_divergence(s));
    if (opt.on_step) opt.on_step(next, s);
    if (is_sample_step(next, time.K, opt.cadence)) {
      out.samples.push_back(sample_norms(s, next, next * dt, opt.slice_depth, opt.levels));
      if (opt.on_sample) opt.on_sample(next, s);
    }
  }
  out.final_state = std::move(s);
  return out;
}

inline RunOptions options_from(const RunConfig& cfg) {
  RunOptions o;
  o.cadence = cfg.cadence;
  o.levels = cfg.levels;
  o.slice_depth = cfg.slice_depth;
  return o;
}

// ---------------------------------------------------------------------------
// Comparison

struct VariableComparison {
  double outer_l2 = 0, inner_l2 = 0, rel_l2 = 0;
  double outer_linf = 0, inner_linf = 0, rel_linf = 0;
  bool flagged = false;  ///< a denominator was zero
};

struct ComparisonSample {
  int step = 0;
  double time = 0.0;
  VariableComparison slice[5], volume[5];  // indexed like kAllVariables
  double div_outer = 0, div_inner_direct = 0, div_inner_nested = 0;
};

/// Relative errors use the outer field restricted to the inner domain as denominator.
struct ComparisonReport {
  std::vector<ComparisonSample> samples;
  std::vector<double> div_outer, div_inner_direct, div_inner_nested;  ///< per time index
};

/**
 * @brief Compares an inner state with the outer state restricted to the
 *        same nodes, on the slice and over the 3D lattice.
 */
inline ComparisonSample compare_states(const ModalState& outer_restricted, const ModalState& inner,
                                       int step, double time, double slice_depth, int levels) {
  if (!(outer_restricted.grid == inner.grid)) throw Error("compare_states: grids differ");
  const auto z = slice_and_levels(slice_depth, levels, inner.params);
  const PhysicalFields fo = reconstruct_physical(outer_restricted, z);
  const PhysicalFields fi = reconstruct_physical(inner, z);
  const double cell = inner.grid.dx * inner.grid.dy;
  const double dz = inner.params.depth / levels;
  ComparisonSample out;
  out.step = step;
  out.time = time;
  for (std::size_t a = 0; a < 5; ++a) {
    const auto& o = fo.get(kAllVariables[a]);
    const auto& i = fi.get(kAllVariables[a]);
    VariableComparison& sl = out.slice[a];
    sl.outer_l2 = norm(o.back(), Norm::L2, cell);
    sl.inner_l2 = norm(i.back(), Norm::L2, cell);
    sl.rel_l2 = relative_error(i.back(), o.back(), Norm::L2);
    sl.outer_linf = norm(o.back(), Norm::Linf, cell);
    sl.inner_linf = norm(i.back(), Norm::Linf, cell);
    sl.rel_linf = relative_error(i.back(), o.back(), Norm::Linf);
    sl.flagged = std::isnan(sl.rel_l2) || std::isnan(sl.rel_linf);

    const std::vector<Field2D> ov(o.begin(), o.end() - 1), iv(i.begin(), i.end() - 1);
    VariableComparison& vo = out.volume[a];
    vo.outer_l2 = norm(ov, Norm::L2, cell * dz);
    vo.inner_l2 = norm(iv, Norm::L2, cell * dz);
    vo.rel_l2 = relative_error(iv, ov, Norm::L2);
    vo.outer_linf = norm(ov, Norm::Linf, cell);
    vo.inner_linf = norm(iv, Norm::Linf, cell);
    vo.rel_linf = relative_error(iv, ov, Norm::Linf);
    vo.flagged = std::isnan(vo.rel_l2) || std::isnan(vo.rel_linf);
  }
  out.div_inner_direct = mean_abs_divergence(outer_restricted);
  out.div_inner_nested = mean_abs_divergence(inner);
  return out;
}

struct NestedResult {
  Trajectory outer, inner;
  ComparisonReport report;
};

struct NestedHooks {
  std::function<void(int, const ModalState&)> outer_sample, inner_sample;
  std::function<void(int, const ModalState&)> outer_step, inner_step;
};

/**
 * @brief Outer run with homogeneous data recording traces on the inner
 *        rectangle, then the inner run driven by those traces, compared at
 *        every sample step.
 */
inline NestedResult run_nested_experiment(const RunConfig& cfg, const NestedHooks& hooks = {}) {
  cfg.validate();
  const Grid2D outer_grid = cfg.grid();
  const NodeRect rect = cfg.inner_rect();
  const Grid2D inner_grid = outer_grid.restrict_to(rect);

  NestedResult out;
  std::vector<std::pair<int, ModalState>> stored;
  RunOptions oo = options_from(cfg);
  oo.record_rect = rect;
  oo.on_step = [&](int k, const ModalState& s) {
    out.report.div_inner_direct.push_back(mean_abs_divergence(s.block(rect)));
    if (hooks.outer_step) hooks.outer_step(k, s);
  };
  oo.on_sample = [&](int k, const ModalState& s) {
    stored.emplace_back(k, s.block(rect));
    if (hooks.outer_sample) hooks.outer_sample(k, s);
  };
  out.outer = run_simulation(make_initial_state(cfg, outer_grid), cfg.time,
                             BoundaryProvider::homogeneous(), oo);
  out.report.div_outer = out.outer.divergence;

  const BoundaryProvider playback = BoundaryProvider::playback(*out.outer.traces);
  RunOptions io = options_from(cfg);
  io.on_step = hooks.inner_step;
  std::size_t next_sample = 0;
  io.on_sample = [&](int k, const ModalState& s) {
    if (next_sample >= stored.size() || stored[next_sample].first != k)
      throw Error("run_nested_experiment: sample steps of the two runs disagree");
    ComparisonSample c = compare_states(stored[next_sample].second, s, k, k * cfg.time.dt(),
                                        cfg.slice_depth, cfg.levels);
    c.div_outer = out.outer.divergence[static_cast<std::size_t>(k)];
    out.report.samples.push_back(c);
    ++next_sample;
    if (hooks.inner_sample) hooks.inner_sample(k, s);
  };
  out.inner = run_simulation(make_initial_state(cfg, inner_grid), cfg.time, playback, io);
  out.report.div_inner_nested = out.inner.divergence;
  return out;
}

}  // namespace pe3d
