/**
 * @file boundary.hpp
 * @brief Boundary data for both solvers: homogeneous values for a run on the
 *        full domain, or values replayed from traces recorded along an inner
 *        rectangle of an earlier run.
 *
 * Recorded keys per mode:
 *   n = 0          u on west, east; v on west, south, north
 *   subcritical    xi, v on west; eta on east; alpha on north; beta on south
 *   supercritical  xi, v, eta on west; alpha on north; beta on south
 *
 * Time index k holds the values the recording run produced at level k. For
 * xi, v and eta of a baroclinic mode these are taken after the x-substep,
 * which is the state the x-sweep boundary actually acts on; everything else
 * is taken from the completed step.
 */
#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "pe3d/baroclinic_solver.hpp"
#include "pe3d/zero_mode_solver.hpp"

namespace pe3d {

enum class Line { west, east, south, north };
enum class TraceVar { u, v, xi, eta, alpha, beta };

inline const char* to_string(Line l) {
  switch (l) {
    case Line::west: return "west";
    case Line::east: return "east";
    case Line::south: return "south";
    case Line::north: return "north";
  }
  return "?";
}

inline const char* to_string(TraceVar v) {
  switch (v) {
    case TraceVar::u: return "u";
    case TraceVar::v: return "v";
    case TraceVar::xi: return "xi";
    case TraceVar::eta: return "eta";
    case TraceVar::alpha: return "alpha";
    case TraceVar::beta: return "beta";
  }
  return "?";
}

inline Line parse_line(const std::string& s) {
  for (Line l : {Line::west, Line::east, Line::south, Line::north})
    if (s == to_string(l)) return l;
  throw Error("unknown boundary line '" + s + "'");
}

inline TraceVar parse_trace_var(const std::string& s) {
  for (TraceVar v : {TraceVar::u, TraceVar::v, TraceVar::xi, TraceVar::eta, TraceVar::alpha,
                     TraceVar::beta})
    if (s == to_string(v)) return v;
  throw Error("unknown trace variable '" + s + "'");
}

struct TraceKey {
  TraceVar var;
  Line line;
  friend auto operator<=>(const TraceKey&, const TraceKey&) = default;
};

/// The (variable, line) pairs a mode of the given kind needs.
inline std::vector<TraceKey> trace_keys(ModeKind kind) {
  using enum TraceVar;
  switch (kind) {
    case ModeKind::zero:
      return {{u, Line::west}, {u, Line::east}, {v, Line::west}, {v, Line::south}, {v, Line::north}};
    case ModeKind::subcritical:
      return {{xi, Line::west}, {v, Line::west}, {eta, Line::east}, {alpha, Line::north},
              {beta, Line::south}};
    case ModeKind::supercritical:
      return {{xi, Line::west}, {v, Line::west}, {eta, Line::west}, {alpha, Line::north},
              {beta, Line::south}};
  }
  return {};
}

/// Number of nodes along a line of a grid.
inline int line_length(const Grid2D& g, Line l) {
  return (l == Line::west || l == Line::east) ? g.ny() : g.nx();
}

/// Values of a field on the edge of a node rectangle.
inline std::vector<double> extract_line(const Field2D& f, const NodeRect& r, Line l) {
  std::vector<double> out;
  switch (l) {
    case Line::west:
    case Line::east: {
      const int i = l == Line::west ? r.i0 : r.i1;
      for (int j = r.j0; j <= r.j1; ++j) out.push_back(f(i, j));
      break;
    }
    case Line::south:
    case Line::north: {
      const int j = l == Line::south ? r.j0 : r.j1;
      for (int i = r.i0; i <= r.i1; ++i) out.push_back(f(i, j));
      break;
    }
  }
  return out;
}

/**
 * @brief Time-indexed boundary values along an inner rectangle.
 *
 * Storage is per (mode, variable, line) with one array per time index.
 */
class TraceRecord {
 public:
  using Series = std::vector<std::vector<double>>;
  using Key = std::tuple<int, TraceVar, Line>;

  TraceRecord() = default;
  TraceRecord(const Grid2D& inner, std::vector<ModeIndex> modes, double dt)
      : inner_(inner), modes_(std::move(modes)), dt_(dt) {
    inner_.validate();
    if (!(dt > 0.0)) throw Error("TraceRecord: dt must be positive");
  }

  const Grid2D& inner_grid() const { return inner_; }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  double dt() const { return dt_; }
  const std::map<Key, Series>& series() const { return data_; }

  /// Number of recorded time levels (dense from 0).
  int levels() const { return data_.empty() ? 0 : static_cast<int>(data_.begin()->second.size()); }

  /// Appends the values of time index k; k must equal the current level count.
  void append(int k, int n, TraceVar var, Line line, std::vector<double> values) {
    if (n < 0 || n >= static_cast<int>(modes_.size())) throw Error("TraceRecord: mode out of range");
    if (static_cast<int>(values.size()) != line_length(inner_, line))
      throw Error("TraceRecord: array length does not match the inner edge");
    const auto keys = trace_keys(modes_[n].kind);
    if (std::find(keys.begin(), keys.end(), TraceKey{var, line}) == keys.end())
      throw Error(std::string("TraceRecord: ") + to_string(var) + "/" + to_string(line) +
                  " is not recorded for mode " + std::to_string(n));
    Series& s = data_[{n, var, line}];
    if (static_cast<int>(s.size()) != k)
      throw Error("TraceRecord: time index " + std::to_string(k) + " out of sequence");
    s.push_back(std::move(values));
  }

  /// Stored array for (k, n, var, line); throws when absent.
  const std::vector<double>& at(int k, int n, TraceVar var, Line line) const {
    auto it = data_.find({n, var, line});
    if (it == data_.end() || k < 0 || k >= static_cast<int>(it->second.size()))
      throw Error("missing trace entry: k=" + std::to_string(k) + " n=" + std::to_string(n) + " " +
                  to_string(var) + "/" + to_string(line));
    return it->second[k];
  }

  /// Installs a whole series (used when reading trace files).
  void set_series(int n, TraceVar var, Line line, Series s) {
    for (const auto& a : s)
      if (static_cast<int>(a.size()) != line_length(inner_, line))
        throw Error("TraceRecord: array length does not match the inner edge");
    data_[{n, var, line}] = std::move(s);
  }

  /// Every key of every mode is present with the same number of levels.
  void validate_complete() const {
    const int lv = levels();
    for (int n = 0; n < static_cast<int>(modes_.size()); ++n)
      for (const TraceKey& key : trace_keys(modes_[n].kind)) {
        auto it = data_.find({n, key.var, key.line});
        if (it == data_.end() || static_cast<int>(it->second.size()) != lv)
          throw Error("TraceRecord: incomplete series for mode " + std::to_string(n) + " " +
                      to_string(key.var) + "/" + to_string(key.line));
      }
    if (data_.size() != static_cast<std::size_t>(modes_.size() * 5))
      throw Error("TraceRecord: unexpected keys present");
  }

 private:
  Grid2D inner_;
  std::vector<ModeIndex> modes_;
  double dt_ = 0.0;
  std::map<Key, Series> data_;
};

inline void require_aligned(const Grid2D& outer, const NodeRect& r) {
  if (r.i0 <= 0 || r.j0 <= 0 || r.i1 >= outer.I || r.j1 >= outer.J || r.i1 - r.i0 < 4 ||
      r.j1 - r.j0 < 4)
    throw Error("inner rectangle must lie strictly inside the grid on node lines");
}

/**
 * @brief Records time index k for every mode.
 *
 * `x_views[n]` supplies xi, v, eta of mode n >= 1; alpha, beta and the zero
 * mode come from `state`.
 */
inline void record_traces(const ModalState& state, const std::vector<CharacteristicViewX>& x_views,
                          const NodeRect& rect, int k, TraceRecord& record) {
  require_aligned(state.grid, rect);
  if (static_cast<int>(x_views.size()) != state.n_max() + 1)
    throw Error("record_traces: one characteristic view per mode required");
  if (static_cast<int>(record.modes().size()) != state.n_max() + 1)
    throw Error("record_traces: record mode count differs from state");
  const PhysicalParams& p = state.params;
  for (int n = 0; n <= state.n_max(); ++n) {
    const ModeField& m = state.modes[n];
    if (n == 0) {
      for (const TraceKey& key : trace_keys(ModeKind::zero))
        record.append(k, n, key.var, key.line,
                      extract_line(key.var == TraceVar::u ? m.u : m.v, rect, key.line));
      continue;
    }
    const CharacteristicViewX& xv = x_views[n];
    const CharacteristicViewY yv = to_characteristics_y(m, p);
    for (const TraceKey& key : trace_keys(m.index.kind)) {
      const Field2D* src = nullptr;
      switch (key.var) {
        case TraceVar::xi: src = &xv.xi; break;
        case TraceVar::v: src = &xv.v; break;
        case TraceVar::eta: src = &xv.eta; break;
        case TraceVar::alpha: src = &yv.alpha; break;
        case TraceVar::beta: src = &yv.beta; break;
        case TraceVar::u: throw Error("record_traces: u is not a baroclinic trace");
      }
      record.append(k, n, key.var, key.line, extract_line(*src, rect, key.line));
    }
  }
}

/// Single-state form: xi, v, eta are the characteristic values of the state itself.
inline void record_traces(const ModalState& state, const NodeRect& rect, int k, TraceRecord& record) {
  std::vector<CharacteristicViewX> views(state.modes.size());
  for (int n = 1; n <= state.n_max(); ++n) views[n] = to_characteristics_x(state.modes[n], state.params);
  record_traces(state, views, rect, k, record);
}

/// Source of boundary arrays: zeros, or playback of a TraceRecord.
class BoundaryProvider {
 public:
  static BoundaryProvider homogeneous() { return BoundaryProvider(); }
  static BoundaryProvider playback(const TraceRecord& record) { return BoundaryProvider(&record); }

  bool is_playback() const { return record_ != nullptr; }
  const TraceRecord* record() const { return record_; }

  std::vector<double> provide(int k, int n, TraceVar var, Line line, int length) const {
    if (!record_) return std::vector<double>(static_cast<std::size_t>(length), 0.0);
    const auto& v = record_->at(k, n, var, line);
    if (static_cast<int>(v.size()) != length)
      throw Error("BoundaryProvider: stored trace length does not match grid");
    return v;
  }

  /// Zero-mode data of the step that produces level k. East v is left free.
  ZeroModeBoundary zero_mode(int k, const Grid2D& g) const {
    ZeroModeBoundary bc;
    bc.normal.west = provide(k, 0, TraceVar::u, Line::west, g.ny());
    bc.normal.east = provide(k, 0, TraceVar::u, Line::east, g.ny());
    bc.normal.south = provide(k, 0, TraceVar::v, Line::south, g.nx());
    bc.normal.north = provide(k, 0, TraceVar::v, Line::north, g.nx());
    bc.inflow_u = bc.normal.west;
    bc.inflow_v = provide(k, 0, TraceVar::v, Line::west, g.ny());
    return bc;
  }

  XInflow x_inflow(int k, ModeIndex mode, const Grid2D& g) const {
    const Line eta_line = mode.kind == ModeKind::subcritical ? Line::east : Line::west;
    return {provide(k, mode.n, TraceVar::xi, Line::west, g.ny()),
            provide(k, mode.n, TraceVar::v, Line::west, g.ny()),
            provide(k, mode.n, TraceVar::eta, eta_line, g.ny())};
  }

  YInflow y_inflow(int k, ModeIndex mode, const Grid2D& g) const {
    return {provide(k, mode.n, TraceVar::alpha, Line::north, g.nx()),
            provide(k, mode.n, TraceVar::beta, Line::south, g.nx())};
  }

 private:
  BoundaryProvider() = default;
  explicit BoundaryProvider(const TraceRecord* r) : record_(r) {}
  const TraceRecord* record_ = nullptr;
};

}  // namespace pe3d
