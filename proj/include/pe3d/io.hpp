/**
 * @file io.hpp
 * @brief Config files, snapshot and trace files, CSV series, slices.
 *
 * Snapshot layout:
 *
 *   # pe3d-snapshot v1
 *   # field=<name> time=<float> I=<int> J=<int>
 *   # dx=<float> dy=<float>
 *   J+1 lines of I+1 space-separated values, row j from y = 0 upward
 *
 * Floats are written in shortest round-trip form, so read(write(x)) == x.
 * A trace series reuses the layout: one row per time index, dy = dt.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "pe3d/nesting.hpp"

namespace pe3d {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw Error("config: " + key + ": '" + text + "' is not a number");
  return v;
}

inline int parse_int(const std::string& text, const std::string& key) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw Error("config: " + key + ": '" + text + "' is not an integer");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace detail

/// Parses "i0,i1,j0,j1" (node indices).
inline NodeRect parse_rect(const std::string& text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 4) throw Error("inner: expected x0,x1,y0,y1");
  return {detail::parse_int(parts[0], "inner"), detail::parse_int(parts[1], "inner"),
          detail::parse_int(parts[2], "inner"), detail::parse_int(parts[3], "inner")};
}

// ---------------------------------------------------------------------------
// Config

/**
 * @brief Parses key=value lines; '#' starts a comment. Unknown keys throw.
 *
 * Keys (SI units): L1, L2, H (m); U0 (m/s); f, N (1/s); T (s); I, J, K,
 * N_max, levels, cadence; inner = auto | i0,i1,j0,j1; initial = standard | zero;
 * boundary = homogeneous | playback; traces = directory; slice_depth (m).
 */
inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    auto num = [&] { return detail::parse_double(val, key); };
    auto integer = [&] { return detail::parse_int(val, key); };
    if (key == "L1") c.params.length_x = num();
    else if (key == "L2") c.params.length_y = num();
    else if (key == "H") c.params.depth = num();
    else if (key == "U0") c.params.U0_bar = num();
    else if (key == "f") c.params.coriolis = num();
    else if (key == "N") c.params.buoyancy = num();
    else if (key == "T") c.time.T = num();
    else if (key == "K") c.time.K = integer();
    else if (key == "I") c.I = integer();
    else if (key == "J") c.J = integer();
    else if (key == "N_max") c.n_max = integer();
    else if (key == "levels") c.levels = integer();
    else if (key == "cadence") c.cadence = integer();
    else if (key == "slice_depth") c.slice_depth = num();
    else if (key == "traces") c.traces = val;
    else if (key == "inner") c.inner = val == "auto" ? NodeRect{} : parse_rect(val);
    else if (key == "initial") {
      if (val == "standard") c.initial = InitialKind::standard;
      else if (val == "zero") c.initial = InitialKind::zero;
      else throw Error("config: initial: expected standard or zero, got '" + val + "'");
    } else if (key == "boundary") {
      if (val == "homogeneous") c.boundary = BoundaryKind::homogeneous;
      else if (val == "playback") c.boundary = BoundaryKind::playback;
      else throw Error("config: boundary: expected homogeneous or playback, got '" + val + "'");
    } else {
      throw Error("config: unknown key '" + key + "'");
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(std::string("config invalid: ") + e.what());
  }
  return c;
}

inline std::string render_config(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  o << "L1 = " << format_double(c.params.length_x) << "\n";
  o << "L2 = " << format_double(c.params.length_y) << "\n";
  o << "H = " << format_double(c.params.depth) << "\n";
  o << "U0 = " << format_double(c.params.U0_bar) << "\n";
  o << "f = " << format_double(c.params.coriolis) << "\n";
  o << "N = " << format_double(c.params.buoyancy) << "\n";
  o << "T = " << format_double(c.time.T) << "\n";
  o << "K = " << c.time.K << "\n";
  o << "I = " << c.I << "\n";
  o << "J = " << c.J << "\n";
  o << "N_max = " << c.n_max << "\n";
  o << "levels = " << c.levels << "\n";
  o << "cadence = " << c.cadence << "\n";
  o << "slice_depth = " << format_double(c.slice_depth) << "\n";
  if (c.inner == NodeRect{})
    o << "inner = auto\n";
  else
    o << "inner = " << c.inner.i0 << "," << c.inner.i1 << "," << c.inner.j0 << "," << c.inner.j1 << "\n";
  o << "initial = " << (c.initial == InitialKind::standard ? "standard" : "zero") << "\n";
  o << "boundary = " << (c.boundary == BoundaryKind::homogeneous ? "homogeneous" : "playback") << "\n";
  if (!c.traces.empty()) o << "traces = " << c.traces << "\n";
  return o.str();
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Snapshots

struct Snapshot {
  std::string field;
  double time = 0.0;
  double dx = 0.0, dy = 0.0;
  Field2D data;

  int I() const { return data.nx() - 1; }
  int J() const { return data.ny() - 1; }
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

inline std::string format_snapshot(const Snapshot& s) {
  using detail::format_double;
  if (!s.data.all_finite()) throw Error("write_snapshot: non-finite value in " + s.field);
  if (s.field.find_first_of(" \n") != std::string::npos)
    throw Error("write_snapshot: field name must not contain whitespace");
  std::string out;
  out.reserve(static_cast<std::size_t>(s.data.nx()) * s.data.ny() * 24 + 128);
  out += "# pe3d-snapshot v1\n";
  out += "# field=" + s.field + " time=" + format_double(s.time) + " I=" + std::to_string(s.I()) +
         " J=" + std::to_string(s.J()) + "\n";
  out += "# dx=" + format_double(s.dx) + " dy=" + format_double(s.dy) + "\n";
  char buf[64];
  for (int j = 0; j < s.data.ny(); ++j) {
    auto row = s.data.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[i]);
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

inline Snapshot parse_snapshot(const std::string& text, const std::string& origin = "snapshot") {
  std::istringstream in(text);
  std::string l1, l2, l3;
  if (!std::getline(in, l1) || !std::getline(in, l2) || !std::getline(in, l3))
    throw Error(origin + ": malformed header (need 3 lines)");
  if (l1 != "# pe3d-snapshot v1") throw Error(origin + ": malformed header (magic line)");
  auto fields = [&](const std::string& line) {
    if (line.rfind("# ", 0) != 0) throw Error(origin + ": malformed header line");
    std::map<std::string, std::string> kv;
    std::istringstream ls(line.substr(2));
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw Error(origin + ": malformed header token '" + tok + "'");
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
  };
  auto h2 = fields(l2), h3 = fields(l3);
  for (const char* k : {"field", "time", "I", "J"})
    if (!h2.count(k)) throw Error(origin + ": header misses " + k);
  for (const char* k : {"dx", "dy"})
    if (!h3.count(k)) throw Error(origin + ": header misses " + k);
  Snapshot s;
  s.field = h2["field"];
  s.time = detail::parse_double(h2["time"], "time");
  const int I = detail::parse_int(h2["I"], "I"), J = detail::parse_int(h2["J"], "J");
  s.dx = detail::parse_double(h3["dx"], "dx");
  s.dy = detail::parse_double(h3["dy"], "dy");
  if (I < 0 || J < 0) throw Error(origin + ": negative shape");
  s.data = Field2D(I + 1, J + 1);
  std::string line;
  for (int j = 0; j <= J; ++j) {
    if (!std::getline(in, line)) throw Error(origin + ": shape error, expected " + std::to_string(J + 1) + " rows");
    const char* p = line.data();
    const char* end = p + line.size();
    int i = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p >= end) break;
      if (i > I) throw Error(origin + ": shape error in row " + std::to_string(j) + ", expected " + std::to_string(I + 1) + " values");
      double v = 0.0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw Error(origin + ": bad number in row " + std::to_string(j));
      s.data(i++, j) = v;
      p = q;
    }
    if (i != I + 1)
      throw Error(origin + ": shape error in row " + std::to_string(j) + ", expected " +
                  std::to_string(I + 1) + " values");
  }
  while (std::getline(in, line))
    if (!detail::trim(line).empty()) throw Error(origin + ": shape error, extra rows");
  return s;
}

inline void write_snapshot(const Snapshot& s, const std::filesystem::path& path) {
  write_text(path, format_snapshot(s));
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  return parse_snapshot(read_text(path), path.string());
}

// ---------------------------------------------------------------------------
// Slices and modal states

/// Physical field of one variable at depth z (diagnostics recomputed on a copy).
inline Field2D extract_slice(const ModalState& s, double z, Variable var) {
  if (!(z >= -s.params.depth && z <= 0.0)) throw Error("extract_slice: z outside [-H, 0]");
  const double zs[] = {z};
  return reconstruct_physical(s, zs).get(var).front();
}

inline Field2D extract_slice(const ModalState& s, double z, const std::string& var) {
  return extract_slice(s, z, parse_variable(var));
}

/// Prognostic fields stored per mode: u, v, phi for n = 0; u, v, psi otherwise.
inline std::vector<Variable> stored_variables(int n) {
  if (n == 0) return {Variable::u, Variable::v, Variable::phi};
  return {Variable::u, Variable::v, Variable::psi};
}

inline Field2D& mode_variable(ModeField& m, Variable v) {
  switch (v) {
    case Variable::u: return m.u;
    case Variable::v: return m.v;
    case Variable::w: return m.w;
    case Variable::psi: return m.psi;
    case Variable::phi: return m.phi;
  }
  return m.u;
}

inline std::string step_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step%06d", k);
  return buf;
}

inline std::filesystem::path state_dir(const std::filesystem::path& root, int step) {
  return root / "modes" / step_name(step);
}

inline void write_state(const std::filesystem::path& root, const ModalState& s, int step, double time) {
  const auto dir = state_dir(root, step);
  for (int n = 0; n <= s.n_max(); ++n) {
    ModeField m = s.modes[n];
    for (Variable v : stored_variables(n)) {
      const std::string name = std::string(to_string(v)) + "_" + std::to_string(n);
      write_snapshot({name, time, s.grid.dx, s.grid.dy, mode_variable(m, v)}, dir / (name + ".txt"));
    }
  }
}

/// Reads a modal state written by write_state onto a state of the given shape.
inline ModalState read_state(const std::filesystem::path& root, int step, const PhysicalParams& p,
                             const Grid2D& g, int n_max) {
  ModalState s(p, g, n_max);
  const auto dir = state_dir(root, step);
  for (int n = 0; n <= n_max; ++n)
    for (Variable v : stored_variables(n)) {
      const std::string name = std::string(to_string(v)) + "_" + std::to_string(n);
      Snapshot snap = read_snapshot(dir / (name + ".txt"));
      if (snap.field != name) throw Error("read_state: field name mismatch in " + name);
      if (!snap.data.same_shape(g.zeros()) || snap.dx != g.dx || snap.dy != g.dy)
        throw Error("read_state: shape error in " + name);
      mode_variable(s.modes[n], v) = std::move(snap.data);
    }
  compute_diagnostics(s);
  return s;
}

inline std::vector<int> stored_steps(const std::filesystem::path& root) {
  std::vector<int> out;
  if (!std::filesystem::exists(root / "modes")) return out;
  for (const auto& e : std::filesystem::directory_iterator(root / "modes")) {
    const std::string name = e.path().filename().string();
    if (name.rfind("step", 0) == 0) out.push_back(detail::parse_int(name.substr(4), "step"));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Traces

inline std::string trace_field_name(int n, TraceVar var, Line line) {
  return "trace/" + std::to_string(n) + "/" + to_string(var) + "/" + to_string(line);
}

inline std::filesystem::path trace_file(const std::filesystem::path& dir, int n, TraceVar var, Line line) {
  return dir / ("trace_" + std::to_string(n) + "_" + to_string(var) + "_" + to_string(line) + ".txt");
}

inline void write_traces(const TraceRecord& r, const std::filesystem::path& dir) {
  const Grid2D& g = r.inner_grid();
  for (const auto& [key, series] : r.series()) {
    const auto [n, var, line] = key;
    const int len = line_length(g, line);
    Snapshot s;
    s.field = trace_field_name(n, var, line);
    s.time = (static_cast<int>(series.size()) - 1) * r.dt();
    s.dx = (line == Line::west || line == Line::east) ? g.dy : g.dx;
    s.dy = r.dt();
    s.data = Field2D(len, static_cast<int>(series.size()));
    for (std::size_t k = 0; k < series.size(); ++k)
      std::copy(series[k].begin(), series[k].end(), s.data.row(static_cast<int>(k)).begin());
    write_snapshot(s, trace_file(dir, n, var, line));
  }
}

inline TraceRecord read_traces(const std::filesystem::path& dir, const Grid2D& inner,
                               const std::vector<ModeIndex>& modes, double dt) {
  TraceRecord r(inner, modes, dt);
  for (int n = 0; n < static_cast<int>(modes.size()); ++n)
    for (const TraceKey& key : trace_keys(modes[n].kind)) {
      const Snapshot s = read_snapshot(trace_file(dir, n, key.var, key.line));
      if (s.field != trace_field_name(n, key.var, key.line))
        throw Error("read_traces: field name mismatch in " + s.field);
      if (s.dy != dt) throw Error("read_traces: time step differs in " + s.field);
      TraceRecord::Series series;
      for (int k = 0; k < s.data.ny(); ++k) {
        auto row = s.data.row(k);
        series.emplace_back(row.begin(), row.end());
      }
      r.set_series(n, key.var, key.line, std::move(series));
    }
  r.validate_complete();
  return r;
}

// ---------------------------------------------------------------------------
// CSV series

struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string format_series(const SeriesTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  char buf[40];
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw Error("write_series: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void write_series(const SeriesTable& t, const std::filesystem::path& path) {
  write_text(path, format_series(t));
}

/// Columns: step, time, then for u, v, w, psi, phi the slice l2/linf and
/// volume l2/linf, then mean_abs_divergence.
inline SeriesTable norm_table(const std::vector<NormSample>& samples) {
  SeriesTable t;
  t.columns = {"step", "time"};
  for (Variable v : kAllVariables)
    for (const char* s : {"slice_l2", "slice_linf", "vol_l2", "vol_linf"})
      t.columns.push_back(std::string(to_string(v)) + "_" + s);
  t.columns.push_back("mean_abs_divergence");
  for (const auto& s : samples) {
    std::vector<double> row{static_cast<double>(s.step), s.time};
    for (const auto& v : s.vars) {
      row.push_back(v.slice_l2);
      row.push_back(v.slice_linf);
      row.push_back(v.volume_l2);
      row.push_back(v.volume_linf);
    }
    row.push_back(s.divergence);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Columns: step, time, then per variable and per reading (slice, vol) the
/// outer l2, inner l2, relerr l2, outer linf, inner linf, relerr linf, then
/// the three mean absolute divergences. Relative errors are taken against
/// the outer field restricted to the inner domain; NaN marks a zero
/// denominator.
inline SeriesTable report_table(const ComparisonReport& r) {
  SeriesTable t;
  t.columns = {"step", "time"};
  for (const char* reading : {"slice", "vol"})
    for (Variable v : kAllVariables)
      for (const char* s : {"outer_l2", "inner_l2", "relerr_l2", "outer_linf", "inner_linf", "relerr_linf"})
        t.columns.push_back(std::string(reading) + "_" + to_string(v) + "_" + s);
  for (const char* s : {"div_outer", "div_inner_direct", "div_inner_nested"}) t.columns.push_back(s);
  for (const auto& s : r.samples) {
    std::vector<double> row{static_cast<double>(s.step), s.time};
    for (const auto* block : {s.slice, s.volume})
      for (std::size_t a = 0; a < 5; ++a) {
        const VariableComparison& c = block[a];
        row.insert(row.end(), {c.outer_l2, c.inner_l2, c.rel_l2, c.outer_linf, c.inner_linf, c.rel_linf});
      }
    row.insert(row.end(), {s.div_outer, s.div_inner_direct, s.div_inner_nested});
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Per time index: outer, inner-direct and inner-nested mean absolute divergence.
inline SeriesTable divergence_table(const ComparisonReport& r, double dt) {
  SeriesTable t;
  t.columns = {"step", "time", "div_outer", "div_inner_direct", "div_inner_nested"};
  const std::size_t n = std::min({r.div_outer.size(), r.div_inner_direct.size(), r.div_inner_nested.size()});
  for (std::size_t k = 0; k < n; ++k)
    t.rows.push_back({static_cast<double>(k), k * dt, r.div_outer[k], r.div_inner_direct[k],
                      r.div_inner_nested[k]});
  return t;
}

inline SeriesTable divergence_table(const std::vector<double>& div, double dt) {
  SeriesTable t;
  t.columns = {"step", "time", "mean_abs_divergence"};
  for (std::size_t k = 0; k < div.size(); ++k) t.rows.push_back({static_cast<double>(k), k * dt, div[k]});
  return t;
}

// ---------------------------------------------------------------------------
// Run directories

/// Writes slices/<var>_stepNNNNNN.txt for every variable at depth z.
inline void write_slices(const std::filesystem::path& dir, const ModalState& s, int k, double time, double z) {
  const double zs[] = {z};
  const PhysicalFields f = reconstruct_physical(s, zs);
  for (Variable v : kAllVariables) {
    const std::string name = to_string(v);
    write_snapshot({name, time, s.grid.dx, s.grid.dy, f.get(v).front()},
                   dir / "slices" / (name + "_" + step_name(k) + ".txt"));
  }
}

/// Sample observer: slices at every sample, modal states at steps 0 and K.
inline std::function<void(int, const ModalState&)> artifact_writer(const std::filesystem::path& dir,
                                                                   const RunConfig& c) {
  return [dir, c](int k, const ModalState& s) {
    const double t = k * c.time.dt();
    write_slices(dir, s, k, t, c.slice_depth);
    if (k == 0 || k == c.time.K) write_state(dir, s, k, t);
  };
}

/// config.txt, series.csv and divergence.csv of a finished run.
inline void write_run_outputs(const std::filesystem::path& dir, const RunConfig& c, const Trajectory& tr) {
  write_text(dir / "config.txt", render_config(c));
  write_series(norm_table(tr.samples), dir / "series.csv");
  write_series(divergence_table(tr.divergence, c.time.dt()), dir / "divergence.csv");
}

}  // namespace pe3d
