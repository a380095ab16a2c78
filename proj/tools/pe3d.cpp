// pe3d command-line driver: run, nest, compare, modes, slice.
//
// Exit status: 0 success, 1 failure, 2 usage error, 3 blow-up.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pe3d/pe3d.hpp"

namespace fs = std::filesystem;
using namespace pe3d;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBlowUp = 3;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<int> cadence;
  std::string inner;
};

RunConfig load_config(const CommonArgs& a) {
  RunConfig c = a.config.empty() ? parse_config("") : parse_config(read_text(a.config));
  if (a.cadence) c.cadence = *a.cadence;
  if (!a.inner.empty()) c.inner = parse_rect(a.inner);
  c.validate();
  return c;
}

void report_stability(const Trajectory& tr) {
  std::cout << "stability: dt/(dx^2+dy^2)^2 = " << tr.stability.ratio
            << ", dt <= 1/8: " << (tr.stability.dt_below_eighth ? "yes" : "no")
            << "; max Poisson residual " << tr.max_poisson_residual << "\n";
}

int cmd_modes(const CommonArgs& a) {
  const RunConfig c = load_config(a);
  const PhysicalParams& p = c.params;
  std::printf("H*N/(pi*U0) = %.6f\n", p.critical_ratio());
  std::printf("%3s %14s %14s %14s %14s  %s\n", "n", "lambda", "N/lambda", "U0+N/lambda",
              "U0-N/lambda", "kind");
  std::printf("%3d %14s %14s %14s %14s  %s\n", 0, "-", "-", "-", "-", "zero");
  for (int n = 1; n <= c.n_max; ++n) {
    const double cn = wave_speed(n, p);
    std::printf("%3d %14.6e %14.6f %14.6f %14.6f  %s\n", n, eigen_lambda(n, p), cn, p.U0_bar + cn,
                p.U0_bar - cn, to_string(classify_mode(n, p).kind));
  }
  return 0;
}

int cmd_run(const CommonArgs& a) {
  if (a.out.empty()) throw CLI::ValidationError("--out", "run requires --out");
  const RunConfig c = load_config(a);
  const fs::path dir = a.out;
  const Grid2D g = c.run_grid();
  std::optional<TraceRecord> traces;
  BoundaryProvider provider = BoundaryProvider::homogeneous();
  if (c.boundary == BoundaryKind::playback) {
    std::vector<ModeIndex> modes;
    for (int n = 0; n <= c.n_max; ++n) modes.push_back(classify_mode(n, c.params));
    traces = read_traces(c.traces, g, modes, c.time.dt());
    provider = BoundaryProvider::playback(*traces);
  }
  RunOptions o = options_from(c);
  o.on_sample = artifact_writer(dir, c);
  const Trajectory tr = run_simulation(make_initial_state(c, g), c.time, provider, o);
  write_run_outputs(dir, c, tr);
  report_stability(tr);
  std::cout << "run complete: " << c.time.K << " steps, artifacts in " << dir.string() << "\n";
  return 0;
}

int cmd_nest(const CommonArgs& a) {
  if (a.out.empty()) throw CLI::ValidationError("--out", "nest requires --out");
  RunConfig c = load_config(a);
  c.boundary = BoundaryKind::homogeneous;
  c.traces.clear();
  const fs::path dir = a.out;
  NestedHooks hooks;
  hooks.outer_sample = artifact_writer(dir / "outer", c);
  RunConfig inner_cfg = c;
  inner_cfg.boundary = BoundaryKind::playback;
  inner_cfg.inner = c.inner_rect();
  inner_cfg.traces = fs::absolute(dir / "outer" / "traces").lexically_normal().string();
  hooks.inner_sample = artifact_writer(dir / "inner", inner_cfg);

  const NestedResult r = run_nested_experiment(c, hooks);
  write_run_outputs(dir / "outer", c, r.outer);
  write_traces(*r.outer.traces, dir / "outer" / "traces");
  write_run_outputs(dir / "inner", inner_cfg, r.inner);
  write_series(report_table(r.report), dir / "report.csv");
  write_series(divergence_table(r.report, c.time.dt()), dir / "divergence.csv");
  report_stability(r.outer);

  const ComparisonSample& last = r.report.samples.back();
  std::printf("relative errors at step %d (slice z=%g, then 3D), L2 / Linf:\n", last.step, c.slice_depth);
  for (std::size_t v = 0; v < 5; ++v)
    std::printf("  %-4s %.4e / %.4e    %.4e / %.4e\n", to_string(kAllVariables[v]), last.slice[v].rel_l2,
                last.slice[v].rel_linf, last.volume[v].rel_l2, last.volume[v].rel_linf);
  std::cout << "nest complete, artifacts in " << dir.string() << "\n";
  return 0;
}

int cmd_compare(const std::string& outer_dir, const std::string& inner_dir, const CommonArgs& a) {
  const RunConfig oc = parse_config(read_text(fs::path(outer_dir) / "config.txt"));
  const RunConfig ic = parse_config(read_text(fs::path(inner_dir) / "config.txt"));
  if (!(oc.params == ic.params) || oc.n_max != ic.n_max || !(oc.time == ic.time))
    throw Error("compare: outer and inner configurations differ");
  const NodeRect rect = ic.inner_rect();
  const Grid2D og = oc.run_grid();
  const Grid2D ig = og.restrict_to(rect);
  ComparisonReport report;
  for (int k : stored_steps(inner_dir)) {
    const ModalState inner = read_state(inner_dir, k, ic.params, ig, ic.n_max);
    const ModalState outer = read_state(outer_dir, k, oc.params, og, oc.n_max);
    ComparisonSample s = compare_states(outer.block(rect), inner, k, k * ic.time.dt(), ic.slice_depth, ic.levels);
    s.div_outer = mean_abs_divergence(outer);
    report.samples.push_back(s);
  }
  if (report.samples.empty()) throw Error("compare: no common stored steps");
  const std::string text = format_series(report_table(report));
  if (a.out.empty())
    std::cout << text;
  else
    write_text(fs::path(a.out) / "report.csv", text);
  return 0;
}

int cmd_slice(const CommonArgs& a, std::optional<double> depth, const std::string& from, int step,
              const std::string& var) {
  if (a.out.empty()) throw CLI::ValidationError("--out", "slice requires --out");
  RunConfig c = from.empty() ? load_config(a) : parse_config(read_text(fs::path(from) / "config.txt"));
  const double z = depth.value_or(c.slice_depth);
  const Grid2D g = c.run_grid();
  const ModalState s =
      from.empty() ? make_initial_state(c, g) : read_state(from, step, c.params, g, c.n_max);
  const std::vector<Variable> vars =
      var.empty() ? std::vector<Variable>(std::begin(kAllVariables), std::end(kAllVariables))
                  : std::vector<Variable>{parse_variable(var)};
  for (Variable v : vars) {
    const fs::path path = fs::path(a.out) / (std::string(to_string(v)) + "_" + step_name(step) + ".txt");
    write_snapshot({to_string(v), step * c.time.dt(), g.dx, g.dy, extract_slice(s, z, v)}, path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pe3d: primitive equations by vertical normal modes, with one-way nesting"};
  app.require_subcommand(1);
  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory");
  };

  auto* modes = app.add_subcommand("modes", "print lambda_n, speeds and classification");
  add_common(modes);

  auto* run = app.add_subcommand("run", "single simulation");
  add_common(run);
  run->add_option("--cadence", args.cadence, "sample every INT steps")->check(CLI::PositiveNumber);

  auto* nest = app.add_subcommand("nest", "outer run, inner run driven by traces, comparison");
  add_common(nest);
  nest->add_option("--cadence", args.cadence, "sample every INT steps")->check(CLI::PositiveNumber);
  nest->add_option("--inner", args.inner, "inner rectangle x0,x1,y0,y1 in node indices");

  std::string outer_dir, inner_dir;
  auto* compare = app.add_subcommand("compare", "recompute the report from two run directories");
  compare->add_option("outer", outer_dir, "outer run directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("inner", inner_dir, "inner run directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--out", args.out, "directory for report.csv (stdout if absent)");

  std::optional<double> depth;
  std::string from, var;
  int step = 0;
  auto* slice = app.add_subcommand("slice", "write physical fields at one depth");
  add_common(slice);
  slice->add_option("--depth", depth, "depth z in m (negative)");
  slice->add_option("--from", from, "run directory to read the modal state from");
  slice->add_option("--step", step, "stored step to read (with --from)");
  slice->add_option("--var", var, "u, v, w, psi or phi (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*modes) return cmd_modes(args);
    if (*run) return cmd_run(args);
    if (*nest) return cmd_nest(args);
    if (*compare) return cmd_compare(outer_dir, inner_dir, args);
    if (*slice) return cmd_slice(args, depth, from, step, var);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "pe3d: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowUpError& e) {
    std::cerr << "pe3d: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "pe3d: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
