#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "test_support.hpp"

using namespace pe3d;
using pe3d::testing::random_field;
using pe3d::testing::small_grid;

namespace {

const PhysicalParams kParams;

/// Reduced experiment: same dt as the full one, coarser grid, fewer steps.
RunConfig desk_config() {
  RunConfig c;
  c.I = 100;
  c.J = 50;
  c.time = {400, 12500.0};
  c.n_max = 3;
  c.levels = 24;
  c.cadence = 100;
  return c;
}

RunConfig tiny_config() {
  RunConfig c;
  c.I = 24;
  c.J = 12;
  c.time = {12, 375.0};
  c.n_max = 2;
  c.levels = 12;
  c.cadence = 4;
  return c;
}

}  // namespace

TEST(InitialFields, VanishAtWestBoundary) {
  for (double y : {0.0, 1.3e5, 5e5})
    for (double z : {0.0, -2500.0, -1e4}) EXPECT_NEAR(initial_fields(0.0, y, z, kParams).u, 0.0, 1e-15);
}

TEST(InitialFields, QuarterPointBottomValue) {
  const double u = initial_fields(kParams.length_x / 4, 0.0, -kParams.depth, kParams).u;
  EXPECT_NEAR(u, std::numbers::pi / (2 * kParams.length_y), 1e-15);
  EXPECT_NEAR(u, 3.14159e-6, 1e-11);
}

TEST(InitialCondition, PhiHasOnlyFirstTwoModes) {
  const Grid2D g = small_grid(16, 8);
  const ModalState s = initial_condition(g, 40, 5, kParams);
  double big = 0.0;
  for (int n = 0; n <= 2; ++n) big = std::max(big, s.modes[n].phi.max_abs());
  ASSERT_GT(big, 0.0);
  for (int n = 3; n <= 5; ++n) EXPECT_LE(s.modes[n].phi.max_abs(), 1e-6 * big) << "n=" << n;
}

TEST(InitialCondition, SliceMatchesClosedForm) {
  const Grid2D g = small_grid(20, 10);
  const ModalState s = initial_condition(g, 40, 5, kParams);
  const Field2D u = extract_slice(s, -2500.0, Variable::u);
  for (int j = 0; j <= g.J; j += 3)
    for (int i = 0; i <= g.I; i += 4)
      EXPECT_NEAR(u(i, j), initial_fields(g.x(i), g.y(j), -2500.0, kParams).u, 1e-6);
}

TEST(InitialCondition, BoundaryViolationsAreReported) {
  const ModalState s = initial_condition(small_grid(20, 10), 40, 3, kParams);
  const auto report = check_homogeneous_boundary(s);
  EXPECT_EQ(report.size(), 4u * 5u);
  for (const auto& e : report) {
    EXPECT_TRUE(std::isfinite(e.max_abs));
    if (e.n == 0 && e.key.var == TraceVar::u && e.key.line == Line::west) {
      EXPECT_LE(e.max_abs, 1e-12);
    }
  }
}

TEST(InitialCondition, RestrictionConsistency) {
  const RunConfig c = tiny_config();
  const Grid2D g = c.grid();
  const NodeRect r = c.inner_rect();
  EXPECT_EQ(make_initial_state(c, g).block(r), make_initial_state(c, g.restrict_to(r)));
}

TEST(Norms, RelativeErrorExamples) {
  std::mt19937_64 rng(1);
  const Grid2D g = small_grid();
  const Field2D outer = random_field(g, rng);
  for (Norm k : {Norm::L2, Norm::Linf}) {
    EXPECT_EQ(relative_error(outer, outer, k), 0.0);
    EXPECT_NEAR(relative_error(1.01 * outer, outer, k), 0.01, 1e-14);
  }
  Field2D shifted = outer;
  for (double& x : shifted.values()) x += 0.25;
  EXPECT_NEAR(relative_error(shifted, outer, Norm::Linf), 0.25 / outer.max_abs(), 1e-14);
  EXPECT_TRUE(std::isnan(relative_error(outer, g.zeros(), Norm::L2)));
  EXPECT_THROW(relative_error(outer, small_grid(4, 4).zeros(), Norm::L2), Error);
}

TEST(Norms, MeanAbsDivergenceExamples) {
  const Grid2D g = small_grid(12, 9);
  Field2D u = g.zeros(), v = g.zeros();
  // u = d(chi)/dy, v = -d(chi)/dx for chi = x^2 + 3xy - y^2, scaled to unit domain.
  for (int j = 0; j <= g.J; ++j)
    for (int i = 0; i <= g.I; ++i) {
      const double x = g.x(i) / 1e5, y = g.y(j) / 1e5;
      u(i, j) = 3 * x - 2 * y;
      v(i, j) = -(2 * x + 3 * y);
    }
  EXPECT_LE(mean_abs_divergence(u, v, g), 1e-12);
  for (int j = 0; j <= g.J; ++j)
    for (int i = 0; i <= g.I; ++i) u(i, j) = g.x(i);
  v.fill(0.0);
  EXPECT_NEAR(mean_abs_divergence(u, v, g), 1.0, 1e-12);
}

TEST(Norms, DiscreteL2Weighting) {
  const Grid2D g = small_grid(4, 4);
  Field2D f = g.zeros();
  f.fill(2.0);
  EXPECT_DOUBLE_EQ(norm(f, Norm::L2, 0.5), std::sqrt(25 * 4.0 * 0.5));
  EXPECT_EQ(norm(f, Norm::Linf, 0.5), 2.0);
}

TEST(RunConfig, ValidationAndInnerDefault) {
  RunConfig c;
  EXPECT_EQ(c.inner_rect(), (NodeRect{100, 300, 50, 150}));
  EXPECT_NO_THROW(c.validate());
  c.inner = {0, 300, 50, 150};
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.levels = 6;
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.boundary = BoundaryKind::playback;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RunSimulation, ZeroStateWithoutRotationStaysZero) {
  RunConfig c = tiny_config();
  c.params = PhysicalParams(20.0, 0.0, 1e-2, 1e4, 1e6, 5e5);
  c.initial = InitialKind::zero;
  RunOptions o = options_from(c);
  int checked = 0;
  o.on_step = [&](int, const ModalState& s) {
    for (const auto& m : s.modes) {
      EXPECT_EQ(m.u.max_abs() + m.v.max_abs() + m.psi.max_abs() + m.phi.max_abs() + m.w.max_abs(), 0.0);
    }
    ++checked;
  };
  run_simulation(make_initial_state(c, c.grid()), c.time, BoundaryProvider::homogeneous(), o);
  EXPECT_EQ(checked, c.time.K + 1);
}

TEST(RunSimulation, BlowUpNamesStepAndVariable) {
  const RunConfig c = tiny_config();
  ModalState s = make_initial_state(c, c.grid());
  s.modes[2].v(3, 3) = std::numeric_limits<double>::quiet_NaN();
  try {
    require_finite(s, 7);
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    EXPECT_EQ(e.step(), 7);
    EXPECT_EQ(e.variable(), "v_2");
  }
}

TEST(RunSimulation, DeskScaleRunStaysFiniteAndDivergenceFree) {
  const RunConfig c = desk_config();
  const Trajectory tr = run_simulation(make_initial_state(c, c.grid()), c.time,
                                       BoundaryProvider::homogeneous(), options_from(c));
  ASSERT_EQ(tr.samples.size(), 5u);
  for (const NormSample& s : tr.samples)
    for (std::size_t a : {0u, 1u, 3u}) {
      EXPECT_TRUE(std::isfinite(s.vars[a].volume_l2));
      EXPECT_TRUE(std::isfinite(s.vars[a].slice_l2));
    }
  for (std::size_t a : {0u, 1u, 3u})
    EXPECT_LT(tr.samples.back().vars[a].volume_l2, tr.samples.front().vars[a].volume_l2) << a;
  for (std::size_t k = 1; k < tr.divergence.size(); ++k) EXPECT_LE(tr.divergence[k], 1e-8);
  EXPECT_LE(tr.max_poisson_residual, 1e-10);
}

TEST(RunSimulation, CadenceDoesNotChangeResults) {
  RunConfig c = tiny_config();
  const ModalState init = make_initial_state(c, c.grid());
  RunOptions a = options_from(c), b = options_from(c);
  b.cadence = 2 * a.cadence;
  const Trajectory ta = run_simulation(init, c.time, BoundaryProvider::homogeneous(), a);
  const Trajectory tb = run_simulation(init, c.time, BoundaryProvider::homogeneous(), b);
  EXPECT_EQ(ta.final_state, tb.final_state);
  EXPECT_EQ(ta.divergence, tb.divergence);
  EXPECT_GT(ta.samples.size(), tb.samples.size());
}

TEST(RunSimulation, PlaybackRejectsMismatchedTraces) {
  const RunConfig c = tiny_config();
  const Grid2D g = c.grid();
  RunOptions o = options_from(c);
  o.record_rect = c.inner_rect();
  const Trajectory outer = run_simulation(make_initial_state(c, g), c.time, BoundaryProvider::homogeneous(), o);
  ASSERT_TRUE(outer.traces);
  EXPECT_EQ(outer.traces->levels(), c.time.K + 1);
  const Grid2D inner = g.restrict_to(c.inner_rect());
  const BoundaryProvider p = BoundaryProvider::playback(*outer.traces);
  const ModalState s = make_initial_state(c, inner);
  EXPECT_THROW(run_simulation(s, TimeGrid{c.time.K, c.time.T * 2}, p, options_from(c)), Error);
  EXPECT_THROW(run_simulation(s, TimeGrid{c.time.K + 1, c.time.T * (c.time.K + 1) / c.time.K}, p,
                              options_from(c)),
               Error);
  EXPECT_THROW(run_simulation(make_initial_state(c, g), c.time, p, options_from(c)), Error);
}

TEST(Nested, ZeroOuterFieldsGiveZeroInnerAndFlaggedErrors) {
  RunConfig c = tiny_config();
  c.params = PhysicalParams(20.0, 0.0, 1e-2, 1e4, 1e6, 5e5);
  c.initial = InitialKind::zero;
  const NestedResult r = run_nested_experiment(c);
  EXPECT_EQ(r.inner.final_state, ModalState(c.params, c.grid().restrict_to(c.inner_rect()), c.n_max));
  for (const ComparisonSample& s : r.report.samples)
    for (std::size_t a = 0; a < 5; ++a) {
      EXPECT_TRUE(s.slice[a].flagged);
      EXPECT_TRUE(s.volume[a].flagged);
      EXPECT_TRUE(std::isnan(s.volume[a].rel_l2));
    }
}

TEST(Nested, StartsIdenticalAndIsDeterministic) {
  const RunConfig c = tiny_config();
  const NestedResult a = run_nested_experiment(c);
  const NestedResult b = run_nested_experiment(c);
  ASSERT_EQ(a.report.samples.size(), b.report.samples.size());
  EXPECT_EQ(a.inner.final_state, b.inner.final_state);
  EXPECT_EQ(a.report.div_inner_nested, b.report.div_inner_nested);
  const ComparisonSample& first = a.report.samples.front();
  EXPECT_EQ(first.step, 0);
  for (std::size_t v : {0u, 1u, 3u}) {
    EXPECT_EQ(first.volume[v].rel_l2, 0.0);
    EXPECT_EQ(first.slice[v].rel_linf, 0.0);
  }
  EXPECT_EQ(a.report.div_outer.size(), static_cast<std::size_t>(c.time.K + 1));
  EXPECT_EQ(a.report.div_inner_direct.size(), a.report.div_outer.size());
  EXPECT_EQ(a.report.div_inner_nested.size(), a.report.div_outer.size());
}

TEST(Nested, InnerBoundaryCarriesRecordedValues) {
  const RunConfig c = tiny_config();
  const NestedResult r = run_nested_experiment(c);
  const NodeRect rect = c.inner_rect();
  const NodeRect local{0, rect.i1 - rect.i0, 0, rect.j1 - rect.j0};
  const ModalState& in = r.inner.final_state;
  const TraceRecord& t = *r.outer.traces;
  EXPECT_EQ(extract_line(in.modes[0].v, local, Line::west), t.at(c.time.K, 0, TraceVar::v, Line::west));
  const CharacteristicViewY y = to_characteristics_y(in.modes[1], c.params);
  const auto beta = extract_line(y.beta, local, Line::south);
  const auto& rec = t.at(c.time.K, 1, TraceVar::beta, Line::south);
  ASSERT_EQ(beta.size(), rec.size());
  for (std::size_t i = 0; i < beta.size(); ++i) EXPECT_NEAR(beta[i], rec[i], 1e-12 * (1 + std::abs(rec[i])));
}
