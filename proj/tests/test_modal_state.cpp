#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace pe3d;
using pe3d::testing::random_field;
using pe3d::testing::random_state;
using pe3d::testing::small_grid;

namespace {
const PhysicalParams kParams;
}

TEST(Grid2D, UniformSpacingAndCoordinates) {
  const Grid2D g = Grid2D::uniform(400, 200, 1e6, 5e5);
  EXPECT_EQ(g.dx, 2500.0);
  EXPECT_EQ(g.dy, 2500.0);
  EXPECT_EQ(g.nx(), 401);
  EXPECT_EQ(g.x(400), 1e6);
  EXPECT_THROW(Grid2D::uniform(3, 10, 1.0, 1.0), Error);
}

TEST(Grid2D, RestrictionSharesNodeCoordinates) {
  const Grid2D g = Grid2D::uniform(400, 200, 1e6, 5e5);
  const Grid2D h = g.restrict_to({100, 300, 50, 150});
  EXPECT_EQ(h.I, 200);
  EXPECT_EQ(h.J, 100);
  for (int i = 0; i <= h.I; i += 17) EXPECT_EQ(h.x(i), g.x(i + 100));
  for (int j = 0; j <= h.J; j += 13) EXPECT_EQ(h.y(j), g.y(j + 50));
  EXPECT_THROW(g.restrict_to({100, 402, 50, 150}), Error);
}

TEST(TimeGrid, Defaults) {
  const TimeGrid t;
  EXPECT_EQ(t.dt(), 31.25);
  EXPECT_THROW((TimeGrid{0, 1.0}.validate()), Error);
}

TEST(ModalState, ModeListIsDenseAndClassified) {
  const ModalState s(kParams, small_grid(), 5);
  ASSERT_EQ(s.n_max(), 5);
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(s.modes[n].index, classify_mode(n, kParams));
}

TEST(Characteristics, XExamples) {
  ModeField m(classify_mode(1, kParams), small_grid());
  m.u.fill(3.0);
  m.psi.fill(0.02);
  const auto c = to_characteristics_x(m, kParams);
  EXPECT_NEAR(c.xi(2, 3), 1.0, 1e-14);
  EXPECT_NEAR(c.eta(2, 3), 5.0, 1e-14);
  ModeField z(classify_mode(1, kParams), small_grid());
  const auto cz = to_characteristics_x(z, kParams);
  EXPECT_EQ(cz.xi.max_abs(), 0.0);
  EXPECT_EQ(cz.eta.max_abs(), 0.0);
}

TEST(Characteristics, YExample) {
  ModeField m(classify_mode(2, kParams), small_grid());
  m.v.fill(1.0);
  m.psi.fill(0.01);
  const auto c = to_characteristics_y(m, kParams);
  EXPECT_NEAR(c.alpha(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(c.beta(1, 1), 0.0, 1e-14);
}

TEST(Characteristics, ZeroModeRejected) {
  ModeField m(classify_mode(0, kParams), small_grid());
  EXPECT_THROW(to_characteristics_x(m, kParams), Error);
  EXPECT_THROW(to_characteristics_y(m, kParams), Error);
}

TEST(Characteristics, RoundTripIsIdentity) {
  std::mt19937_64 rng(3);
  const Grid2D g = small_grid();
  for (int trial = 0; trial < 100; ++trial) {
    ModeField m(classify_mode(1 + trial % 5, kParams), g);
    m.u = random_field(g, rng, 5.0);
    m.v = random_field(g, rng, 5.0);
    m.psi = random_field(g, rng, 0.05);
    ModeField x = m, y = m;
    from_characteristics_x(to_characteristics_x(m, kParams), x, kParams);
    from_characteristics_y(to_characteristics_y(m, kParams), y, kParams);
    for (std::size_t k = 0; k < m.u.size(); ++k) {
      EXPECT_NEAR(x.u.values()[k], m.u.values()[k], 1e-14 * 5.0);
      EXPECT_NEAR(x.psi.values()[k], m.psi.values()[k], 1e-14 * 0.05);
      EXPECT_NEAR(y.v.values()[k], m.v.values()[k], 1e-14 * 5.0);
      EXPECT_NEAR(y.psi.values()[k], m.psi.values()[k], 1e-14 * 0.05);
    }
    EXPECT_EQ(x.v, m.v);
    EXPECT_EQ(y.u, m.u);
  }
}

TEST(Diagnostics, Examples) {
  const Grid2D g = small_grid();
  const int n = 3;
  const double lambda = eigen_lambda(n, kParams);
  ModeField m(classify_mode(n, kParams), g);
  m.psi.fill(lambda);
  for (int j = 0; j <= g.J; ++j)
    for (int i = 0; i <= g.I; ++i) m.u(i, j) = g.x(i);
  compute_diagnostics(m, g, kParams);
  for (double v : m.phi.values()) EXPECT_NEAR(v, -1.0, 1e-14);
  for (double v : m.w.values()) EXPECT_NEAR(v, -1.0 / lambda, 1e-9 / lambda);

  m.u.fill(2.0);
  m.v.fill(2.0);
  compute_diagnostics(m, g, kParams);
  EXPECT_EQ(m.w.max_abs(), 0.0);

  ModeField z(classify_mode(0, kParams), g);
  EXPECT_THROW(compute_diagnostics(z, g, kParams), Error);
}

TEST(Diagnostics, Linear) {
  std::mt19937_64 rng(5);
  const Grid2D g = small_grid();
  ModalState a = random_state(kParams, g, 3, rng), b = random_state(kParams, g, 3, rng);
  ModalState c = a;
  for (int n = 1; n <= 3; ++n) {
    c.modes[n].u = 2.0 * a.modes[n].u + (-3.0) * b.modes[n].u;
    c.modes[n].v = 2.0 * a.modes[n].v + (-3.0) * b.modes[n].v;
    c.modes[n].psi = 2.0 * a.modes[n].psi + (-3.0) * b.modes[n].psi;
  }
  compute_diagnostics(c);
  for (int n = 1; n <= 3; ++n) {
    const Field2D w = 2.0 * a.modes[n].w + (-3.0) * b.modes[n].w;
    const Field2D phi = 2.0 * a.modes[n].phi + (-3.0) * b.modes[n].phi;
    EXPECT_LE((w - c.modes[n].w).max_abs(), 1e-12 * (1.0 + w.max_abs()));
    EXPECT_LE((phi - c.modes[n].phi).max_abs(), 1e-12 * (1.0 + phi.max_abs()));
  }
}

TEST(Reconstruct, BarotropicConstant) {
  ModalState s(kParams, small_grid(), 2);
  s.modes[0].u.fill(std::sqrt(kParams.depth) * 1.5);
  const auto z = uniform_levels(10, kParams);
  const PhysicalFields f = reconstruct_physical(s, z);
  for (const auto& level : f.u)
    for (double v : level.values()) EXPECT_NEAR(v, 1.5, 1e-14);
}

TEST(Reconstruct, RigidLidAndFlatBottom) {
  std::mt19937_64 rng(9);
  const ModalState s = random_state(kParams, small_grid(), 5, rng);
  const double z[] = {0.0, -kParams.depth};
  const PhysicalFields f = reconstruct_physical(s, z);
  const double scale = 1.0 / (eigen_lambda(1, kParams) * small_grid().dx);
  for (const auto& level : f.w) EXPECT_LE(level.max_abs(), 1e-12 * scale);
}

TEST(Reconstruct, ProjectBackRecoversCoefficients) {
  std::mt19937_64 rng(21);
  const Grid2D g = small_grid(6, 5);
  const ModalState s = random_state(kParams, g, 5, rng);
  const auto z = uniform_levels(40, kParams);
  const PhysicalFields f = reconstruct_physical(s, z);
  std::vector<double> col(z.size());
  for (int j = 0; j <= g.J; ++j)
    for (int i = 0; i <= g.I; ++i) {
      for (int n = 0; n <= 5; ++n) {
        for (std::size_t k = 0; k < z.size(); ++k) col[k] = f.u[k](i, j);
        EXPECT_NEAR(project_coefficient(col, Basis::U, n, kParams), s.modes[n].u(i, j), 1e-6);
        if (n == 0) continue;
        for (std::size_t k = 0; k < z.size(); ++k) col[k] = f.psi[k](i, j);
        EXPECT_NEAR(project_coefficient(col, Basis::W, n, kParams), s.modes[n].psi(i, j), 1e-6);
      }
    }
}

TEST(Reconstruct, LinearInCoefficients) {
  std::mt19937_64 rng(2);
  const Grid2D g = small_grid();
  const ModalState a = random_state(kParams, g, 3, rng), b = random_state(kParams, g, 3, rng);
  ModalState c = a;
  for (int n = 0; n <= 3; ++n) {
    c.modes[n].u = a.modes[n].u + b.modes[n].u;
    c.modes[n].v = a.modes[n].v + b.modes[n].v;
    c.modes[n].psi = a.modes[n].psi + b.modes[n].psi;
    c.modes[n].phi = a.modes[n].phi + b.modes[n].phi;
  }
  const double z[] = {-2500.0, -7000.0};
  const PhysicalFields fa = reconstruct_physical(a, z), fb = reconstruct_physical(b, z),
                       fc = reconstruct_physical(c, z);
  for (Variable v : kAllVariables)
    for (std::size_t l = 0; l < 2; ++l) {
      const Field2D sum = fa.get(v)[l] + fb.get(v)[l];
      EXPECT_LE((sum - fc.get(v)[l]).max_abs(), 1e-12 * (1.0 + sum.max_abs())) << to_string(v);
    }
}
