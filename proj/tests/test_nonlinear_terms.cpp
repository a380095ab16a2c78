#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace pe3d;
using pe3d::testing::random_field;
using pe3d::testing::random_state;
using pe3d::testing::small_grid;

namespace {

const PhysicalParams kParams;

double relative_max_diff(const Field2D& a, const Field2D& b) {
  return (a - b).max_abs() / std::max(b.max_abs(), 1e-300);
}

std::vector<int> targets(IntegralKind kind, int nmax) {
  if (kind == IntegralKind::u_against_U0 || kind == IntegralKind::v_against_U0) return {0};
  std::vector<int> out;
  for (int n = 1; n <= nmax; ++n) out.push_back(n);
  return out;
}

}  // namespace

TEST(BIntegral, MatchesQuadratureOracleOnRandomStates) {
  std::mt19937_64 rng(20240501);
  const Grid2D g = small_grid(8, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ModalState s = random_state(kParams, g, 3, rng);
    for (IntegralKind kind : kAllIntegralKinds)
      for (int n : targets(kind, 3)) {
        const double e = relative_max_diff(b_integral(kind, n, s), quadrature_oracle(kind, n, s, 400));
        worst = std::max(worst, e);
        ASSERT_LE(e, 1e-6) << to_string(kind) << " n=" << n << " trial " << trial;
      }
  }
  RecordProperty("worst_relative_discrepancy", std::to_string(worst));
}

TEST(BIntegral, MatchesOracleWithFiveModes) {
  std::mt19937_64 rng(77);
  const ModalState s = random_state(kParams, small_grid(6, 6), 5, rng);
  for (IntegralKind kind : kAllIntegralKinds)
    for (int n : targets(kind, 5))
      EXPECT_LE(relative_max_diff(b_integral(kind, n, s), quadrature_oracle(kind, n, s, 400)), 1e-6)
          << to_string(kind) << " n=" << n;
}

TEST(QuadratureOracle, ConvergedInZResolution) {
  std::mt19937_64 rng(8);
  const ModalState s = random_state(kParams, small_grid(6, 6), 3, rng);
  for (IntegralKind kind : kAllIntegralKinds)
    for (int n : targets(kind, 3)) {
      const Field2D a = quadrature_oracle(kind, n, s, 200), b = quadrature_oracle(kind, n, s, 400);
      EXPECT_LE(relative_max_diff(a, b), 1e-8) << to_string(kind) << " n=" << n;
    }
}

TEST(QuadratureOracle, ZeroStateAndResolutionCheck) {
  const ModalState s(kParams, small_grid(), 3);
  EXPECT_EQ(quadrature_oracle(IntegralKind::u_against_Un, 2, s, 24).max_abs(), 0.0);
  EXPECT_THROW(quadrature_oracle(IntegralKind::u_against_Un, 2, s, 23), Error);
}

TEST(BIntegral, ConstantBarotropicFlowGivesZero) {
  ModalState s(kParams, small_grid(), 3);
  s.modes[0].u.fill(5.0);
  compute_diagnostics(s);
  EXPECT_EQ(b_integral(IntegralKind::u_against_U0, 0, s).max_abs(), 0.0);
}

TEST(BIntegral, OutOfRangeTermsVanish) {
  ModalState s(kParams, small_grid(), 5);
  std::mt19937_64 rng(4);
  s.modes[3].u = random_field(s.grid, rng);
  s.modes[3].v = random_field(s.grid, rng);
  compute_diagnostics(s);
  EXPECT_EQ(b_integral(IntegralKind::u_against_Un, 5, s).max_abs(), 0.0);
}

TEST(BIntegral, IndexAndStalenessErrors) {
  std::mt19937_64 rng(1);
  ModalState s = random_state(kParams, small_grid(), 3, rng);
  EXPECT_THROW(b_integral(IntegralKind::u_against_Un, 0, s), Error);
  EXPECT_THROW(b_integral(IntegralKind::u_against_Un, 4, s), Error);
  EXPECT_THROW(b_integral(IntegralKind::v_against_U0, 1, s), Error);
  s.modes[2].u(3, 3) += 1.0;
  EXPECT_THROW(b_integral(IntegralKind::u_against_Un, 1, s), Error);
}

TEST(BIntegral, LinearInAdvectedPsi) {
  std::mt19937_64 rng(12);
  const Grid2D g = small_grid();
  ModalState a = random_state(kParams, g, 4, rng);
  ModalState b = a, c = a;
  for (int n = 1; n <= 4; ++n) {
    b.modes[n].psi = random_field(g, rng, kParams.buoyancy);
    c.modes[n].psi = a.modes[n].psi + b.modes[n].psi;
  }
  compute_diagnostics(b);
  compute_diagnostics(c);
  for (int n = 1; n <= 4; ++n) {
    const Field2D sum = b_integral(IntegralKind::psi_against_Wn, n, a) +
                        b_integral(IntegralKind::psi_against_Wn, n, b);
    EXPECT_LE(relative_max_diff(b_integral(IntegralKind::psi_against_Wn, n, c), sum), 1e-12);
  }
}

TEST(AssembleSources, ZeroState) {
  const ModalState s(kParams, small_grid(), 3);
  const SourceBundle b = assemble_sources(s, 31.25);
  const double forcing = kParams.coriolis * kParams.U0_bar * std::sqrt(kParams.depth);
  EXPECT_EQ(b.G0x.max_abs(), 0.0);
  for (double v : b.G0y.values()) EXPECT_DOUBLE_EQ(v, forcing);
  for (int n = 1; n <= 3; ++n) {
    EXPECT_EQ(b.S1[n].max_abs(), 0.0);
    EXPECT_EQ(b.S2[n].max_abs(), 0.0);
    EXPECT_EQ(b.S3[n].max_abs(), 0.0);
  }
}

TEST(AssembleSources, ZeroStateWithoutRotation) {
  const PhysicalParams p(20.0, 0.0, 1e-2, 1e4, 1e6, 5e5);
  const ModalState s(p, small_grid(), 2);
  const SourceBundle b = assemble_sources(s, 31.25);
  EXPECT_EQ(b.G0x.max_abs(), 0.0);
  EXPECT_EQ(b.G0y.max_abs(), 0.0);
}

TEST(AssembleSources, HandAssembledValuesAtSampledNodes) {
  std::mt19937_64 rng(99);
  const ModalState s = random_state(kParams, small_grid(), 3, rng);
  const double dt = 31.25, f = kParams.coriolis, N = kParams.buoyancy;
  const SourceBundle b = assemble_sources(s, dt);
  const int nodes[5][2] = {{0, 0}, {3, 4}, {8, 8}, {5, 1}, {2, 7}};
  for (int n = 1; n <= 3; ++n) {
    const Field2D bu = b_integral(IntegralKind::u_against_Un, n, s);
    const Field2D bv = b_integral(IntegralKind::v_against_Un, n, s);
    const Field2D bp = b_integral(IntegralKind::psi_against_Wn, n, s);
    const ModeField& m = s.modes[n];
    for (const auto& ij : nodes) {
      const int i = ij[0], j = ij[1];
      const double xi = m.u(i, j) - m.psi(i, j) / N, eta = m.u(i, j) + m.psi(i, j) / N;
      const double v = m.v(i, j);
      EXPECT_NEAR(b.S1[n](i, j), xi + dt * (f * v - bu(i, j) + bp(i, j) / N), 1e-12);
      EXPECT_NEAR(b.S2[n](i, j), v + dt * (-f * (xi + eta) / 2 - bv(i, j)), 1e-12);
      EXPECT_NEAR(b.S3[n](i, j), eta + dt * (f * v - bu(i, j) - bp(i, j) / N), 1e-12);
    }
  }
}

TEST(AssembleSources, Deterministic) {
  std::mt19937_64 rng(5);
  const ModalState s = random_state(kParams, small_grid(), 3, rng);
  EXPECT_TRUE(assemble_sources(s, 10.0) == assemble_sources(s, 10.0));
}
