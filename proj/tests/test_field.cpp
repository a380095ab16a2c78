#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace pe3d;

namespace {

Field2D linear(int nx, int ny, double dx, double dy, double a, double b, double c) {
  Field2D f(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) f(i, j) = a * i * dx + b * j * dy + c;
  return f;
}

}  // namespace

TEST(Field2D, RejectsEmptyShape) { EXPECT_THROW(Field2D(0, 3), Error); }

TEST(Field2D, RowMajorInY) {
  Field2D f(3, 2);
  f(2, 1) = 7.0;
  EXPECT_EQ(f.values()[5], 7.0);
  EXPECT_EQ(f.row(1)[2], 7.0);
}

TEST(Field2D, ArithmeticRequiresMatchingShapes) {
  Field2D a(3, 3, 1.0), b(3, 4, 1.0);
  EXPECT_THROW(a += b, Error);
  EXPECT_THROW(a.axpy(1.0, b), Error);
}

TEST(Field2D, BlockCopiesInclusiveRange) {
  Field2D f(5, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 5; ++i) f(i, j) = 10 * i + j;
  const Field2D b = f.block(1, 3, 2, 3);
  ASSERT_EQ(b.nx(), 3);
  ASSERT_EQ(b.ny(), 2);
  EXPECT_EQ(b(0, 0), 12);
  EXPECT_EQ(b(2, 1), 33);
}

TEST(Derivatives, ExactOnLinearFieldsIncludingBoundaries) {
  const double dx = 0.5, dy = 0.25;
  const Field2D f = linear(6, 5, dx, dy, 3.0, -2.0, 1.0);
  const Field2D fx = derivative_x(f, dx), fy = derivative_y(f, dy);
  for (double v : fx.values()) EXPECT_NEAR(v, 3.0, 1e-12);
  for (double v : fy.values()) EXPECT_NEAR(v, -2.0, 1e-12);
}

TEST(Derivatives, CenteredInteriorOneSidedBoundary) {
  Field2D f(4, 1);
  f(0, 0) = 0, f(1, 0) = 1, f(2, 0) = 4, f(3, 0) = 9;
  const Field2D d = derivative_x(f, 1.0);
  EXPECT_DOUBLE_EQ(d(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(d(2, 0), 4.0);
  EXPECT_DOUBLE_EQ(d(3, 0), 5.0);
}

TEST(Divergence, CurlOfQuadraticIsDiscretelyDivergenceFree) {
  // u = d chi/dy, v = -d chi/dx with chi = x^2 + 3xy - y^2
  const double dx = 0.3, dy = 0.7;
  Field2D u(7, 6), v(7, 6);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 7; ++i) {
      const double x = i * dx, y = j * dy;
      u(i, j) = 3 * x - 2 * y;
      v(i, j) = -(2 * x + 3 * y);
    }
  EXPECT_LE(divergence(u, v, dx, dy).max_abs(), 1e-12);
}
