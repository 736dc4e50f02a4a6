#include <gtest/gtest.h>

#include <cmath>

#include "qhj/numerics.hpp"

namespace qhj::numerics {
namespace {

TEST(Numerics, UniformGridEndpointsAndSpacing) {
  const auto g = uniform_grid(-1.0, 3.0, 401);
  ASSERT_EQ(g.size(), 401u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 3.0);
  const auto h = uniform_spacing(g);
  ASSERT_TRUE(h.has_value());
  EXPECT_NEAR(*h, 0.01, 1e-15);
}

TEST(Numerics, NonUniformGridHasNoSpacing) {
  const std::vector<double> g{0.0, 0.1, 0.3, 0.4};
  EXPECT_FALSE(uniform_spacing(g).has_value());
}

TEST(Numerics, LocateClampsToIntervals) {
  const auto g = uniform_grid(0.0, 1.0, 11);
  EXPECT_EQ(locate(g, 0.0), 0u);
  EXPECT_EQ(locate(g, 0.35), 3u);
  EXPECT_EQ(locate(g, 1.0), 9u);
  EXPECT_EQ(locate(g, -5.0), 0u);
  EXPECT_EQ(locate(g, 5.0), 9u);
}

TEST(Numerics, HermiteReproducesCubics) {
  auto f = [](double x) { return 2.0 * x * x * x - x * x + 0.5 * x - 3.0; };
  auto df = [](double x) { return 6.0 * x * x - 2.0 * x + 0.5; };
  const double x0 = 0.2;
  const double x1 = 0.9;
  for (double x : {0.2, 0.33, 0.61, 0.9}) {
    EXPECT_NEAR(hermite(x0, x1, f(x0), f(x1), df(x0), df(x1), x), f(x), 1e-14);
    EXPECT_NEAR(hermite_slope(x0, x1, f(x0), f(x1), df(x0), df(x1), x), df(x), 1e-13);
  }
}

TEST(Numerics, FourthOrderDerivativeIncludingEnds) {
  const double h = 1e-3;
  const auto g = uniform_grid(0.0, 2.0, 2001);
  std::vector<double> y;
  for (double x : g) y.push_back(std::sin(x));
  const auto dy = derivative4(y, h);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(dy[i] - std::cos(g[i])));
  EXPECT_LT(worst, 1e-10);
}

TEST(Numerics, CumulativeSimpsonEvenAndOddNodeCounts) {
  for (std::size_t n : {1001u, 1000u}) {
    const auto g = uniform_grid(0.0, 1.5, n);
    std::vector<double> f;
    for (double x : g) f.push_back(std::cos(x));
    const auto F = cumulative_simpson(f, g[1] - g[0]);
    ASSERT_EQ(F.size(), n);
    EXPECT_EQ(F.front(), 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(F[i] - std::sin(g[i])));
    EXPECT_LT(worst, 1e-11) << n;
  }
}

TEST(Numerics, RichardsonCentralIsFourthOrder) {
  const double h = 1e-2;
  const double d = richardson_central(std::exp(-2 * h), std::exp(-h), std::exp(h),
                                      std::exp(2 * h), h);
  EXPECT_NEAR(d, 1.0, 1e-9);
  EXPECT_NEAR(derivative5([](double x) { return std::exp(x); }, 0.0, h), 1.0, 1e-9);
}

}  // namespace
}  // namespace qhj::numerics
