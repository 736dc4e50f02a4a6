#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qhj/errors.hpp"
#include "qhj/potential.hpp"

namespace qhj {
namespace {

TEST(Potential, FreeIsZeroEverywhere) {
  const auto v = PotentialSpec::free(-1.0, 1.0);
  EXPECT_EQ(v(-1.0), 0.0);
  EXPECT_EQ(v(0.3), 0.0);
  EXPECT_EQ(v.kind(), PotentialKind::Free);
}

TEST(Potential, HarmonicAboutCenter) {
  const auto v = PotentialSpec::harmonic(2.0, -3.0, 3.0, 0.5);
  EXPECT_DOUBLE_EQ(v(0.5), 0.0);
  EXPECT_DOUBLE_EQ(v(1.5), 1.0);
  EXPECT_DOUBLE_EQ(v(-0.5), 1.0);
}

TEST(Potential, LinearSlopeAndOffset) {
  const auto v = PotentialSpec::linear(-2.0, 1.0, 0.0, 4.0);
  EXPECT_DOUBLE_EQ(v(0.0), 1.0);
  EXPECT_DOUBLE_EQ(v(2.0), -3.0);
}

TEST(Potential, RejectsBadParameters) {
  EXPECT_THROW(PotentialSpec::harmonic(0.0, 0.0, 1.0), PreconditionError);
  EXPECT_THROW(PotentialSpec::free(1.0, 1.0), PreconditionError);
  EXPECT_THROW(PotentialSpec::tabulated({0.0}, {1.0}, 0.0, 1.0), PreconditionError);
  EXPECT_THROW(PotentialSpec::tabulated({0.0, 0.5, 0.4}, {1.0, 1.0, 1.0}, 0.0, 0.4),
               PreconditionError);
  EXPECT_THROW(PotentialSpec::tabulated({0.0, 0.5}, {1.0, 1.0}, 0.0, 1.0), PreconditionError);
}

TEST(Potential, TabulatedSplineHitsKnotsAndIsExactForLines) {
  std::vector<double> xs;
  std::vector<double> vs;
  for (int i = 0; i <= 10; ++i) {
    xs.push_back(0.1 * i);
    vs.push_back(3.0 * 0.1 * i - 0.5);
  }
  const auto v = PotentialSpec::tabulated(xs, vs, 0.0, 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(v(xs[i]), vs[i], 1e-14);
  EXPECT_NEAR(v(0.437), 3.0 * 0.437 - 0.5, 1e-13);
  EXPECT_THROW(v(1.2), DomainError);
}

TEST(Potential, TabulatedSplineApproximatesSmoothData) {
  std::vector<double> xs;
  std::vector<double> vs;
  for (int i = 0; i <= 200; ++i) {
    xs.push_back(-2.0 + 0.02 * i);
    vs.push_back(0.5 * xs.back() * xs.back());
  }
  const auto v = PotentialSpec::tabulated(xs, vs, -2.0, 2.0);
  EXPECT_NEAR(v(0.301), 0.5 * 0.301 * 0.301, 1e-6);
}

TEST(Potential, FromCsvReadsHeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "qhj_potential_test.csv";
  {
    std::ofstream out(path);
    out << "x,V\n0,0\n0.5,0.25\n1,1\n";
  }
  const auto v = PotentialSpec::from_csv(path, 0.0, 1.0);
  EXPECT_EQ(v.kind(), PotentialKind::Tabulated);
  EXPECT_NEAR(v(0.5), 0.25, 1e-14);
  std::filesystem::remove(path);
}

TEST(Potential, FromCsvRejectsMissingAndMalformedFiles) {
  EXPECT_THROW(PotentialSpec::from_csv("/nonexistent/table.csv", 0.0, 1.0), PreconditionError);
  const auto path = std::filesystem::temp_directory_path() / "qhj_potential_bad.csv";
  {
    std::ofstream out(path);
    out << "x,V\n0,zero\n";
  }
  EXPECT_THROW(PotentialSpec::from_csv(path, 0.0, 1.0), PreconditionError);
  std::filesystem::remove(path);
}

TEST(Potential, KindNamesRoundTrip) {
  for (auto k : {PotentialKind::Free, PotentialKind::Harmonic, PotentialKind::Linear,
                 PotentialKind::Tabulated}) {
    EXPECT_EQ(potential_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(potential_kind_from_string("square-well"), PreconditionError);
}

}  // namespace
}  // namespace qhj
