#include <gtest/gtest.h>

#include <cmath>

#include "quadlearn/error.hpp"
#include "quadlearn/fuzzy.hpp"

using namespace quadlearn;

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Expected rule-table cell for (e, de) in {-1, 0, 1}^2, in units of alpha.
double table_cell(int e, int de) {
  static const double cells[3][3] = {
      {-1.0, -0.5, 0.0},  // e negative
      {-1.0, 0.0, 1.0},   // e zero
      {0.0, 0.5, 1.0},    // e positive
  };
  return cells[e + 1][de + 1];
}

std::vector<double> grid() {
  std::vector<double> g;
  for (int i = 0; i <= 40; ++i) g.push_back(-1.0 + i * 0.05);
  return g;
}

}  // namespace

TEST(FuzzyMapping, CornerTable) {
  FuzzyParams p;
  p.e_scale = p.de_scale = 1.0;
  for (double alpha : {1.0, 0.1, 0.02}) {
    for (int e = -1; e <= 1; ++e) {
      for (int de = -1; de <= 1; ++de) {
        EXPECT_EQ(fuzzy_correction(e, de, alpha), alpha * table_cell(e, de));
        EXPECT_EQ(fuzzy_mapping(e, de, alpha, p), alpha * table_cell(e, de));
        EXPECT_NEAR(mamdani_oracle(e, de, alpha, p), alpha * table_cell(e, de), 1e-15);
      }
    }
  }
}

TEST(FuzzyMapping, NamedCells) {
  FuzzyParams p;
  p.e_scale = p.de_scale = 1.0;
  EXPECT_EQ(fuzzy_mapping(0.0, 0.0, 1.0, p), 0.0);
  EXPECT_EQ(fuzzy_mapping(1.0, -1.0, 1.0, p), 0.0);
  EXPECT_DOUBLE_EQ(fuzzy_mapping(1.0, 1.0, 0.1, p), 0.1);
  EXPECT_EQ(fuzzy_mapping(-1.0, 0.0, 1.0, p), -0.5);
}

TEST(FuzzyMapping, NormalisationAndClipping) {
  FuzzyParams p;
  p.e_scale = 0.5;
  p.de_scale = 2.0;
  EXPECT_DOUBLE_EQ(fuzzy_mapping(0.25, 1.0, 1.0, p), fuzzy_correction(0.5, 0.5, 1.0));
  EXPECT_EQ(fuzzy_mapping(10.0, 100.0, 1.0, p), fuzzy_correction(1.0, 1.0, 1.0));
  EXPECT_EQ(fuzzy_mapping(-10.0, -100.0, 1.0, p), fuzzy_correction(-1.0, -1.0, 1.0));
}

TEST(FuzzyMapping, VectorForm) {
  FuzzyParams p;
  p.alpha = {0.1, 0.2, 0.3};
  const Vec3 e{0.3, -0.6, 1.5}, de{-0.2, 0.4, 0.0};
  const Vec3 du = fuzzy_mapping(e, de, p);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(du[i], fuzzy_mapping(e[i], de[i], p.alpha[i], p));
}

TEST(FuzzyMapping, SignAgreementWithMamdani) {
  const FuzzyParams p;
  double worst = 0.0;
  for (double e : grid()) {
    for (double de : grid()) {
      const double f = fuzzy_mapping(e, de, 1.0, p);
      const double m = mamdani_oracle(e, de, 1.0, p);
      // values within rounding of zero count as zero
      const int sf = std::abs(f) < 1e-12 ? 0 : sign(f);
      const int sm = std::abs(m) < 1e-12 ? 0 : sign(m);
      EXPECT_EQ(sf, sm) << "e=" << e << " de=" << de;
      worst = std::max(worst, std::abs(f - m));
    }
  }
  EXPECT_LE(worst, 0.25);
}

TEST(FuzzyMapping, OddSymmetryAndMonotonicity) {
  const FuzzyParams p;
  const auto g = grid();
  for (double e : g) {
    for (double de : g) {
      EXPECT_NEAR(fuzzy_mapping(-e, -de, 1.0, p), -fuzzy_mapping(e, de, 1.0, p), 1e-15);
      EXPECT_NEAR(mamdani_oracle(-e, -de, 1.0, p), -mamdani_oracle(e, de, 1.0, p), 1e-12);
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 1; j < g.size(); ++j) {
      EXPECT_LE(fuzzy_mapping(g[i], g[j - 1], 1.0, p), fuzzy_mapping(g[i], g[j], 1.0, p) + 1e-15);
      EXPECT_LE(fuzzy_mapping(g[j - 1], g[i], 1.0, p), fuzzy_mapping(g[j], g[i], 1.0, p) + 1e-15);
      EXPECT_LE(mamdani_oracle(g[i], g[j - 1], 1.0, p), mamdani_oracle(g[i], g[j], 1.0, p) + 1e-12);
      EXPECT_LE(mamdani_oracle(g[j - 1], g[i], 1.0, p), mamdani_oracle(g[j], g[i], 1.0, p) + 1e-12);
    }
  }
}

TEST(FuzzyMapping, LinearInAlpha) {
  const FuzzyParams p;
  for (double e : grid()) {
    EXPECT_NEAR(fuzzy_mapping(e, 0.3, 0.6, p), 3.0 * fuzzy_mapping(e, 0.3, 0.2, p), 1e-15);
    EXPECT_EQ(fuzzy_mapping(e, 0.3, 0.0, p), 0.0);
  }
}

TEST(FuzzyParams, Validation) {
  FuzzyParams p;
  p.alpha[0] = -0.1;
  EXPECT_THROW(p.validate(), Error);
  p = FuzzyParams{};
  p.e_scale = 0.0;
  EXPECT_THROW(p.validate(), Error);
}
