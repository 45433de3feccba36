#include "quadlearn/fuzzy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "quadlearn/error.hpp"

namespace quadlearn {

void FuzzyParams::validate() const {
  for (double a : alpha) {
    if (a < 0.0) throw Error(ErrorCode::InvalidArgument, "adaptation rate must be >= 0");
  }
  if (!(e_scale > 0.0) || !(de_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fuzzy input scales must be positive");
  }
}

namespace {

double normalize(double v, double scale) { return std::clamp(v / scale, -1.0, 1.0); }

}  // namespace

double fuzzy_correction(double e_norm, double de_norm, double alpha) {
  return alpha * (0.5 * e_norm + de_norm - 0.5 * std::abs(e_norm) * de_norm);
}

double fuzzy_mapping(double e, double de, double alpha, const FuzzyParams& params) {
  return fuzzy_correction(normalize(e, params.e_scale), normalize(de, params.de_scale), alpha);
}

Vec3 fuzzy_mapping(const Vec3& e, const Vec3& de, const FuzzyParams& params) {
  Vec3 out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = fuzzy_mapping(e[i], de[i], params.alpha[i], params);
  return out;
}

double mamdani_oracle(double e, double de, double alpha, const FuzzyParams& params) {
  const double en = normalize(e, params.e_scale);
  const double dn = normalize(de, params.de_scale);

  // Negative, Zero, Positive
  auto memberships = [](double x) -> std::array<double, 3> {
    return {std::max(0.0, -x), std::max(0.0, 1.0 - std::abs(x)), std::max(0.0, x)};
  };
  // Rows: error N/Z/P. Columns: error rate N/Z/P.
  static constexpr double kRules[3][3] = {
      {-1.0, -0.5, 0.0},  // big decrease, small decrease, no changes
      {-1.0, 0.0, 1.0},   // big decrease, no changes, big increase
      {0.0, 0.5, 1.0},    // no changes, small increase, big increase
  };

  const auto me = memberships(en);
  const auto md = memberships(dn);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double w = me[i] * md[j];
      num += w * kRules[i][j];
      den += w;
    }
  }
  return den > 0.0 ? alpha * num / den : 0.0;
}

}  // namespace quadlearn
