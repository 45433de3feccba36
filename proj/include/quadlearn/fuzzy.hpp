#pragma once

#include "quadlearn/pid.hpp"
#include "quadlearn/vec3.hpp"

namespace quadlearn {

/// Correction-law parameters. Errors are divided by the scales and clipped
/// to [-1, 1] before entering the rule universe.
struct FuzzyParams {
  AxisValues alpha{0.0015, 0.0015, 0.057};  // adaptation rate per axis, command units
  double e_scale = 4.0;                     // m
  double de_scale = 0.25;                   // m/s

  void validate() const;
};

/// Closed-form rule-base surrogate on normalized inputs:
///   alpha * (e/2 + de - |e| * de / 2)
/// which reproduces the rule table exactly at the nine corner points.
double fuzzy_correction(double e_norm, double de_norm, double alpha);

/// Per-axis correction from physical errors (normalized and clipped first).
Vec3 fuzzy_mapping(const Vec3& e, const Vec3& de, const FuzzyParams& params);
double fuzzy_mapping(double e, double de, double alpha, const FuzzyParams& params);

/// Reference Mamdani system over the same rule table: triangular
/// Negative/Zero/Positive sets on each input, product t-norm, singleton
/// outputs {-1, -0.5, 0, 0.5, 1} * alpha, weighted-average defuzzification.
double mamdani_oracle(double e, double de, double alpha, const FuzzyParams& params);

}  // namespace quadlearn
