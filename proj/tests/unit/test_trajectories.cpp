#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "quadlearn/error.hpp"
#include "quadlearn/trajectories.hpp"

using namespace quadlearn;

namespace {

TrajectorySpec circle(double r = 1.0, double v = 1.0, TrajectoryPlane plane = TrajectoryPlane::XY) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Circle;
  s.plane = plane;
  s.size = r;
  s.speed = v;
  s.duration = 40.0;
  return s;
}

TrajectorySpec square(double side = 2.0, double v = 1.0) {
  TrajectorySpec s = circle(side, v);
  s.kind = TrajectoryKind::Square;
  return s;
}

TrajectorySpec eight(double size = 1.0, double v = 1.0) {
  TrajectorySpec s = circle(size, v);
  s.kind = TrajectoryKind::Eight;
  return s;
}

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(Sample, CircleStart) {
  const TrajectorySpec s = circle();
  const ReferencePoint r = sample(s, 0.0);
  expect_vec_near(r.position, s.center + Vec3{1.0, 0.0, 0.0}, 1e-15);
  expect_vec_near(r.velocity, {0.0, 1.0, 0.0}, 1e-15);
}

TEST(Sample, CircleHalfLap) {
  const TrajectorySpec s = circle();
  expect_vec_near(sample(s, std::numbers::pi).position, s.center + Vec3{-1.0, 0.0, 0.0}, 1e-12);
}

TEST(Sample, CirclePlanes) {
  TrajectorySpec xz = circle(1.0, 1.0, TrajectoryPlane::XZ);
  TrajectorySpec yz = circle(1.0, 1.0, TrajectoryPlane::YZ);
  const double q = std::numbers::pi / 2.0;
  EXPECT_NEAR(sample(xz, q).position.z - xz.center.z, 1.0, 1e-12);
  EXPECT_NEAR(sample(xz, q).position.y - xz.center.y, 0.0, 1e-12);
  EXPECT_NEAR(sample(yz, 0.0).position.y - yz.center.y, 1.0, 1e-12);
  EXPECT_NEAR(sample(yz, 0.0).position.x - yz.center.x, 0.0, 1e-12);
}

TEST(Sample, SquareLapAndCorners) {
  const TrajectorySpec s = square();
  EXPECT_DOUBLE_EQ(lap_period(s), 8.0);
  const ReferencePoint corner = sample(s, 2.0);
  expect_vec_near(corner.position, s.center + Vec3{1.0, -1.0, 0.0}, 1e-12);
  // right-continuous: the corner takes the outgoing edge's velocity
  expect_vec_near(corner.velocity, {0.0, 1.0, 0.0}, 0.0);
  expect_vec_near(sample(s, 8.0).position, sample(s, 0.0).position, 1e-12);
}

TEST(Sample, EightExtentEqualsSize) {
  const TrajectorySpec s = eight(1.3, 1.0);
  double max_a = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double t = lap_period(s) * i / 200000.0;
    max_a = std::max(max_a, std::abs(sample(s, t).position.x - s.center.x));
  }
  EXPECT_NEAR(max_a, 1.3, 1e-9);
}

TEST(Sample, EightPeakSpeedEqualsSpec) {
  const TrajectorySpec s = eight(1.0, 1.5);
  double peak = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    peak = std::max(peak, sample(s, lap_period(s) * i / 20000.0).velocity.norm());
  }
  EXPECT_NEAR(peak, 1.5, 1e-9);
}

TEST(Sample, OutOfRange) {
  const TrajectorySpec s = circle();
  EXPECT_THROW(sample(s, -1e-9), Error);
  EXPECT_THROW(sample(s, s.duration + 1e-9), Error);
  EXPECT_NO_THROW(sample(s, s.duration));
}

TEST(Sample, SpeedInvariant) {
  for (const TrajectorySpec& s : {circle(1.0, 2.0), circle(0.5, 1.0, TrajectoryPlane::YZ), square()}) {
    for (int i = 0; i < 997; ++i) {
      const double t = 0.0371 * i + 0.0013;
      if (t > s.duration) break;
      EXPECT_NEAR(sample(s, t).velocity.norm(), s.speed, 1e-9);
    }
  }
}

TEST(Sample, ClosureAfterOneLap) {
  for (const TrajectorySpec& s : {circle(), circle(1.0, 2.0), eight(), square()}) {
    expect_vec_near(sample(s, 0.0).position, sample(s, lap_period(s)).position, 1e-9);
  }
}

TEST(Sample, VelocityIsPositionDerivative) {
  const double h = 1e-6;
  for (const TrajectorySpec& s : {circle(), eight(0.7, 1.0), square()}) {
    for (int i = 1; i < 300; ++i) {
      const double t = 0.0917 * i;
      if (s.kind == TrajectoryKind::Square) {
        const double edge_pos = std::fmod(t * s.speed, s.size);
        if (edge_pos < 1e-3 || edge_pos > s.size - 1e-3) continue;
      }
      const Vec3 fd = (1.0 / (2.0 * h)) * (sample(s, t + h).position - sample(s, t - h).position);
      expect_vec_near(fd, sample(s, t).velocity, 1e-6);
    }
  }
}

TEST(FlightReference, SettleHoversAtStart) {
  const TrajectorySpec s = circle();
  const ReferencePoint hover = flight_reference(s, 3.0, 1.5);
  expect_vec_near(hover.position, sample(s, 0.0).position, 0.0);
  expect_vec_near(hover.velocity, {}, 0.0);
  expect_vec_near(flight_reference(s, 3.0, 4.0).position, sample(s, 1.0).position, 1e-15);
}

TEST(TrackingError, Subtraction) {
  ReferencePoint r{{1.0, 2.0, 3.0}, {0.5, -0.5, 0.0}};
  expect_vec_near(tracking_error(r, {}), {1.0, 2.0, 3.0}, 0.0);
  expect_vec_near(tracking_error(r, r.position), {}, 0.0);
  expect_vec_near(error_rate(r, {}), {0.5, -0.5, 0.0}, 0.0);
  expect_vec_near(error_rate(r, r.velocity), {}, 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const ReferencePoint ref{{n(rng), n(rng), n(rng)}, {n(rng), n(rng), n(rng)}};
    const Vec3 p{n(rng), n(rng), n(rng)}, v{n(rng), n(rng), n(rng)};
    const Vec3 e = tracking_error(ref, p), de = error_rate(ref, v);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(e[k], ref.position[k] - p[k]);
      EXPECT_EQ(de[k], ref.velocity[k] - v[k]);
    }
  }
}

TEST(FeatureWindow, ThreePushes) {
  AxisFeatureWindow w;
  w = push_window(w, 1.0, 0.1);
  w = push_window(w, 2.0, 0.2);
  w = push_window(w, 3.0, 0.3);
  const Features f = w.features();
  EXPECT_EQ(f, (Features{3.0, 2.0, 1.0, 0.3, 0.2, 0.1}));
}

TEST(FeatureWindow, ZeroInitialised) {
  const AxisFeatureWindow w = push_window({}, 5.0, 0.0);
  EXPECT_EQ(w.features(), (Features{5.0, 0.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST(FeatureWindow, MatchesListModel) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  AxisFeatureWindow w;
  std::deque<std::pair<double, double>> history(3, {0.0, 0.0});
  for (int i = 0; i < 1000; ++i) {
    const double e = n(rng), de = n(rng);
    w.push(e, de);
    history.push_front({e, de});
    history.pop_back();
    const Features f = w.features();
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_EQ(f[k], history[k].first);
      ASSERT_EQ(f[3 + k], history[k].second);
    }
  }
}

TEST(TrajectorySpec, Validation) {
  TrajectorySpec s = circle();
  s.size = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s = circle();
  s.speed = -1.0;
  EXPECT_THROW(s.validate(), Error);
  s = circle();
  s.duration = -1.0;
  EXPECT_THROW(s.validate(), Error);
  s.duration = 0.0;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(parse_trajectory_kind("square"), TrajectoryKind::Square);
  EXPECT_EQ(parse_trajectory_plane("yz"), TrajectoryPlane::YZ);
  EXPECT_THROW(parse_trajectory_kind("spiral"), Error);
}
