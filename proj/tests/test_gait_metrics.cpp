#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "gaitkit/gait_metrics.hpp"
#include "gaitkit/pipeline.hpp"
#include "gaitkit/synth.hpp"
#include "support.hpp"

using namespace gaitkit;
using gaitkit::testing::test_norm;

namespace {

JointAngleSeries series_from_knee(const Eigen::VectorXd& knee) {
  JointAngleSeries s;
  s.values = Eigen::MatrixXd::Zero(knee.size(), kAngleChannels);
  s.values.col(channel_index(LimbSide::Left, AngleJoint::Knee, 0)) = knee;
  return s;
}

SynthTrial trial(double knee, double ankle, double noise_mm = 0.0, std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.knee_offset_sigma = knee;
  spec.ankle_offset_sigma = ankle;
  spec.noise_mm = noise_mm;
  spec.seed = seed;
  return generate_trial(spec, test_norm());
}

ZScorePair recover(const SynthTrial& t) {
  return process_trial(t.sequence, SkeletonMap::standard(), test_norm(), {}).zscores;
}

}  // namespace

TEST(HeelStrikes, NineCyclesAtKnownFrames) {
  const auto t = trial(0, 0);
  const auto map = SkeletonMap::standard();
  const auto filtered = preprocess(t.sequence, map, {}).filtered;
  const auto cycles = detect_gait_cycles(filtered, map, LimbSide::Left);
  ASSERT_EQ(cycles.size(), 9u);
  ASSERT_EQ(t.strike_frames.size(), 10u);
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    EXPECT_LE(std::abs(cycles[i].start_frame - t.strike_frames[i]), 1);
    EXPECT_LE(std::abs(cycles[i].end_frame - t.strike_frames[i + 1]), 1);
  }
}

TEST(HeelStrikes, StationaryPoseHasNoProgression) {
  const auto seq = pose_sequence(std::vector<BodyPose>(120), 60.0);
  try {
    detect_heel_strikes(seq, SkeletonMap::standard(), LimbSide::Left);
    FAIL();
  } catch (const GaitError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoProgression);
  }
}

TEST(HeelStrikes, NoisyTrialKeepsStrikeCount) {
  const auto map = SkeletonMap::standard();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto clean = trial(1, -1, 0.0, seed);
    const auto noisy = trial(1, -1, 5.0, seed);
    const auto a = detect_heel_strikes(preprocess(clean.sequence, map, {}).filtered, map, LimbSide::Left);
    const auto b = detect_heel_strikes(preprocess(noisy.sequence, map, {}).filtered, map, LimbSide::Left);
    EXPECT_EQ(a.size(), b.size()) << "seed " << seed;
  }
}

TEST(Midstance, BoundsFor100Frames) {
  const auto [lo, hi] = midstance_bounds(100);
  EXPECT_EQ(lo, 20);
  EXPECT_EQ(hi, 45);
  EXPECT_EQ(hi - lo + 1, 26);
}

TEST(Midstance, ConstantRampAndSinusoid) {
  const GaitCycle cycle{0, 100};
  EXPECT_DOUBLE_EQ(midstance_mean(series_from_knee(Eigen::VectorXd::Constant(101, 10.0)), cycle, Joint::Knee).mean_angle_deg,
                   10.0);
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(101, 0.0, 100.0);
  EXPECT_NEAR(midstance_mean(series_from_knee(ramp), cycle, Joint::Knee).mean_angle_deg, 32.5, 1e-12);

  const GaitCycle c2{10, 70};
  const Eigen::VectorXd sine = Eigen::VectorXd::NullaryExpr(
      100, [](Eigen::Index i) { return 30.0 + 25.0 * std::sin(2.0 * std::numbers::pi * (i - 10) / 60.0); });
  double sum = 0.0;
  for (Eigen::Index i = 10 + 12; i <= 10 + 27; ++i) sum += sine(i);
  EXPECT_NEAR(midstance_mean(series_from_knee(sine), c2, Joint::Knee).mean_angle_deg, sum / 16.0, 1e-9);
}

TEST(ZScore, Definition) {
  const auto norm = test_norm();
  EXPECT_EQ(zscore({Joint::Knee, norm.knee().mean_deg}, norm), 0.0);
  EXPECT_DOUBLE_EQ(zscore({Joint::Knee, norm.knee().mean_deg + 2 * norm.knee().sd_deg}, norm), 2.0);
  EXPECT_DOUBLE_EQ(zscore({Joint::Ankle, norm.ankle().mean_deg - norm.ankle().sd_deg}, norm), -1.0);
}

TEST(ZScore, ShiftBySdShiftsByOne) {
  const auto t = trial(0.3, -0.4);
  const auto map = SkeletonMap::standard();
  const auto stages = preprocess(t.sequence, map, {});
  auto angles = compute_angle_channels(stages.normalized, map);
  const auto cycles = detect_gait_cycles(stages.filtered, map, LimbSide::Left);
  const auto base = zscores_from_cycles(angles, cycles, test_norm(), LimbSide::Left);
  angles.values.col(channel_index(LimbSide::Left, AngleJoint::Knee, 0)).array() += test_norm().knee().sd_deg;
  angles.values.col(channel_index(LimbSide::Left, AngleJoint::Ankle, 0)).array() += test_norm().ankle().sd_deg;
  const auto shifted = zscores_from_cycles(angles, cycles, test_norm(), LimbSide::Left);
  EXPECT_NEAR(shifted.knee_z - base.knee_z, 1.0, 1e-12);
  EXPECT_NEAR(shifted.ankle_z - base.ankle_z, 1.0, 1e-12);
}

TEST(BiomechBaseline, SingleAndIdenticalCyclesAndPermutation) {
  Eigen::VectorXd knee(400);
  for (Eigen::Index i = 0; i < 400; ++i) knee(i) = 12.0 + 5.0 * std::cos(2.0 * std::numbers::pi * i / 60.0) + 0.01 * i;
  const auto angles = series_from_knee(knee);
  const std::vector<GaitCycle> one{{60, 120}};
  const auto single = zscores_from_cycles(angles, one, test_norm(), LimbSide::Left);
  EXPECT_DOUBLE_EQ(single.knee_z, zscore(midstance_mean(angles, one[0], Joint::Knee), test_norm()));

  const std::vector<GaitCycle> cycles{{0, 60}, {60, 120}, {120, 181}, {181, 240}, {240, 300}};
  std::vector<GaitCycle> reversed(cycles.rbegin(), cycles.rend());
  const auto a = zscores_from_cycles(angles, cycles, test_norm(), LimbSide::Left);
  const auto b = zscores_from_cycles(angles, reversed, test_norm(), LimbSide::Left);
  EXPECT_NEAR(a.knee_z, b.knee_z, 1e-12);
  const auto best = zscores_from_cycles(angles, cycles, test_norm(), LimbSide::Left, CyclePolicy::SingleBest);
  EXPECT_DOUBLE_EQ(best.knee_z, zscore(midstance_mean(angles, cycles[0], Joint::Knee), test_norm()));

  const auto periodic = series_from_knee(
      Eigen::VectorXd::NullaryExpr(400, [](Eigen::Index i) { return 20.0 * std::sin(2.0 * std::numbers::pi * i / 60.0); }));
  const std::vector<GaitCycle> same{{0, 60}, {60, 120}, {120, 180}};
  EXPECT_NEAR(zscores_from_cycles(periodic, same, test_norm(), LimbSide::Left).knee_z,
              zscore(midstance_mean(periodic, same[1], Joint::Knee), test_norm()), 1e-12);
}

TEST(BiomechBaseline, EndToEndSynthOracles) {
  const auto a = recover(trial(2.0, -1.0));
  EXPECT_NEAR(a.knee_z, 2.0, 0.2);
  EXPECT_NEAR(a.ankle_z, -1.0, 0.2);
  const auto b = recover(trial(3.0, 0.0));
  EXPECT_NEAR(b.knee_z, 3.0, 0.1);
  const auto c = biomech_baseline(trial(2.0, -1.0).sequence, SkeletonMap::standard(), test_norm(), LimbSide::Left);
  EXPECT_NEAR(c.knee_z, 2.0, 0.2);
  EXPECT_NEAR(c.ankle_z, -1.0, 0.2);
}

TEST(BiomechBaseline, MedianDurationCycle) {
  const std::vector<GaitCycle> cycles{{0, 58}, {58, 120}, {120, 180}};
  EXPECT_EQ(median_duration_cycle(cycles).start_frame, 120);
}
