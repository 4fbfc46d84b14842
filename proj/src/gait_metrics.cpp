#include "gaitkit/gait_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gaitkit/preprocess.hpp"

namespace gaitkit {

std::vector<Eigen::Index> detect_heel_strikes(const KeypointSequence& seq, const SkeletonMap& map, LimbSide side,
                                              const CycleDetectionOptions& options) {
  if (!seq.fully_valid()) throw GaitError(ErrorCode::InvalidSequence, "cycle detection needs a fully valid sequence");
  const auto index = map.resolve(seq);
  const Eigen::Index n = seq.num_frames();
  if (n < 3) throw GaitError(ErrorCode::NoCyclesFound, "sequence too short");

  auto mid_hip = [&](Eigen::Index f) -> Eigen::Vector3d {
    return 0.5 * (seq.position(f, at(index, Role::LeftHip)) + seq.position(f, at(index, Role::RightHip)));
  };
  const Eigen::Vector3d displacement = mid_hip(n - 1) - mid_hip(0);
  if (displacement.norm() < options.min_progression_m) {
    throw GaitError(ErrorCode::NoProgression, "net mid-hip displacement " + std::to_string(displacement.norm()) + " m");
  }
  const Eigen::Vector3d direction = displacement.normalized();
  const auto heel = at(index, side == LimbSide::Left ? Role::LeftHeel : Role::RightHeel);

  Eigen::VectorXd excursion(n);
  for (Eigen::Index f = 0; f < n; ++f) excursion(f) = (seq.position(f, heel) - mid_hip(f)).dot(direction);

  const auto distance = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::ceil(options.min_peak_separation_s * seq.sample_rate_hz())));
  const double range = excursion.maxCoeff() - excursion.minCoeff();

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index f = 1; f + 1 < n; ++f) {
    if (!(excursion(f) > excursion(f - 1) && excursion(f) >= excursion(f + 1))) continue;
    const Eigen::Index lo = std::max<Eigen::Index>(0, f - distance);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, f + distance);
    const double left_min = excursion.segment(lo, f - lo + 1).minCoeff();
    const double right_min = excursion.segment(f, hi - f + 1).minCoeff();
    if (excursion(f) - std::max(left_min, right_min) < options.min_prominence_fraction * range) continue;
    candidates.push_back(f);
  }

  // Highest peaks first; drop anything closer than `distance` to a kept peak.
  std::vector<Eigen::Index> order = candidates;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return excursion(a) > excursion(b); });
  std::vector<Eigen::Index> kept;
  for (const auto f : order) {
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](Eigen::Index k) { return std::abs(k - f) < distance; });
    if (clear) kept.push_back(f);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<GaitCycle> detect_gait_cycles(const KeypointSequence& seq, const SkeletonMap& map, LimbSide side,
                                          const CycleDetectionOptions& options) {
  const auto strikes = detect_heel_strikes(seq, map, side, options);
  std::vector<GaitCycle> cycles;
  for (std::size_t i = 0; i + 1 < strikes.size(); ++i) {
    const GaitCycle cycle{strikes[i], strikes[i + 1]};
    const double seconds = static_cast<double>(cycle.length()) / seq.sample_rate_hz();
    if (seconds < options.min_cycle_s || seconds > options.max_cycle_s) continue;
    cycles.push_back(cycle);
  }
  if (cycles.empty()) throw GaitError(ErrorCode::NoCyclesFound, "no valid gait cycle detected");
  return cycles;
}

std::pair<Eigen::Index, Eigen::Index> midstance_bounds(Eigen::Index length) {
  const auto l = static_cast<double>(length);
  return {static_cast<Eigen::Index>(std::lround(0.20 * l)), static_cast<Eigen::Index>(std::lround(0.45 * l))};
}

MidstanceStat midstance_mean(const JointAngleSeries& angles, const GaitCycle& cycle, Joint joint, LimbSide side) {
  if (cycle.start_frame < 0 || cycle.end_frame >= angles.num_frames() || cycle.end_frame <= cycle.start_frame) {
    throw GaitError(ErrorCode::WindowEmpty, "cycle outside the angle series");
  }
  if (cycle.length() < 5) throw GaitError(ErrorCode::WindowEmpty, "cycle shorter than 5 frames");
  const auto [lo, hi] = midstance_bounds(cycle.length());
  const auto channel = angles.sagittal(side, joint);
  const double mean = channel.segment(cycle.start_frame + lo, hi - lo + 1).mean();
  return {joint, mean};
}

double zscore(const MidstanceStat& stat, const NormativeStats& norm) {
  const auto& ref = norm[stat.joint];
  return (stat.mean_angle_deg - ref.mean_deg) / ref.sd_deg;
}

std::string_view to_string(CyclePolicy policy) {
  return policy == CyclePolicy::AllMean ? "all-mean" : "single-best";
}

CyclePolicy cycle_policy_from_string(std::string_view s) {
  if (s == "all-mean") return CyclePolicy::AllMean;
  if (s == "single-best") return CyclePolicy::SingleBest;
  throw GaitError(ErrorCode::ConfigError, "unknown cycle policy '" + std::string(s) + "'");
}

const GaitCycle& median_duration_cycle(const std::vector<GaitCycle>& cycles) {
  if (cycles.empty()) throw GaitError(ErrorCode::NoCyclesFound, "no cycles");
  std::vector<std::size_t> order(cycles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cycles[a].length() < cycles[b].length(); });
  const auto median_length = cycles[order[(order.size() - 1) / 2]].length();
  for (const auto& c : cycles) {
    if (c.length() == median_length) return c;
  }
  return cycles.front();
}

ZScorePair zscores_from_cycles(const JointAngleSeries& angles, const std::vector<GaitCycle>& cycles,
                               const NormativeStats& norm, LimbSide side, CyclePolicy policy) {
  if (cycles.empty()) throw GaitError(ErrorCode::NoCyclesFound, "no cycles");
  ZScorePair out;
  out.trial_id = angles.info.trial_id;
  out.limb_side = side;
  out.source = ZSource::BiomechBaseline;
  if (policy == CyclePolicy::SingleBest) {
    const auto& cycle = median_duration_cycle(cycles);
    out.knee_z = zscore(midstance_mean(angles, cycle, Joint::Knee, side), norm);
    out.ankle_z = zscore(midstance_mean(angles, cycle, Joint::Ankle, side), norm);
    return out;
  }
  double knee = 0.0;
  double ankle = 0.0;
  for (const auto& cycle : cycles) {
    knee += zscore(midstance_mean(angles, cycle, Joint::Knee, side), norm);
    ankle += zscore(midstance_mean(angles, cycle, Joint::Ankle, side), norm);
  }
  out.knee_z = knee / static_cast<double>(cycles.size());
  out.ankle_z = ankle / static_cast<double>(cycles.size());
  return out;
}

ZScorePair biomech_baseline(const KeypointSequence& seq, const SkeletonMap& map, const NormativeStats& norm,
                            LimbSide side, CyclePolicy policy) {
  const auto stages = preprocess(seq, map, PreprocessOptions{});
  const auto cycles = detect_gait_cycles(stages.filtered, map, side);
  const auto angles = compute_angle_channels(stages.normalized, map);
  auto z = zscores_from_cycles(angles, cycles, norm, side, policy);
  z.limb_side = seq.info().limb_side;
  return z;
}

}  // namespace gaitkit
