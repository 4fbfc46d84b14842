#pragma once

#include <utility>
#include <vector>

#include "gaitkit/kinematics.hpp"
#include "gaitkit/types.hpp"

namespace gaitkit {

/// Consecutive ipsilateral heel strikes, as frame indices into the sequence.
struct GaitCycle {
  Eigen::Index start_frame = 0;
  Eigen::Index end_frame = 0;

  Eigen::Index length() const { return end_frame - start_frame; }
};

struct CycleDetectionOptions {
  double min_peak_separation_s = 0.4;
  double min_cycle_s = 0.4;
  double max_cycle_s = 3.0;
  double min_progression_m = 0.2;
  /// Peaks must rise this fraction of the signal range above the lowest
  /// point within one separation distance on either side.
  double min_prominence_fraction = 0.2;
};

/// Heel strike frames: local maxima of the heel's excursion along the walking
/// direction relative to mid-hip. The walking direction is the net mid-hip
/// displacement, so the sequence must not be hip-centered.
std::vector<Eigen::Index> detect_heel_strikes(const KeypointSequence& seq, const SkeletonMap& map, LimbSide side,
                                              const CycleDetectionOptions& options = {});

std::vector<GaitCycle> detect_gait_cycles(const KeypointSequence& seq, const SkeletonMap& map, LimbSide side,
                                          const CycleDetectionOptions& options = {});

/// Inclusive frame offsets of the 20-45 % window for a cycle of `length`
/// frames, rounded to the nearest frame.
std::pair<Eigen::Index, Eigen::Index> midstance_bounds(Eigen::Index length);

struct MidstanceStat {
  Joint joint = Joint::Knee;
  double mean_angle_deg = 0.0;
};

/// Mean of the sagittal channel of `side` over the mid-stance window.
MidstanceStat midstance_mean(const JointAngleSeries& angles, const GaitCycle& cycle, Joint joint,
                             LimbSide side = LimbSide::Left);

double zscore(const MidstanceStat& stat, const NormativeStats& norm);

enum class CyclePolicy { AllMean, SingleBest };

std::string_view to_string(CyclePolicy policy);
CyclePolicy cycle_policy_from_string(std::string_view s);

/// Median-duration cycle; the earliest one on ties.
const GaitCycle& median_duration_cycle(const std::vector<GaitCycle>& cycles);

/// Per-cycle z-scores averaged over `cycles` (or taken from the
/// median-duration cycle under SingleBest).
ZScorePair zscores_from_cycles(const JointAngleSeries& angles, const std::vector<GaitCycle>& cycles,
                               const NormativeStats& norm, LimbSide side, CyclePolicy policy = CyclePolicy::AllMean);

/// Full non-learned route from a raw sequence: preprocess with default
/// options, detect cycles, compute angles and average per-cycle z-scores.
ZScorePair biomech_baseline(const KeypointSequence& seq, const SkeletonMap& map, const NormativeStats& norm,
                            LimbSide side, CyclePolicy policy = CyclePolicy::AllMean);

}  // namespace gaitkit
