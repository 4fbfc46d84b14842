#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaitkit/gait_metrics.hpp"
#include "gaitkit/types.hpp"

namespace gaitkit {

// Test constants for the forward-kinematic leg, in metres.
namespace body {
inline constexpr double kThigh = 0.35;
inline constexpr double kShank = 0.32;
inline constexpr double kFoot = 0.20;
inline constexpr double kNeckSternum = 0.18;
inline constexpr double kHipHalfWidth = 0.09;
inline constexpr double kKneeHalfWidth = 0.045;
inline constexpr double kAnkleHalfWidth = 0.035;
inline constexpr double kTrunk = 0.45;
inline constexpr double kHipHeight = 0.75;
}  // namespace body

/// Joint angles of one limb in degrees, in the clinical sign convention of
/// the angle channels (flexion and dorsiflexion positive).
struct LimbPose {
  double hip_flex = 0.0;
  double hip_add = 0.0;
  double hip_rot = 0.0;
  double knee_flex = 0.0;
  double ankle_dorsi = 0.0;
};

/// World axes: x forward, y up, z to the subject's right.
struct BodyPose {
  Eigen::Vector3d mid_hip = Eigen::Vector3d(0.0, body::kHipHeight, 0.0);
  double pelvis_tilt = 0.0;
  double pelvis_obliquity = 0.0;
  double pelvis_rotation = 0.0;
  LimbPose left;
  LimbPose right;
};

/// Landmark positions for `pose`, 3 * 17 values in SkeletonMap::standard()
/// role order.
Eigen::RowVectorXd pose_landmarks(const BodyPose& pose);

KeypointSequence pose_sequence(const std::vector<BodyPose>& poses, double sample_rate_hz, TrialInfo info = {});

struct SynthSpec {
  double duration_s = 10.0;
  double sample_rate_hz = 60.0;
  double cadence_hz = 1.0;
  double knee_offset_sigma = 0.0;
  double ankle_offset_sigma = 0.0;
  double noise_mm = 0.0;
  std::uint64_t seed = 0;
  /// Gait phase of the target limb at t = 0; heel strike is phase 0.
  double phase_offset = 0.25;
  double speed_mps = 1.0;
  LimbSide limb_side = LimbSide::Left;
  std::string subject_id = "S01";
  std::string trial_id = "S01_T01";
};

struct SynthTrial {
  KeypointSequence sequence;
  ZScorePair truth;
  std::vector<long> strike_frames;
  std::vector<GaitCycle> cycles;
};

/// Cyclic joint trajectories for the target limb; the contralateral limb runs
/// half a cycle later with zero offsets. Knee and ankle mid-stance means
/// (continuous 20-45 % window) equal mu + offset * sigma.
LimbPose limb_pose_at(double phase, double knee_target_deg, double ankle_target_deg);

SynthTrial generate_trial(const SynthSpec& spec, const NormativeStats& norm);

struct ClassShare {
  GaitClass cls = GaitClass::Normal;
  double share = 1.0;
};

struct CohortSpec {
  int n_subjects = 10;
  int trials_per_subject = 3;
  std::vector<ClassShare> class_mix = {{GaitClass::Normal, 1.0}};
  std::uint64_t seed = 0;
  /// Distance kept from the class boundaries; 0 allows hard cases.
  double margin = 0.25;
  /// Per-trial uniform jitter around the subject's offsets.
  double trial_jitter = 0.1;
  double duration_s = 10.0;
  double sample_rate_hz = 60.0;
  double noise_mm = 0.0;
  double min_cadence_hz = 0.9;
  double max_cadence_hz = 1.1;
};

struct CohortTrial {
  SynthSpec spec;
  GaitClass requested = GaitClass::Normal;
  SynthTrial trial;
};

/// Subjects get classes by largest-remainder quotas of the mix, shuffled with
/// the seed. Throws ConfigError when the shares do not sum to 1.
std::vector<CohortTrial> generate_cohort(const CohortSpec& spec, const NormativeStats& norm);

/// "Normal:0.5,Crouch:0.5" or "all" for an even split over the seven classes.
std::vector<ClassShare> parse_class_mix(const std::string& text);

/// Writes trials/<id>.csv, trials/<id>.json, labels.csv and dataset.json.
/// Every file carries `stamp` as its provenance comment.
void write_dataset(const std::filesystem::path& dir, const std::vector<CohortTrial>& cohort, const std::string& stamp,
                   const nlohmann::json& stamp_fields);

// Deterministic random helpers; std distributions differ across standard
// libraries, these do not.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
double standard_normal(std::mt19937_64& rng);
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace gaitkit
