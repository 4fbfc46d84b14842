#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/error.hpp"

namespace gaitkit {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class LimbSide { Left, Right };
enum class Joint { Knee, Ankle };

std::string_view to_string(LimbSide side);
LimbSide limb_side_from_string(std::string_view s);
LimbSide opposite(LimbSide side);

struct TrialInfo {
  std::string subject_id;
  std::string trial_id;
  LimbSide limb_side = LimbSide::Left;
};

/// One frame of a KeypointSequence. Missing landmarks have valid=false and NaN
/// coordinates.
struct FrameSample {
  Eigen::Matrix3Xd positions;
  std::vector<bool> valid;
};

/// Per-frame 3D landmark positions in meters.
///
/// Storage is a frames x (3 * landmarks) matrix with columns laid out as
/// [l0.x, l0.y, l0.z, l1.x, ...] plus a frames x landmarks validity mask.
/// Invalid samples always hold NaN; valid samples are always finite.
class KeypointSequence {
 public:
  KeypointSequence(std::vector<std::string> landmark_names, Eigen::MatrixXd coords, Mask valid,
                   std::vector<long> frame_ids, double sample_rate_hz, TrialInfo info);

  /// Same metadata, new coordinates. Frame ids are kept when the frame count
  /// matches and renumbered 0..n-1 otherwise (use the overload to pass them).
  KeypointSequence with_coords(Eigen::MatrixXd coords, Mask valid) const;
  KeypointSequence with_coords(Eigen::MatrixXd coords, Mask valid, std::vector<long> frame_ids) const;
  KeypointSequence with_info(TrialInfo info) const;

  Eigen::Index num_frames() const { return coords_.rows(); }
  Eigen::Index num_landmarks() const { return static_cast<Eigen::Index>(names_.size()); }
  double sample_rate_hz() const { return sample_rate_hz_; }
  const std::vector<std::string>& landmark_names() const { return names_; }
  const std::vector<long>& frame_ids() const { return frame_ids_; }
  const TrialInfo& info() const { return info_; }

  const Eigen::MatrixXd& coords() const { return coords_; }
  const Mask& valid() const { return valid_; }

  bool is_valid(Eigen::Index frame, Eigen::Index landmark) const { return valid_(frame, landmark); }
  Eigen::Vector3d position(Eigen::Index frame, Eigen::Index landmark) const {
    return coords_.block<1, 3>(frame, 3 * landmark).transpose();
  }
  FrameSample frame(Eigen::Index index) const;

  std::optional<Eigen::Index> landmark_index(std::string_view name) const;
  std::size_t valid_count() const { return static_cast<std::size_t>(valid_.count()); }
  bool fully_valid() const { return valid_.all(); }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd coords_;
  Mask valid_;
  std::vector<long> frame_ids_;
  double sample_rate_hz_;
  TrialInfo info_;
};

/// The 17 anatomical roles the pipeline needs.
enum class Role : std::size_t {
  LeftHip,
  RightHip,
  LeftKneeLateral,
  LeftKneeMedial,
  RightKneeLateral,
  RightKneeMedial,
  LeftAnkleLateral,
  LeftAnkleMedial,
  RightAnkleLateral,
  RightAnkleMedial,
  LeftHeel,
  RightHeel,
  LeftToe,
  RightToe,
  MidHip,
  BackNeck,
  Sternum,
};

inline constexpr std::size_t kRoleCount = 17;

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view s);
/// Bilateral counterpart of a role; midline roles map to themselves.
Role mirrored(Role role);

/// Landmark indices for every role, valid for one landmark name list.
using SkeletonIndex = std::array<Eigen::Index, kRoleCount>;

/// Role -> landmark name. Construction only checks that every role is named;
/// resolve() checks the names against a concrete sequence.
class SkeletonMap {
 public:
  explicit SkeletonMap(std::array<std::string, kRoleCount> names);

  const std::string& name(Role role) const { return names_[static_cast<std::size_t>(role)]; }
  const std::array<std::string, kRoleCount>& names() const { return names_; }

  SkeletonIndex resolve(const std::vector<std::string>& landmark_names) const;
  SkeletonIndex resolve(const KeypointSequence& seq) const { return resolve(seq.landmark_names()); }

  /// The landmark naming written by the synthetic generator.
  static SkeletonMap standard();

 private:
  std::array<std::string, kRoleCount> names_;
};

inline Eigen::Index at(const SkeletonIndex& index, Role role) {
  return index[static_cast<std::size_t>(role)];
}

struct JointNorm {
  double mean_deg = 0.0;
  double sd_deg = 1.0;
};

/// Typically-developing reference statistics for the sagittal knee and ankle.
class NormativeStats {
 public:
  NormativeStats(JointNorm knee, JointNorm ankle);

  const JointNorm& knee() const { return knee_; }
  const JointNorm& ankle() const { return ankle_; }
  const JointNorm& operator[](Joint joint) const { return joint == Joint::Knee ? knee_ : ankle_; }

 private:
  JointNorm knee_;
  JointNorm ankle_;
};

enum class ZSource { GroundTruth, BiomechBaseline, Predictor };

std::string_view to_string(ZSource source);
ZSource zsource_from_string(std::string_view s);

struct ZScorePair {
  double knee_z = 0.0;
  double ankle_z = 0.0;
  std::string trial_id;
  LimbSide limb_side = LimbSide::Left;
  ZSource source = ZSource::GroundTruth;

  double operator[](Joint joint) const { return joint == Joint::Knee ? knee_z : ankle_z; }
};

/// Rodda-Graham sagittal gait patterns. Order follows the rule table.
enum class GaitClass {
  Normal,
  TrueEquinus,
  Jump,
  ApparentEquinus,
  Crouch,
  AnkleCrouch,
  Recurvatum,
  Unclassified,
};

inline constexpr std::size_t kGaitClassCount = 8;
inline constexpr std::array<GaitClass, 7> kRuleClasses = {
    GaitClass::Normal, GaitClass::TrueEquinus, GaitClass::Jump,       GaitClass::ApparentEquinus,
    GaitClass::Crouch, GaitClass::AnkleCrouch, GaitClass::Recurvatum,
};

std::string_view to_string(GaitClass cls);
std::optional<GaitClass> gait_class_from_string(std::string_view s);

}  // namespace gaitkit
