#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "gaitkit/rotation.hpp"
#include "gaitkit/types.hpp"

namespace gaitkit {

enum class Segment { Pelvis, Thigh, ThighMedial, Shank, Foot };

std::string_view to_string(Segment segment);
AxisOrder axis_order(Segment segment);

struct SegmentFrame {
  Eigen::Matrix3d rotation;
  Segment segment;
  LimbSide side;
};

enum class AngleJoint { Hip, Knee, Ankle, KneeMHip };

inline constexpr int kAngleChannels = 24;

/// Column index of a joint's sagittal/frontal/transverse component.
/// Layout: R Hip, R Knee, R Ankle, R Knee-MHip, L Hip, L Knee, L Ankle,
/// L Knee-MHip; three components each.
constexpr int channel_index(LimbSide side, AngleJoint joint, int component) {
  return (side == LimbSide::Right ? 0 : 12) + 3 * static_cast<int>(joint) + component;
}

const std::array<std::string, kAngleChannels>& angle_channel_names();

/// 24 joint angle channels in degrees, one row per frame.
///
/// Sagittal components use clinical signs: hip and knee flexion positive,
/// ankle dorsiflexion positive and zero when the foot is perpendicular to
/// the shank. Frontal and transverse components of the left limb are negated
/// so both sides share anatomical sign conventions.
struct JointAngleSeries {
  Eigen::MatrixXd values;  // frames x 24
  double sample_rate_hz = 60.0;
  TrialInfo info;
  std::size_t gimbal_lock_count = 0;

  Eigen::Index num_frames() const { return values.rows(); }
  auto channel(int index) const { return values.col(index); }
  auto sagittal(LimbSide side, Joint joint) const {
    return values.col(channel_index(side, joint == Joint::Knee ? AngleJoint::Knee : AngleJoint::Ankle, 0));
  }
};

/// Segment frames for one frame of a preprocessed sequence. Medio-lateral
/// axes of both limbs point toward the subject's right.
struct LimbFrames {
  SegmentFrame pelvis;
  SegmentFrame thigh;
  SegmentFrame thigh_medial;
  SegmentFrame shank;
  SegmentFrame foot;
};

LimbFrames build_limb_frames(const KeypointSequence& seq, const SkeletonIndex& index, Eigen::Index frame,
                             LimbSide side);

JointAngleSeries compute_angle_channels(const KeypointSequence& seq, const SkeletonMap& map);

/// Reflects every landmark across the plane normal to `axis` (0=x, 1=y, 2=z)
/// and swaps the data of bilateral role pairs, so a right limb becomes a
/// left limb. The trial's limb side is flipped.
KeypointSequence mirror_limb(const KeypointSequence& seq, const SkeletonMap& map, int axis = 2);

void write_angles_csv(std::ostream& out, const JointAngleSeries& angles, const std::string& comment = {});
void write_angles_csv(const std::filesystem::path& path, const JointAngleSeries& angles,
                      const std::string& comment = {});

}  // namespace gaitkit
