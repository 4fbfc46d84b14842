#include "gaitkit/kinematics.hpp"

#include <fstream>
#include <utility>

#include "gaitkit/io.hpp"

namespace gaitkit {

std::string_view to_string(Segment segment) {
  switch (segment) {
    case Segment::Pelvis: return "pelvis";
    case Segment::Thigh: return "thigh";
    case Segment::ThighMedial: return "thigh_medial";
    case Segment::Shank: return "shank";
    case Segment::Foot: return "foot";
  }
  return "pelvis";
}

// The pelvis lists its medio-lateral axis first; the limb segments list the
// longitudinal (or progression) axis first.
AxisOrder axis_order(Segment segment) {
  return segment == Segment::Pelvis ? AxisOrder::XPrimary : AxisOrder::YPrimary;
}

const std::array<std::string, kAngleChannels>& angle_channel_names() {
  static const std::array<std::string, kAngleChannels> names = [] {
    std::array<std::string, kAngleChannels> out;
    const std::array<std::string, 4> joints = {"Hip", "Knee", "Ankle", "KneeMHip"};
    const std::array<std::array<std::string, 3>, 4> parts = {{{"flex", "add", "rot"},
                                                              {"flex", "add", "rot"},
                                                              {"dorsiflex", "inv", "abd"},
                                                              {"flex", "add", "rot"}}};
    for (int s = 0; s < 2; ++s) {
      const auto side = s == 0 ? LimbSide::Right : LimbSide::Left;
      const std::string prefix = s == 0 ? "R_" : "L_";
      for (int j = 0; j < 4; ++j) {
        for (int c = 0; c < 3; ++c) {
          out[static_cast<std::size_t>(channel_index(side, static_cast<AngleJoint>(j), c))] =
              prefix + joints[static_cast<std::size_t>(j)] + "_" + parts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
        }
      }
    }
    return out;
  }();
  return names;
}

namespace {

struct LimbRoles {
  Role hip, knee_lat, knee_med, ankle_lat, ankle_med, heel, toe;
};

LimbRoles roles_for(LimbSide side) {
  if (side == LimbSide::Left) {
    return {Role::LeftHip,         Role::LeftKneeLateral, Role::LeftKneeMedial, Role::LeftAnkleLateral,
            Role::LeftAnkleMedial, Role::LeftHeel,        Role::LeftToe};
  }
  return {Role::RightHip,         Role::RightKneeLateral, Role::RightKneeMedial, Role::RightAnkleLateral,
          Role::RightAnkleMedial, Role::RightHeel,        Role::RightToe};
}

SegmentFrame make_frame(const Eigen::Vector3d& x_axis, const Eigen::Vector3d& y_axis, Segment segment,
                        LimbSide side, Eigen::Index frame) {
  try {
    return {build_segment_frame(x_axis, y_axis, axis_order(segment)), segment, side};
  } catch (const GaitError& e) {
    throw GaitError(ErrorCode::DegenerateAxes, "frame " + std::to_string(frame) + ", " +
                                                   std::string(to_string(side)) + " " +
                                                   std::string(to_string(segment)) + ": " + e.what());
  }
}

struct ClinicalSign {
  double sagittal_sign;
  double sagittal_offset;
};

// Maps the x rotation of each relative rotation to clinical sign conventions.
// The foot frame's longitudinal axis is the heel-toe direction, so the
// neutral ankle sits at alpha = -90.
constexpr std::array<ClinicalSign, 4> kClinical = {{
    {1.0, 0.0},    // hip
    {-1.0, 0.0},   // knee
    {1.0, 90.0},   // ankle
    {1.0, 0.0},    // knee-MHip
}};

}  // namespace

LimbFrames build_limb_frames(const KeypointSequence& seq, const SkeletonIndex& index, Eigen::Index frame,
                             LimbSide side) {
  auto p = [&](Role role) -> Eigen::Vector3d { return seq.position(frame, at(index, role)); };
  const auto roles = roles_for(side);

  const Eigen::Vector3d left_hip = p(Role::LeftHip);
  const Eigen::Vector3d right_hip = p(Role::RightHip);
  const Eigen::Vector3d mid_hip = 0.5 * (left_hip + right_hip);
  const Eigen::Vector3d hip = p(roles.hip);
  const Eigen::Vector3d knee_med = p(roles.knee_med);
  const Eigen::Vector3d knee_center = 0.5 * (p(roles.knee_lat) + knee_med);
  const Eigen::Vector3d ankle_center = 0.5 * (p(roles.ankle_lat) + p(roles.ankle_med));

  // Medial -> lateral on the right limb, lateral -> medial on the left: both
  // point to the subject's right like the pelvis axis.
  const double ml_sign = side == LimbSide::Right ? 1.0 : -1.0;
  const Eigen::Vector3d knee_ml = ml_sign * (p(roles.knee_lat) - knee_med);
  const Eigen::Vector3d ankle_ml = ml_sign * (p(roles.ankle_lat) - p(roles.ankle_med));

  LimbFrames frames{
      make_frame(right_hip - left_hip, p(Role::BackNeck) - mid_hip, Segment::Pelvis, side, frame),
      make_frame(knee_ml, hip - knee_center, Segment::Thigh, side, frame),
      make_frame(knee_ml, hip - knee_med, Segment::ThighMedial, side, frame),
      make_frame(ankle_ml, knee_center - ankle_center, Segment::Shank, side, frame),
      make_frame(ankle_ml, p(roles.toe) - p(roles.heel), Segment::Foot, side, frame),
  };
  return frames;
}

JointAngleSeries compute_angle_channels(const KeypointSequence& seq, const SkeletonMap& map) {
  if (!seq.fully_valid()) throw GaitError(ErrorCode::InvalidSequence, "angle computation needs a fully valid sequence");
  const auto index = map.resolve(seq);
  JointAngleSeries out;
  out.values.resize(seq.num_frames(), kAngleChannels);
  out.sample_rate_hz = seq.sample_rate_hz();
  out.info = seq.info();

  for (Eigen::Index f = 0; f < seq.num_frames(); ++f) {
    for (const auto side : {LimbSide::Right, LimbSide::Left}) {
      const auto frames = build_limb_frames(seq, index, f, side);
      const std::array<std::pair<const SegmentFrame*, const SegmentFrame*>, 4> joints = {{
          {&frames.pelvis, &frames.thigh},
          {&frames.thigh, &frames.shank},
          {&frames.shank, &frames.foot},
          {&frames.pelvis, &frames.thigh_medial},
      }};
      const double side_sign = side == LimbSide::Right ? 1.0 : -1.0;
      for (std::size_t j = 0; j < joints.size(); ++j) {
        const auto euler = euler_xyz(relative_rotation(joints[j].first->rotation, joints[j].second->rotation));
        if (euler.gimbal_locked) ++out.gimbal_lock_count;
        const auto joint = static_cast<AngleJoint>(j);
        out.values(f, channel_index(side, joint, 0)) =
            kClinical[j].sagittal_sign * euler.alpha + kClinical[j].sagittal_offset;
        out.values(f, channel_index(side, joint, 1)) = side_sign * euler.beta;
        out.values(f, channel_index(side, joint, 2)) = side_sign * euler.gamma;
      }
    }
  }
  return out;
}

KeypointSequence mirror_limb(const KeypointSequence& seq, const SkeletonMap& map, int axis) {
  if (axis < 0 || axis > 2) throw GaitError(ErrorCode::ConfigError, "mirror axis must be 0, 1 or 2");
  const auto index = map.resolve(seq);
  Eigen::MatrixXd coords = seq.coords();
  Mask valid = seq.valid();
  for (Eigen::Index l = 0; l < seq.num_landmarks(); ++l) coords.col(3 * l + axis) *= -1.0;

  for (std::size_t r = 0; r < kRoleCount; ++r) {
    const auto role = static_cast<Role>(r);
    const auto other = mirrored(role);
    if (static_cast<std::size_t>(other) <= r) continue;
    const auto a = at(index, role);
    const auto b = at(index, other);
    const Eigen::MatrixXd tmp = coords.middleCols<3>(3 * a);
    coords.middleCols<3>(3 * a) = coords.middleCols<3>(3 * b);
    coords.middleCols<3>(3 * b) = tmp;
    const Mask tmp_valid = valid.col(a);
    valid.col(a) = valid.col(b);
    valid.col(b) = tmp_valid;
  }
  auto info = seq.info();
  info.limb_side = opposite(info.limb_side);
  return KeypointSequence(seq.landmark_names(), std::move(coords), std::move(valid), seq.frame_ids(),
                          seq.sample_rate_hz(), std::move(info));
}

void write_angles_csv(std::ostream& out, const JointAngleSeries& angles, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "frame";
  for (const auto& name : angle_channel_names()) out << ',' << name;
  out << '\n';
  for (Eigen::Index f = 0; f < angles.values.rows(); ++f) {
    out << f;
    for (Eigen::Index c = 0; c < angles.values.cols(); ++c) out << ',' << format_double(angles.values(f, c));
    out << '\n';
  }
}

void write_angles_csv(const std::filesystem::path& path, const JointAngleSeries& angles, const std::string& comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GaitError(ErrorCode::Io, "cannot write " + path.string());
  write_angles_csv(out, angles, comment);
}

}  // namespace gaitkit
