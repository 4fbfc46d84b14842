#include "gaitkit/types.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace gaitkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonMonotoneFrames: return "NonMonotoneFrames";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NonPositiveSd: return "NonPositiveSd";
    case ErrorCode::InvalidSequence: return "InvalidSequence";
    case ErrorCode::InvalidSkeletonMap: return "InvalidSkeletonMap";
    case ErrorCode::AllFramesEmpty: return "AllFramesEmpty";
    case ErrorCode::LandmarkNeverObserved: return "LandmarkNeverObserved";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case ErrorCode::MissingHipLandmarks: return "MissingHipLandmarks";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::DegenerateAxes: return "DegenerateAxes";
    case ErrorCode::NoCyclesFound: return "NoCyclesFound";
    case ErrorCode::NoProgression: return "NoProgression";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::TrialTooShort: return "TrialTooShort";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::FeatureDimensionMismatch: return "FeatureDimensionMismatch";
    case ErrorCode::EmptyTrial: return "EmptyTrial";
    case ErrorCode::TooFewSubjects: return "TooFewSubjects";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(LimbSide side) { return side == LimbSide::Left ? "left" : "right"; }

LimbSide limb_side_from_string(std::string_view s) {
  if (s == "left" || s == "L" || s == "l") return LimbSide::Left;
  if (s == "right" || s == "R" || s == "r") return LimbSide::Right;
  throw GaitError(ErrorCode::MissingField, "unknown limb side '" + std::string(s) + "'");
}

LimbSide opposite(LimbSide side) { return side == LimbSide::Left ? LimbSide::Right : LimbSide::Left; }

// ---------------------------------------------------------------------------
// KeypointSequence

KeypointSequence::KeypointSequence(std::vector<std::string> landmark_names, Eigen::MatrixXd coords,
                                   Mask valid, std::vector<long> frame_ids, double sample_rate_hz,
                                   TrialInfo info)
    : names_(std::move(landmark_names)),
      coords_(std::move(coords)),
      valid_(std::move(valid)),
      frame_ids_(std::move(frame_ids)),
      sample_rate_hz_(sample_rate_hz),
      info_(std::move(info)) {
  const auto n_landmarks = static_cast<Eigen::Index>(names_.size());
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw GaitError(ErrorCode::InvalidSequence, "sample rate must be positive");
  }
  if (coords_.cols() != 3 * n_landmarks || valid_.cols() != n_landmarks ||
      valid_.rows() != coords_.rows()) {
    throw GaitError(ErrorCode::InvalidSequence, "coordinate/mask shape does not match landmark count");
  }
  if (static_cast<Eigen::Index>(frame_ids_.size()) != coords_.rows()) {
    throw GaitError(ErrorCode::InvalidSequence, "frame id count does not match frame count");
  }
  for (std::size_t i = 1; i < frame_ids_.size(); ++i) {
    if (frame_ids_[i] <= frame_ids_[i - 1]) {
      throw GaitError(ErrorCode::NonMonotoneFrames, "frame ids must be strictly increasing");
    }
  }
  std::set<std::string> unique(names_.begin(), names_.end());
  if (unique.size() != names_.size()) {
    throw GaitError(ErrorCode::InvalidSequence, "duplicate landmark names");
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index f = 0; f < coords_.rows(); ++f) {
    for (Eigen::Index l = 0; l < n_landmarks; ++l) {
      auto block = coords_.block<1, 3>(f, 3 * l);
      if (valid_(f, l)) {
        if (!block.allFinite()) {
          throw GaitError(ErrorCode::InvalidSequence, "valid sample with non-finite coordinate");
        }
      } else {
        block.setConstant(nan);
      }
    }
  }
}

KeypointSequence KeypointSequence::with_coords(Eigen::MatrixXd coords, Mask valid) const {
  std::vector<long> ids = frame_ids_;
  if (coords.rows() != num_frames()) {
    ids.resize(static_cast<std::size_t>(coords.rows()));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<long>(i);
  }
  return with_coords(std::move(coords), std::move(valid), std::move(ids));
}

KeypointSequence KeypointSequence::with_coords(Eigen::MatrixXd coords, Mask valid,
                                               std::vector<long> frame_ids) const {
  return KeypointSequence(names_, std::move(coords), std::move(valid), std::move(frame_ids),
                          sample_rate_hz_, info_);
}

KeypointSequence KeypointSequence::with_info(TrialInfo info) const {
  KeypointSequence out = *this;
  out.info_ = std::move(info);
  return out;
}

FrameSample KeypointSequence::frame(Eigen::Index index) const {
  FrameSample sample;
  sample.positions.resize(3, num_landmarks());
  sample.valid.resize(static_cast<std::size_t>(num_landmarks()));
  for (Eigen::Index l = 0; l < num_landmarks(); ++l) {
    sample.positions.col(l) = position(index, l);
    sample.valid[static_cast<std::size_t>(l)] = valid_(index, l);
  }
  return sample;
}

std::optional<Eigen::Index> KeypointSequence::landmark_index(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Roles and skeleton map

namespace {

constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "left_hip",          "right_hip",          "left_knee_lateral",  "left_knee_medial",
    "right_knee_lateral", "right_knee_medial", "left_ankle_lateral", "left_ankle_medial",
    "right_ankle_lateral", "right_ankle_medial", "left_heel",        "right_heel",
    "left_toe",          "right_toe",          "mid_hip",            "backneck",
    "sternum",
};

}  // namespace

std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<Role> role_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    if (kRoleNames[i] == s) return static_cast<Role>(i);
  }
  return std::nullopt;
}

Role mirrored(Role role) {
  switch (role) {
    case Role::LeftHip: return Role::RightHip;
    case Role::RightHip: return Role::LeftHip;
    case Role::LeftKneeLateral: return Role::RightKneeLateral;
    case Role::LeftKneeMedial: return Role::RightKneeMedial;
    case Role::RightKneeLateral: return Role::LeftKneeLateral;
    case Role::RightKneeMedial: return Role::LeftKneeMedial;
    case Role::LeftAnkleLateral: return Role::RightAnkleLateral;
    case Role::LeftAnkleMedial: return Role::RightAnkleMedial;
    case Role::RightAnkleLateral: return Role::LeftAnkleLateral;
    case Role::RightAnkleMedial: return Role::LeftAnkleMedial;
    case Role::LeftHeel: return Role::RightHeel;
    case Role::RightHeel: return Role::LeftHeel;
    case Role::LeftToe: return Role::RightToe;
    case Role::RightToe: return Role::LeftToe;
    case Role::MidHip:
    case Role::BackNeck:
    case Role::Sternum: return role;
  }
  return role;
}

SkeletonMap::SkeletonMap(std::array<std::string, kRoleCount> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    if (names_[i].empty()) {
      throw GaitError(ErrorCode::InvalidSkeletonMap,
                      "role '" + std::string(kRoleNames[i]) + "' is not mapped");
    }
  }
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    const auto role = static_cast<Role>(i);
    const auto other = mirrored(role);
    if (other != role && names_[i] == names_[static_cast<std::size_t>(other)]) {
      throw GaitError(ErrorCode::InvalidSkeletonMap, "left and right roles share landmark '" + names_[i] + "'");
    }
  }
}

SkeletonIndex SkeletonMap::resolve(const std::vector<std::string>& landmark_names) const {
  SkeletonIndex index{};
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < landmark_names.size(); ++j) {
      if (landmark_names[j] == names_[i]) {
        index[i] = static_cast<Eigen::Index>(j);
        found = true;
        break;
      }
    }
    if (!found) {
      throw GaitError(ErrorCode::InvalidSkeletonMap, "landmark '" + names_[i] + "' for role '" +
                                                         std::string(kRoleNames[i]) + "' not in sequence");
    }
  }
  return index;
}

SkeletonMap SkeletonMap::standard() {
  return SkeletonMap({"lhip", "rhip", "lknee_lat", "lknee_med", "rknee_lat", "rknee_med", "lankle_lat",
                      "lankle_med", "rankle_lat", "rankle_med", "lheel", "rheel", "ltoe", "rtoe", "mhip",
                      "backneck", "sternum"});
}

// ---------------------------------------------------------------------------

NormativeStats::NormativeStats(JointNorm knee, JointNorm ankle) : knee_(knee), ankle_(ankle) {
  if (!(knee_.sd_deg > 0.0) || !(ankle_.sd_deg > 0.0)) {
    throw GaitError(ErrorCode::NonPositiveSd, "normative sd must be positive");
  }
  if (!std::isfinite(knee_.mean_deg) || !std::isfinite(ankle_.mean_deg) || !std::isfinite(knee_.sd_deg) ||
      !std::isfinite(ankle_.sd_deg)) {
    throw GaitError(ErrorCode::MissingField, "normative statistics must be finite");
  }
}

std::string_view to_string(ZSource source) {
  switch (source) {
    case ZSource::GroundTruth: return "ground_truth";
    case ZSource::BiomechBaseline: return "biomech_baseline";
    case ZSource::Predictor: return "predictor";
  }
  return "ground_truth";
}

ZSource zsource_from_string(std::string_view s) {
  if (s == "biomech_baseline") return ZSource::BiomechBaseline;
  if (s == "predictor") return ZSource::Predictor;
  return ZSource::GroundTruth;
}

namespace {

constexpr std::array<std::string_view, kGaitClassCount> kClassNames = {
    "Normal", "True Equinus", "Jump Gait", "Apparent Equinus", "Crouch", "Ankle Crouch", "Recurvatum",
    "Unclassified",
};

}  // namespace

std::string_view to_string(GaitClass cls) { return kClassNames[static_cast<std::size_t>(cls)]; }

std::optional<GaitClass> gait_class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kGaitClassCount; ++i) {
    if (kClassNames[i] == s) return static_cast<GaitClass>(i);
  }
  return std::nullopt;
}

}  // namespace gaitkit
