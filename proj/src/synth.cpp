#include "gaitkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gaitkit/classify.hpp"
#include "gaitkit/io.hpp"
#include "gaitkit/rotation.hpp"

namespace gaitkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kHipMean = 15.0;
constexpr double kHipAmp = 20.0;
constexpr double kKneeAmp = 20.0;
constexpr double kAnkleAmp = 8.0;
constexpr double kHipAddAmp = 3.0;
constexpr double kHipRotAmp = 4.0;

// Mean of cos(2 pi p) over p in [0.20, 0.45].
const double kCosWindowMean =
    (std::sin(2.0 * std::numbers::pi * 0.45) - std::sin(2.0 * std::numbers::pi * 0.20)) / (2.0 * std::numbers::pi * 0.25);

// Segment frame at neutral: columns are right, up, backward.
Eigen::Matrix3d neutral_frame() {
  Eigen::Matrix3d r;
  r.col(0) = Eigen::Vector3d::UnitZ();
  r.col(1) = Eigen::Vector3d::UnitY();
  r.col(2) = -Eigen::Vector3d::UnitX();
  return r;
}

Eigen::Matrix3d rot_x(double deg) { return compose_xyz(deg, 0.0, 0.0); }

void put(Eigen::RowVectorXd& row, Role role, const Eigen::Vector3d& p) {
  row.segment<3>(3 * static_cast<Eigen::Index>(role)) = p.transpose();
}

void put_limb(Eigen::RowVectorXd& row, const Eigen::Matrix3d& pelvis, const Eigen::Vector3d& hip,
              const LimbPose& pose, LimbSide side) {
  const double s = side == LimbSide::Right ? 1.0 : -1.0;
  const Eigen::Matrix3d thigh = pelvis * compose_xyz(pose.hip_flex, s * pose.hip_add, s * pose.hip_rot);
  const Eigen::Matrix3d shank = thigh * rot_x(-pose.knee_flex);
  const Eigen::Matrix3d foot = shank * rot_x(pose.ankle_dorsi - 90.0);

  const Eigen::Vector3d knee = hip - body::kThigh * thigh.col(1);
  const Eigen::Vector3d ankle = knee - body::kShank * shank.col(1);
  const Eigen::Vector3d heel = ankle - 0.05 * foot.col(1) - 0.06 * foot.col(2);
  const Eigen::Vector3d toe = heel + body::kFoot * foot.col(1);

  const bool left = side == LimbSide::Left;
  put(row, left ? Role::LeftHip : Role::RightHip, hip);
  put(row, left ? Role::LeftKneeLateral : Role::RightKneeLateral, knee + s * body::kKneeHalfWidth * thigh.col(0));
  put(row, left ? Role::LeftKneeMedial : Role::RightKneeMedial, knee - s * body::kKneeHalfWidth * thigh.col(0));
  put(row, left ? Role::LeftAnkleLateral : Role::RightAnkleLateral, ankle + s * body::kAnkleHalfWidth * shank.col(0));
  put(row, left ? Role::LeftAnkleMedial : Role::RightAnkleMedial, ankle - s * body::kAnkleHalfWidth * shank.col(0));
  put(row, left ? Role::LeftHeel : Role::RightHeel, heel);
  put(row, left ? Role::LeftToe : Role::RightToe, toe);
}

double wrap_phase(double p) { return p - std::floor(p); }

}  // namespace

Eigen::RowVectorXd pose_landmarks(const BodyPose& pose) {
  Eigen::RowVectorXd row(3 * static_cast<Eigen::Index>(kRoleCount));
  const Eigen::Matrix3d pelvis =
      neutral_frame() * compose_xyz(pose.pelvis_tilt, pose.pelvis_obliquity, pose.pelvis_rotation);
  const Eigen::Vector3d& mid = pose.mid_hip;
  const Eigen::Vector3d right_hip = mid + body::kHipHalfWidth * pelvis.col(0);
  const Eigen::Vector3d left_hip = mid - body::kHipHalfWidth * pelvis.col(0);
  const Eigen::Vector3d neck = mid + body::kTrunk * pelvis.col(1);

  put(row, Role::MidHip, mid);
  put(row, Role::BackNeck, neck);
  put(row, Role::Sternum, neck - body::kNeckSternum * pelvis.col(2));
  put_limb(row, pelvis, left_hip, pose.left, LimbSide::Left);
  put_limb(row, pelvis, right_hip, pose.right, LimbSide::Right);
  return row;
}

KeypointSequence pose_sequence(const std::vector<BodyPose>& poses, double sample_rate_hz, TrialInfo info) {
  const auto names = SkeletonMap::standard().names();
  const auto n = static_cast<Eigen::Index>(poses.size());
  Eigen::MatrixXd coords(n, 3 * static_cast<Eigen::Index>(kRoleCount));
  for (Eigen::Index f = 0; f < n; ++f) coords.row(f) = pose_landmarks(poses[static_cast<std::size_t>(f)]);
  std::vector<long> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0L);
  return KeypointSequence(std::vector<std::string>(names.begin(), names.end()), std::move(coords),
                          Mask::Constant(n, static_cast<Eigen::Index>(kRoleCount), true), std::move(ids),
                          sample_rate_hz, std::move(info));
}

LimbPose limb_pose_at(double phase, double knee_target_deg, double ankle_target_deg) {
  const double c = std::cos(2.0 * std::numbers::pi * phase);
  LimbPose pose;
  pose.hip_flex = kHipMean + kHipAmp * c;
  pose.hip_add = kHipAddAmp * c;
  pose.hip_rot = kHipRotAmp * c;
  pose.knee_flex = knee_target_deg + kKneeAmp * kCosWindowMean - kKneeAmp * c;
  pose.ankle_dorsi = ankle_target_deg - kAnkleAmp * kCosWindowMean + kAnkleAmp * c;
  return pose;
}

SynthTrial generate_trial(const SynthSpec& spec, const NormativeStats& norm) {
  if (!(spec.sample_rate_hz > 0.0) || !(spec.cadence_hz > 0.0)) {
    throw GaitError(ErrorCode::ConfigError, "sample rate and cadence must be positive");
  }
  if (spec.duration_s * spec.cadence_hz < 2.0) {
    throw GaitError(ErrorCode::ConfigError, "duration must cover at least two cycles");
  }
  if (spec.noise_mm < 0.0) throw GaitError(ErrorCode::ConfigError, "noise must be non-negative");

  const auto n = static_cast<Eigen::Index>(std::llround(spec.duration_s * spec.sample_rate_hz));
  const double knee_target = norm.knee().mean_deg + spec.knee_offset_sigma * norm.knee().sd_deg;
  const double ankle_target = norm.ankle().mean_deg + spec.ankle_offset_sigma * norm.ankle().sd_deg;
  const bool target_left = spec.limb_side == LimbSide::Left;

  std::vector<BodyPose> poses(static_cast<std::size_t>(n));
  for (Eigen::Index f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / spec.sample_rate_hz;
    const double phase = spec.cadence_hz * t + spec.phase_offset;
    const double c = std::cos(2.0 * std::numbers::pi * phase);
    auto& pose = poses[static_cast<std::size_t>(f)];
    pose.mid_hip = Eigen::Vector3d(spec.speed_mps * t, body::kHipHeight, 0.0);
    pose.pelvis_tilt = 2.0 * std::cos(4.0 * std::numbers::pi * phase);
    pose.pelvis_obliquity = 3.0 * c;
    pose.pelvis_rotation = 4.0 * c;
    const LimbPose target = limb_pose_at(phase, knee_target, ankle_target);
    const LimbPose other = limb_pose_at(phase + 0.5, norm.knee().mean_deg, norm.ankle().mean_deg);
    pose.left = target_left ? target : other;
    pose.right = target_left ? other : target;
  }
  auto seq = pose_sequence(poses, spec.sample_rate_hz, {spec.subject_id, spec.trial_id, spec.limb_side});

  if (spec.noise_mm > 0.0) {
    auto rng = derived_rng(spec.seed, 0);
    Eigen::MatrixXd coords = seq.coords();
    const double sd = spec.noise_mm / 1000.0;
    for (Eigen::Index f = 0; f < coords.rows(); ++f) {
      for (Eigen::Index c = 0; c < coords.cols(); ++c) coords(f, c) += sd * standard_normal(rng);
    }
    seq = seq.with_coords(std::move(coords), seq.valid());
  }

  SynthTrial out{std::move(seq), {}, {}, {}};
  out.truth.knee_z = spec.knee_offset_sigma;
  out.truth.ankle_z = spec.ankle_offset_sigma;
  out.truth.trial_id = spec.trial_id;
  out.truth.limb_side = spec.limb_side;
  out.truth.source = ZSource::GroundTruth;

  // Strikes sit at integer phase; the first one is at t = (1 - phase_offset) / cadence.
  const double first = wrap_phase(1.0 - spec.phase_offset);
  for (double k = first;; k += 1.0) {
    const double frame = k / spec.cadence_hz * spec.sample_rate_hz;
    const auto f = std::lround(frame);
    // A peak on the first or last frame has no neighbour and is not detectable.
    if (f < 1) continue;
    if (f >= n - 1) break;
    out.strike_frames.push_back(f);
  }
  for (std::size_t i = 1; i < out.strike_frames.size(); ++i) {
    out.cycles.push_back({out.strike_frames[i - 1], out.strike_frames[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ClassShare> parse_class_mix(const std::string& text) {
  std::vector<ClassShare> mix;
  if (text == "all") {
    for (const auto cls : kRuleClasses) mix.push_back({cls, 1.0 / static_cast<double>(kRuleClasses.size())});
    return mix;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(',', pos), text.size());
    const auto item = text.substr(pos, end - pos);
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw GaitError(ErrorCode::ConfigError, "class mix item '" + item + "' lacks ':'");
    const auto cls = gait_class_from_string(item.substr(0, colon));
    if (!cls || *cls == GaitClass::Unclassified) {
      throw GaitError(ErrorCode::ConfigError, "unknown class '" + item.substr(0, colon) + "'");
    }
    double share = 0.0;
    try {
      share = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw GaitError(ErrorCode::ConfigError, "bad share in '" + item + "'");
    }
    mix.push_back({*cls, share});
    pos = end + 1;
  }
  return mix;
}

namespace {

std::vector<GaitClass> subject_classes(const std::vector<ClassShare>& mix, int n, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& m : mix) {
    if (m.share < 0.0) throw GaitError(ErrorCode::ConfigError, "negative class share");
    total += m.share;
  }
  if (mix.empty() || std::abs(total - 1.0) > 1e-6) {
    throw GaitError(ErrorCode::ConfigError, "class mix must sum to 1 (got " + format_double(total) + ")");
  }
  std::vector<long> counts(mix.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double quota = mix[i].share * n;
    counts[i] = static_cast<long>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];

  std::vector<GaitClass> classes;
  for (std::size_t i = 0; i < mix.size(); ++i) classes.insert(classes.end(), static_cast<std::size_t>(counts[i]), mix[i].cls);
  // Fisher-Yates with the portable uniform helper.
  for (std::size_t i = classes.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(classes[i - 1], classes[std::min(j, i - 1)]);
  }
  return classes;
}

// Samples a point inside the region with room for the per-trial jitter.
double sample_axis(double lo, double hi, double margin, double jitter, std::mt19937_64& rng) {
  const double a = std::isfinite(lo) ? lo + margin + jitter : -3.0 + jitter;
  const double b = std::isfinite(hi) ? hi - margin - jitter : 3.0 - jitter;
  if (a > b) throw GaitError(ErrorCode::ConfigError, "margin and jitter leave no room inside the class region");
  return uniform(rng, a, b);
}

std::string padded(int value, int width) {
  auto s = std::to_string(value);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

std::vector<CohortTrial> generate_cohort(const CohortSpec& spec, const NormativeStats& norm) {
  if (spec.n_subjects < 1 || spec.trials_per_subject < 1) {
    throw GaitError(ErrorCode::ConfigError, "cohort needs at least one subject and one trial");
  }
  if (spec.margin < 0.0 || spec.trial_jitter < 0.0) throw GaitError(ErrorCode::ConfigError, "negative margin or jitter");
  auto rng = derived_rng(spec.seed, 0);
  const auto classes = subject_classes(spec.class_mix, spec.n_subjects, rng);
  const int width = std::max(2, static_cast<int>(std::to_string(spec.n_subjects).size()));

  std::vector<std::pair<SynthSpec, GaitClass>> specs;
  for (int s = 0; s < spec.n_subjects; ++s) {
    auto subject_rng = derived_rng(spec.seed, 1000 + static_cast<std::uint64_t>(s));
    const auto cls = classes[static_cast<std::size_t>(s)];
    const auto region = region_of(cls);
    const double knee = sample_axis(region.knee_lo, region.knee_hi, spec.margin, spec.trial_jitter, subject_rng);
    const double ankle = sample_axis(region.ankle_lo, region.ankle_hi, spec.margin, spec.trial_jitter, subject_rng);
    const double cadence = uniform(subject_rng, spec.min_cadence_hz, spec.max_cadence_hz);
    const double speed = uniform(subject_rng, 0.8, 1.2);
    const auto subject_id = "S" + padded(s + 1, width);
    for (int t = 0; t < spec.trials_per_subject; ++t) {
      SynthSpec ts;
      ts.duration_s = spec.duration_s;
      ts.sample_rate_hz = spec.sample_rate_hz;
      ts.cadence_hz = cadence;
      ts.speed_mps = speed;
      ts.noise_mm = spec.noise_mm;
      ts.knee_offset_sigma = knee + uniform(subject_rng, -spec.trial_jitter, spec.trial_jitter);
      ts.ankle_offset_sigma = ankle + uniform(subject_rng, -spec.trial_jitter, spec.trial_jitter);
      ts.phase_offset = 0.25;
      ts.limb_side = t % 2 == 0 ? LimbSide::Left : LimbSide::Right;
      ts.subject_id = subject_id;
      ts.trial_id = subject_id + "_T" + padded(t + 1, 2);
      ts.seed = derived_rng(spec.seed, 1'000'000 + static_cast<std::uint64_t>(s) * 1000 + static_cast<std::uint64_t>(t))();
      specs.emplace_back(std::move(ts), cls);
    }
  }
  std::vector<CohortTrial> cohort;
  cohort.reserve(specs.size());
  for (auto& [ts, cls] : specs) {
    auto trial = generate_trial(ts, norm);
    cohort.push_back({std::move(ts), cls, std::move(trial)});
  }
  return cohort;
}

void write_dataset(const fs::path& dir, const std::vector<CohortTrial>& cohort, const std::string& stamp,
                   const json& stamp_fields) {
  json index = stamp_fields;
  json trials = json::array();
  std::vector<ZScorePair> labels;
  for (const auto& entry : cohort) {
    const auto& spec = entry.spec;
    const auto csv_name = spec.trial_id + ".csv";
    write_keypoint_csv(dir / "trials" / csv_name, entry.trial.sequence, stamp);
    TrialManifest manifest{spec.subject_id, spec.trial_id, spec.limb_side, spec.sample_rate_hz, csv_name,
                           entry.trial.strike_frames};
    json m = to_json(manifest);
    m.update(stamp_fields);
    m["synth"] = {{"requested_class", std::string(to_string(entry.requested))},
                  {"knee_offset_sigma", spec.knee_offset_sigma},
                  {"ankle_offset_sigma", spec.ankle_offset_sigma},
                  {"cadence_hz", spec.cadence_hz},
                  {"speed_mps", spec.speed_mps},
                  {"noise_mm", spec.noise_mm},
                  {"seed", spec.seed}};
    write_json(dir / "trials" / (spec.trial_id + ".json"), m);
    trials.push_back("trials/" + spec.trial_id + ".json");
    labels.push_back(entry.trial.truth);
  }
  write_zscore_csv(dir / "labels.csv", labels, stamp);
  index["trials"] = trials;
  index["labels"] = "labels.csv";
  write_json(dir / "dataset.json", index);
}

// ---------------------------------------------------------------------------

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller, one draw per call.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace gaitkit
