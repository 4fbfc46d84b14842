#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/types.hpp"

namespace gaitkit {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// --- Keypoint CSV ----------------------------------------------------------
//
// Header: frame,<name>_x,<name>_y,<name>_z,...   Lines starting with '#' are
// comments. An empty coordinate cell marks the landmark missing in that frame.
// Gaps in the frame column are filled with all-missing frames.

KeypointSequence parse_keypoint_csv(std::istream& in, double sample_rate_hz, TrialInfo info = {});
KeypointSequence parse_keypoint_csv(const std::filesystem::path& path, double sample_rate_hz,
                                    TrialInfo info = {});

void write_keypoint_csv(std::ostream& out, const KeypointSequence& seq, const std::string& comment = {});
void write_keypoint_csv(const std::filesystem::path& path, const KeypointSequence& seq,
                        const std::string& comment = {});

// --- Trial manifest --------------------------------------------------------

struct TrialManifest {
  std::string subject_id;
  std::string trial_id;
  LimbSide limb_side = LimbSide::Left;
  double sample_rate_hz = 60.0;
  std::string keypoints_file;  // relative to the manifest's directory
  /// Present for synthetic trials: analytic heel-strike frames of the target limb.
  std::optional<std::vector<long>> strike_frames;

  TrialInfo info() const { return {subject_id, trial_id, limb_side}; }
};

TrialManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialManifest& manifest);
TrialManifest load_manifest(const std::filesystem::path& path);

/// Reads the manifest and the keypoint file it references.
KeypointSequence load_trial(const std::filesystem::path& manifest_path);

// --- Normative statistics and skeleton map ----------------------------------

NormativeStats normative_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NormativeStats& stats);
NormativeStats load_normative_stats(const std::filesystem::path& path);

SkeletonMap skeleton_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SkeletonMap& map);
SkeletonMap load_skeleton_map(const std::filesystem::path& path);

// --- Z-score tables ---------------------------------------------------------
//
// Header: trial_id,limb_side,knee_z,ankle_z

std::vector<ZScorePair> read_zscore_csv(const std::filesystem::path& path, ZSource source);
std::vector<ZScorePair> read_zscore_csv(std::istream& in, ZSource source);
void write_zscore_csv(std::ostream& out, const std::vector<ZScorePair>& pairs, const std::string& comment = {});
void write_zscore_csv(const std::filesystem::path& path, const std::vector<ZScorePair>& pairs,
                      const std::string& comment = {});

// --- Misc helpers -----------------------------------------------------------

nlohmann::json read_json(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit, rendered as 16 hex digits. Stable across platforms.
std::string fnv1a_hex(const std::string& data);

}  // namespace gaitkit
