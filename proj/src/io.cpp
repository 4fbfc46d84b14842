#include "gaitkit/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

namespace gaitkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  std::array<char, 64> buf{};
  auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto result = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return result.ec == std::errc() && result.ptr == cell.data() + cell.size() && std::isfinite(out);
}

bool parse_long(std::string_view cell, long& out) {
  auto result = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return result.ec == std::errc() && result.ptr == cell.data() + cell.size();
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw GaitError(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GaitError(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void write_comment(std::ostream& out, const std::string& comment) {
  if (comment.empty()) return;
  std::istringstream lines(comment);
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

}  // namespace

KeypointSequence parse_keypoint_csv(std::istream& in, double sample_rate_hz, TrialInfo info) {
  std::string line;
  if (!next_data_line(in, line)) throw GaitError(ErrorCode::EmptyFile, "no header line");

  const auto header = split_commas(trim(line));
  if (header.size() < 4 || (header.size() - 1) % 3 != 0 || trim(header[0]) != "frame") {
    throw GaitError(ErrorCode::MalformedHeader, "expected frame followed by x/y/z triples");
  }
  std::vector<std::string> names;
  static constexpr std::array<std::string_view, 3> kSuffix = {"_x", "_y", "_z"};
  for (std::size_t c = 1; c < header.size(); c += 3) {
    std::string base;
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const auto cell = trim(header[c + axis]);
      if (cell.size() <= 2 || cell.substr(cell.size() - 2) != kSuffix[axis]) {
        throw GaitError(ErrorCode::MalformedHeader, "column '" + std::string(cell) + "' lacks axis suffix " +
                                                        std::string(kSuffix[axis]));
      }
      std::string stem(cell.substr(0, cell.size() - 2));
      if (axis == 0) {
        base = stem;
      } else if (stem != base) {
        throw GaitError(ErrorCode::MalformedHeader, "inconsistent landmark name in '" + std::string(cell) + "'");
      }
    }
    names.push_back(base);
  }
  const auto n_landmarks = static_cast<Eigen::Index>(names.size());

  struct Row {
    long frame;
    Eigen::RowVectorXd coords;
    Eigen::Array<bool, 1, Eigen::Dynamic> valid;
  };
  std::vector<Row> rows;
  while (next_data_line(in, line)) {
    const auto cells = split_commas(trim(line));
    if (cells.size() != header.size()) {
      throw GaitError(ErrorCode::MalformedHeader, "row has " + std::to_string(cells.size()) + " cells, header has " +
                                                      std::to_string(header.size()));
    }
    Row row;
    if (!parse_long(trim(cells[0]), row.frame)) {
      throw GaitError(ErrorCode::MalformedHeader, "bad frame index '" + std::string(cells[0]) + "'");
    }
    if (!rows.empty() && row.frame <= rows.back().frame) {
      throw GaitError(ErrorCode::NonMonotoneFrames, "frame " + std::to_string(row.frame) + " after " +
                                                        std::to_string(rows.back().frame));
    }
    row.coords.setConstant(3 * n_landmarks, std::numeric_limits<double>::quiet_NaN());
    row.valid.setConstant(n_landmarks, false);
    for (Eigen::Index l = 0; l < n_landmarks; ++l) {
      int present = 0;
      for (int axis = 0; axis < 3; ++axis) {
        const auto cell = trim(cells[static_cast<std::size_t>(1 + 3 * l + axis)]);
        if (cell.empty()) continue;
        double value = 0.0;
        if (!parse_number(cell, value)) {
          throw GaitError(ErrorCode::MalformedHeader, "non-numeric coordinate '" + std::string(cell) + "'");
        }
        row.coords(3 * l + axis) = value;
        ++present;
      }
      // A partially filled triple is treated as missing.
      row.valid(l) = present == 3;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw GaitError(ErrorCode::EmptyFile, "no data rows");

  const long first = rows.front().frame;
  const long count = rows.back().frame - first + 1;
  Eigen::MatrixXd coords = Eigen::MatrixXd::Constant(count, 3 * n_landmarks, std::numeric_limits<double>::quiet_NaN());
  Mask valid = Mask::Constant(count, n_landmarks, false);
  std::vector<long> ids(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) ids[static_cast<std::size_t>(i)] = first + i;
  for (const auto& row : rows) {
    coords.row(row.frame - first) = row.coords;
    valid.row(row.frame - first) = row.valid;
  }
  return KeypointSequence(std::move(names), std::move(coords), std::move(valid), std::move(ids), sample_rate_hz,
                          std::move(info));
}

KeypointSequence parse_keypoint_csv(const fs::path& path, double sample_rate_hz, TrialInfo info) {
  auto in = open_in(path);
  return parse_keypoint_csv(in, sample_rate_hz, std::move(info));
}

void write_keypoint_csv(std::ostream& out, const KeypointSequence& seq, const std::string& comment) {
  write_comment(out, comment);
  out << "frame";
  for (const auto& name : seq.landmark_names()) out << ',' << name << "_x," << name << "_y," << name << "_z";
  out << '\n';
  for (Eigen::Index f = 0; f < seq.num_frames(); ++f) {
    out << seq.frame_ids()[static_cast<std::size_t>(f)];
    for (Eigen::Index l = 0; l < seq.num_landmarks(); ++l) {
      if (seq.is_valid(f, l)) {
        for (int axis = 0; axis < 3; ++axis) out << ',' << format_double(seq.coords()(f, 3 * l + axis));
      } else {
        out << ",,,";
      }
    }
    out << '\n';
  }
}

void write_keypoint_csv(const fs::path& path, const KeypointSequence& seq, const std::string& comment) {
  auto out = open_out(path);
  write_keypoint_csv(out, seq, comment);
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw GaitError(ErrorCode::MissingField, std::string("missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw GaitError(ErrorCode::MissingField, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

TrialManifest manifest_from_json(const json& j) {
  TrialManifest m;
  m.subject_id = required<std::string>(j, "subject_id");
  m.trial_id = required<std::string>(j, "trial_id");
  m.limb_side = limb_side_from_string(required<std::string>(j, "limb_side"));
  m.sample_rate_hz = required<double>(j, "sample_rate_hz");
  if (!(m.sample_rate_hz > 0.0)) throw GaitError(ErrorCode::MissingField, "sample_rate_hz must be positive");
  m.keypoints_file = required<std::string>(j, "keypoints_file");
  if (j.contains("strike_frames")) m.strike_frames = j.at("strike_frames").get<std::vector<long>>();
  return m;
}

json to_json(const TrialManifest& m) {
  json j;
  j["subject_id"] = m.subject_id;
  j["trial_id"] = m.trial_id;
  j["limb_side"] = std::string(to_string(m.limb_side));
  j["sample_rate_hz"] = m.sample_rate_hz;
  j["keypoints_file"] = m.keypoints_file;
  if (m.strike_frames) j["strike_frames"] = *m.strike_frames;
  return j;
}

TrialManifest load_manifest(const fs::path& path) { return manifest_from_json(read_json(path)); }

KeypointSequence load_trial(const fs::path& manifest_path) {
  const auto manifest = load_manifest(manifest_path);
  return parse_keypoint_csv(manifest_path.parent_path() / manifest.keypoints_file, manifest.sample_rate_hz,
                            manifest.info());
}

NormativeStats normative_from_json(const json& j) {
  auto joint = [&](const char* key) {
    if (!j.is_object() || !j.contains(key)) throw GaitError(ErrorCode::MissingField, std::string("missing '") + key + "'");
    const auto& block = j.at(key);
    return JointNorm{required<double>(block, "mean"), required<double>(block, "sd")};
  };
  const auto knee = joint("knee");
  const auto ankle = joint("ankle");
  return NormativeStats(knee, ankle);
}

json to_json(const NormativeStats& stats) {
  json j;
  j["units"] = "degrees";
  j["knee"] = {{"mean", stats.knee().mean_deg}, {"sd", stats.knee().sd_deg}};
  j["ankle"] = {{"mean", stats.ankle().mean_deg}, {"sd", stats.ankle().sd_deg}};
  return j;
}

NormativeStats load_normative_stats(const fs::path& path) { return normative_from_json(read_json(path)); }

SkeletonMap skeleton_map_from_json(const json& j) {
  const json& roles = j.contains("roles") ? j.at("roles") : j;
  std::array<std::string, kRoleCount> names;
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    const auto key = std::string(to_string(static_cast<Role>(i)));
    if (!roles.contains(key)) throw GaitError(ErrorCode::InvalidSkeletonMap, "role '" + key + "' is not mapped");
    names[i] = roles.at(key).get<std::string>();
  }
  return SkeletonMap(std::move(names));
}

json to_json(const SkeletonMap& map) {
  json roles = json::object();
  for (std::size_t i = 0; i < kRoleCount; ++i) roles[std::string(to_string(static_cast<Role>(i)))] = map.names()[i];
  return json{{"roles", roles}};
}

SkeletonMap load_skeleton_map(const fs::path& path) { return skeleton_map_from_json(read_json(path)); }

// ---------------------------------------------------------------------------

std::vector<ZScorePair> read_zscore_csv(std::istream& in, ZSource source) {
  std::string line;
  if (!next_data_line(in, line)) throw GaitError(ErrorCode::EmptyFile, "no header line");
  const auto header = split_commas(trim(line));
  if (header.size() != 4 || trim(header[0]) != "trial_id" || trim(header[1]) != "limb_side" ||
      trim(header[2]) != "knee_z" || trim(header[3]) != "ankle_z") {
    throw GaitError(ErrorCode::MalformedHeader, "expected trial_id,limb_side,knee_z,ankle_z");
  }
  std::vector<ZScorePair> pairs;
  while (next_data_line(in, line)) {
    const auto cells = split_commas(trim(line));
    if (cells.size() != 4) throw GaitError(ErrorCode::MalformedHeader, "z-score row needs 4 cells");
    ZScorePair p;
    p.trial_id = std::string(trim(cells[0]));
    p.limb_side = limb_side_from_string(trim(cells[1]));
    if (!parse_number(trim(cells[2]), p.knee_z) || !parse_number(trim(cells[3]), p.ankle_z)) {
      throw GaitError(ErrorCode::MalformedHeader, "non-numeric z-score in row for '" + p.trial_id + "'");
    }
    p.source = source;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<ZScorePair> read_zscore_csv(const fs::path& path, ZSource source) {
  auto in = open_in(path);
  return read_zscore_csv(in, source);
}

void write_zscore_csv(std::ostream& out, const std::vector<ZScorePair>& pairs, const std::string& comment) {
  write_comment(out, comment);
  out << "trial_id,limb_side,knee_z,ankle_z\n";
  for (const auto& p : pairs) {
    out << p.trial_id << ',' << to_string(p.limb_side) << ',' << format_double(p.knee_z) << ','
        << format_double(p.ankle_z) << '\n';
  }
}

void write_zscore_csv(const fs::path& path, const std::vector<ZScorePair>& pairs, const std::string& comment) {
  auto out = open_out(path);
  write_zscore_csv(out, pairs, comment);
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw GaitError(ErrorCode::MissingField, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace gaitkit
