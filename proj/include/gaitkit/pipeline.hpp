#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gaitkit/classify.hpp"
#include "gaitkit/gait_metrics.hpp"
#include "gaitkit/io.hpp"
#include "gaitkit/kinematics.hpp"
#include "gaitkit/metrics.hpp"
#include "gaitkit/ml.hpp"
#include "gaitkit/preprocess.hpp"
#include "gaitkit/synth.hpp"

namespace gaitkit {

enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitConfig = 2 };

/// Config hash and seed stamped into every artifact.
struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// "gaitkit <command> config_hash=<hash> seed=<seed>"
  std::string comment() const;
};

/// Hashes the canonical dump of `config` (object keys are sorted).
Provenance make_provenance(const std::string& command, const nlohmann::json& config, std::uint64_t seed);

/// GAITKIT_SEED when set, otherwise `configured`. A malformed value is a
/// config error.
std::uint64_t resolve_seed(std::uint64_t configured);

/// Content hash of files, so configs that differ only in path spelling hash
/// alike.
std::string hash_files(const std::vector<std::filesystem::path>& files);

/// Runs body(i) for i in [0, n) on at most `workers` threads (0 = hardware
/// concurrency). Results must go to per-index slots; the first exception by
/// index is rethrown after all work stops.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& body) {
  if (n == 0) return;
  auto threads = workers > 0 ? static_cast<std::size_t>(workers)
                             : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- Per-trial processing -----------------------------------------------------

struct ProcessOptions {
  PreprocessOptions preprocess;
  CycleDetectionOptions detection;
  CyclePolicy cycle_policy = CyclePolicy::AllMean;
  ClassificationPolicy policy;
  /// Coordinate axis negated when a right limb is mirrored onto the left.
  int mirror_axis = 2;
};

nlohmann::json to_json(const ProcessOptions& options);

struct TrialResult {
  TrialInfo info;              // as loaded; limb_side is the assessed limb
  bool mirrored = false;
  Eigen::Index input_frames = 0;
  PreprocessResult stages;
  JointAngleSeries angles;     // canonical left-limb orientation
  std::vector<GaitCycle> cycles;
  std::vector<ZScorePair> cycle_zscores;
  ZScorePair zscores;
  Classification classification;
};

/// Mirror (right limbs) -> preprocess -> detect cycles -> angles -> z-scores
/// -> classify. The assessed limb is always analysed as the left.
TrialResult process_trial(const KeypointSequence& seq, const SkeletonMap& map, const NormativeStats& norm,
                          const ProcessOptions& options);

nlohmann::json trial_report_json(const TrialResult& result, const std::optional<TrialManifest>& manifest,
                                 const Provenance& provenance, double screen_threshold = 1.0);

/// Manifests listed by <dir>/dataset.json, or every *.json with a
/// "keypoints_file" key below `dir`, in path order.
std::vector<std::filesystem::path> discover_trials(const std::filesystem::path& dir);

// --- Commands -------------------------------------------------------------------
//
// Each returns an exit code. Invalid configuration throws GaitError, which the
// CLI maps to kExitConfig. Progress and per-trial failures go to `log`.

struct SynthConfig {
  CohortSpec cohort;
  std::filesystem::path normative;
  std::filesystem::path output_dir;
};
int cmd_synth(const SynthConfig& config, std::ostream& log);

struct ProcessConfig {
  std::filesystem::path input_dir;
  std::filesystem::path skeleton_map;
  std::filesystem::path normative;
  std::filesystem::path output_dir;
  ProcessOptions options;
  double screen_threshold = 1.0;
  std::uint64_t seed = 0;
  int workers = 0;
};
int cmd_process(const ProcessConfig& config, std::ostream& log);

struct CrossvalConfig {
  std::filesystem::path input_dir;
  std::filesystem::path skeleton_map;
  std::filesystem::path normative;
  /// Ground-truth z table; defaults to <input_dir>/labels.csv.
  std::filesystem::path truth;
  std::filesystem::path output_dir;
  ProcessOptions options;
  WindowingOptions windowing;
  EvaluationOptions evaluation;
  std::vector<double> lambda_grid = default_lambda_grid();
  int folds = 5;
  int repeats = 5;
  std::uint64_t seed = 0;
  int workers = 0;
};
int cmd_crossval(const CrossvalConfig& config, std::ostream& log);

struct EvaluateConfig {
  std::filesystem::path truth;
  std::filesystem::path predictions;
  /// Optional training labels for the label-density reference.
  std::filesystem::path train_labels;
  std::filesystem::path output_dir;
  EvaluationOptions evaluation;
  std::uint64_t seed = 0;
};
int cmd_evaluate(const EvaluateConfig& config, std::ostream& log);

struct ClassifyConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir;
  ClassificationPolicy policy;
  double screen_threshold = 1.0;
  std::uint64_t seed = 0;
};
int cmd_classify(const ClassifyConfig& config, std::ostream& log);

/// Writes report.json, report_table.csv, confusion.csv and the four plots.
void write_evaluation_artifacts(const std::filesystem::path& dir, const EvaluationReport& report,
                                const std::vector<ZScorePair>& truth, const std::vector<ZScorePair>& pred,
                                const Provenance& provenance);

}  // namespace gaitkit
