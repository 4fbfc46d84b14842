#include "gaitkit/pipeline.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gaitkit/svg.hpp"

namespace gaitkit {

namespace fs = std::filesystem;
using nlohmann::json;

// --- Provenance -------------------------------------------------------------------

json Provenance::to_json() const {
  return {{"tool", "gaitkit"}, {"command", command}, {"config_hash", config_hash}, {"seed", seed}};
}

std::string Provenance::comment() const {
  return "gaitkit " + command + " config_hash=" + config_hash + " seed=" + std::to_string(seed);
}

Provenance make_provenance(const std::string& command, const json& config, std::uint64_t seed) {
  json keyed = config;
  keyed["command"] = command;
  keyed["seed"] = seed;
  return {command, fnv1a_hex(keyed.dump()), seed};
}

std::uint64_t resolve_seed(std::uint64_t configured) {
  const char* env = std::getenv("GAITKIT_SEED");
  if (env == nullptr || *env == '\0') return configured;
  const std::string_view text(env);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw GaitError(ErrorCode::ConfigError, "GAITKIT_SEED must be a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string hash_files(const std::vector<fs::path>& files) {
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw GaitError(ErrorCode::Io, "cannot read " + f.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    all += fnv1a_hex(buf.str());
    all += ';';
  }
  return fnv1a_hex(all);
}

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw GaitError(ErrorCode::ConfigError, what + " is required");
  if (!fs::is_regular_file(path)) throw GaitError(ErrorCode::ConfigError, what + " not found: " + path.string());
}

void require_dir(const fs::path& path, const std::string& what) {
  if (path.empty()) throw GaitError(ErrorCode::ConfigError, what + " is required");
  if (!fs::is_directory(path)) throw GaitError(ErrorCode::ConfigError, what + " not found: " + path.string());
}

// Any malformed config file is a config error.
template <typename F>
auto load_config_file(const fs::path& path, const std::string& what, F&& load) {
  require_file(path, what);
  try {
    return load(path);
  } catch (const GaitError& e) {
    throw GaitError(ErrorCode::ConfigError, what + " " + path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw GaitError(ErrorCode::ConfigError, what + " " + path.string() + ": " + e.what());
  }
}

json with_provenance(json body, const Provenance& provenance) {
  body["provenance"] = provenance.to_json();
  return body;
}

std::string trial_key(const std::string& trial_id, LimbSide side) {
  return trial_id + "/" + std::string(to_string(side));
}

// Manifests plus the keypoint files they reference.
std::vector<fs::path> dataset_files(const std::vector<fs::path>& manifests) {
  std::vector<fs::path> files;
  for (const auto& m : manifests) {
    files.push_back(m);
    files.push_back(m.parent_path() / load_manifest(m).keypoints_file);
  }
  return files;
}

json to_json(const PreprocessOptions& p) {
  return {{"filter_order", p.filter.order},
          {"cutoff_hz", p.filter.cutoff_hz},
          {"filter_mode", p.filter.mode == FilterMode::ZeroPhase ? "zero_phase" : "single_pass"},
          {"reference_len_m", p.reference_len_m},
          {"ma_window", p.ma_window}};
}

json to_json(const EvaluationOptions& e) {
  return {{"boundary_mode", std::string(to_string(e.policy.boundary_mode))},
          {"fallback", std::string(to_string(e.policy.fallback))},
          {"screen_threshold", e.screen_threshold},
          {"bin_width", e.bin_width},
          {"min_bin_n", e.min_bin_n},
          {"lds_sigma_bins", e.lds_sigma_bins},
          {"calibration_bins", e.calibration_bins}};
}

json classification_json(const Classification& c) {
  return {{"label", std::string(to_string(c.label))}, {"on_boundary", c.on_boundary}, {"used_fallback", c.used_fallback}};
}

}  // namespace

json to_json(const ProcessOptions& options) {
  return {{"preprocess", to_json(options.preprocess)},
          {"detection",
           {{"min_peak_separation_s", options.detection.min_peak_separation_s},
            {"min_cycle_s", options.detection.min_cycle_s},
            {"max_cycle_s", options.detection.max_cycle_s},
            {"min_progression_m", options.detection.min_progression_m},
            {"min_prominence_fraction", options.detection.min_prominence_fraction}}},
          {"cycle_policy", std::string(to_string(options.cycle_policy))},
          {"boundary_mode", std::string(to_string(options.policy.boundary_mode))},
          {"fallback", std::string(to_string(options.policy.fallback))},
          {"mirror_axis", options.mirror_axis}};
}

// --- Per-trial processing ------------------------------------------------------------

TrialResult process_trial(const KeypointSequence& seq, const SkeletonMap& map, const NormativeStats& norm,
                          const ProcessOptions& options) {
  const bool mirror = seq.info().limb_side == LimbSide::Right;
  const auto canonical = mirror ? mirror_limb(seq, map, options.mirror_axis) : seq;
  auto stages = preprocess(canonical, map, options.preprocess);
  auto cycles = detect_gait_cycles(stages.filtered, map, LimbSide::Left, options.detection);
  auto angles = compute_angle_channels(stages.normalized, map);
  angles.info = seq.info();

  std::vector<ZScorePair> per_cycle;
  for (const auto& cycle : cycles) {
    auto z = zscores_from_cycles(angles, {cycle}, norm, LimbSide::Left, CyclePolicy::AllMean);
    z.limb_side = seq.info().limb_side;
    per_cycle.push_back(std::move(z));
  }
  auto z = zscores_from_cycles(angles, cycles, norm, LimbSide::Left, options.cycle_policy);
  z.trial_id = seq.info().trial_id;
  z.limb_side = seq.info().limb_side;
  const auto cls = classify(z.knee_z, z.ankle_z, options.policy);
  return TrialResult{seq.info(), mirror,   seq.num_frames(), std::move(stages), std::move(angles), std::move(cycles),
                     std::move(per_cycle), std::move(z),     cls};
}

json trial_report_json(const TrialResult& r, const std::optional<TrialManifest>& manifest, const Provenance& provenance,
                       double screen_threshold) {
  const auto& ids = r.stages.filtered.frame_ids();
  json cycles = json::array();
  for (std::size_t i = 0; i < r.cycles.size(); ++i) {
    const auto& c = r.cycles[i];
    cycles.push_back({{"start_frame", ids[static_cast<std::size_t>(c.start_frame)]},
                      {"end_frame", ids[static_cast<std::size_t>(c.end_frame)]},
                      {"frames", c.length()},
                      {"knee_z", r.cycle_zscores[i].knee_z},
                      {"ankle_z", r.cycle_zscores[i].ankle_z}});
  }
  json j;
  j["subject_id"] = r.info.subject_id;
  j["trial_id"] = r.info.trial_id;
  j["limb_side"] = std::string(to_string(r.info.limb_side));
  j["mirrored_to_left"] = r.mirrored;
  j["input_frames"] = r.input_frames;
  j["frames_after_drop"] = r.stages.filtered.num_frames();
  j["cycles"] = cycles;
  if (manifest && manifest->strike_frames) j["reference_strike_frames"] = *manifest->strike_frames;
  j["zscores"] = {{"knee_z", r.zscores.knee_z},
                  {"ankle_z", r.zscores.ankle_z},
                  {"source", std::string(to_string(r.zscores.source))}};
  j["classification"] = classification_json(r.classification);
  j["excess_knee_flexion"] = flexion_screen(r.zscores.knee_z, screen_threshold);
  j["gimbal_lock_frames"] = r.angles.gimbal_lock_count;
  return with_provenance(j, provenance);
}

std::vector<fs::path> discover_trials(const fs::path& dir) {
  require_dir(dir, "input directory");
  std::vector<fs::path> out;
  const auto index = dir / "dataset.json";
  if (fs::exists(index)) {
    const auto j = read_json(index);
    if (!j.contains("trials") || !j["trials"].is_array()) {
      throw GaitError(ErrorCode::ConfigError, index.string() + " lacks a \"trials\" array");
    }
    for (const auto& t : j["trials"]) out.push_back(dir / t.get<std::string>());
    return out;
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      if (read_json(entry.path()).contains("keypoints_file")) out.push_back(entry.path());
    } catch (const std::exception&) {
      // Not a manifest.
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- synth -------------------------------------------------------------------------

int cmd_synth(const SynthConfig& config, std::ostream& log) {
  const auto norm = load_config_file(config.normative, "normative stats", load_normative_stats);
  if (config.output_dir.empty()) throw GaitError(ErrorCode::ConfigError, "output directory is required");
  const auto& c = config.cohort;
  json mix = json::array();
  for (const auto& m : c.class_mix) mix.push_back({{"class", std::string(to_string(m.cls))}, {"share", m.share}});
  const json cfg = {{"n_subjects", c.n_subjects},         {"trials_per_subject", c.trials_per_subject},
                    {"class_mix", mix},                   {"margin", c.margin},
                    {"trial_jitter", c.trial_jitter},     {"duration_s", c.duration_s},
                    {"sample_rate_hz", c.sample_rate_hz}, {"noise_mm", c.noise_mm},
                    {"min_cadence_hz", c.min_cadence_hz}, {"max_cadence_hz", c.max_cadence_hz},
                    {"normative", to_json(norm)}};
  const auto provenance = make_provenance("synth", cfg, c.seed);
  const auto cohort = generate_cohort(c, norm);
  json stamp = provenance.to_json();
  stamp["config"] = cfg;
  write_dataset(config.output_dir, cohort, provenance.comment(), json{{"provenance", stamp}});
  write_json(config.output_dir / "normative.json", with_provenance(to_json(norm), provenance));
  log << "synth: wrote " << cohort.size() << " trials for " << c.n_subjects << " subjects to "
      << config.output_dir.string() << '\n';
  return kExitOk;
}

// --- process -----------------------------------------------------------------------

int cmd_process(const ProcessConfig& config, std::ostream& log) {
  const auto map = load_config_file(config.skeleton_map, "skeleton map", load_skeleton_map);
  const auto norm = load_config_file(config.normative, "normative stats", load_normative_stats);
  if (config.output_dir.empty()) throw GaitError(ErrorCode::ConfigError, "output directory is required");
  const auto manifests = discover_trials(config.input_dir);
  if (manifests.empty()) throw GaitError(ErrorCode::ConfigError, "no trial manifests under " + config.input_dir.string());

  json cfg = {{"options", to_json(config.options)},
              {"screen_threshold", config.screen_threshold},
              {"inputs", hash_files(dataset_files(manifests))},
              {"skeleton_map", to_json(map)},
              {"normative", to_json(norm)}};
  const auto provenance = make_provenance("process", cfg, config.seed);

  struct Slot {
    std::optional<ZScorePair> z;
    std::optional<Classification> cls;
    std::string subject_id;
    std::string trial_id;
    std::string error;
    std::string error_code;
  };
  std::vector<Slot> slots(manifests.size());
  parallel_for(manifests.size(), config.workers, [&](std::size_t i) {
    auto& slot = slots[i];
    slot.trial_id = manifests[i].stem().string();
    try {
      const auto manifest = load_manifest(manifests[i]);
      slot.trial_id = manifest.trial_id;
      slot.subject_id = manifest.subject_id;
      const auto seq = load_trial(manifests[i]);
      const auto result = process_trial(seq, map, norm, config.options);
      const auto& id = manifest.trial_id;
      write_json(config.output_dir / "trials" / (id + ".json"),
                 trial_report_json(result, manifest, provenance, config.screen_threshold));
      write_angles_csv(config.output_dir / "angles" / (id + ".csv"), result.angles, provenance.comment());
      write_keypoint_csv(config.output_dir / "preprocessed" / (id + ".csv"), result.stages.normalized,
                         provenance.comment());
      slot.z = result.zscores;
      slot.cls = result.classification;
    } catch (const GaitError& e) {
      slot.error = e.what();
      slot.error_code = std::string(to_string(e.code()));
    } catch (const std::exception& e) {
      slot.error = e.what();
      slot.error_code = "Internal";
    }
  });

  json trials = json::array();
  std::vector<ZScorePair> zscores;
  std::map<std::string, long> class_counts;
  std::size_t failed = 0;
  for (const auto& s : slots) {
    json t = {{"trial_id", s.trial_id}, {"subject_id", s.subject_id}};
    if (s.z) {
      t["status"] = "ok";
      t["knee_z"] = s.z->knee_z;
      t["ankle_z"] = s.z->ankle_z;
      t["limb_side"] = std::string(to_string(s.z->limb_side));
      t["class"] = std::string(to_string(s.cls->label));
      zscores.push_back(*s.z);
      ++class_counts[std::string(to_string(s.cls->label))];
    } else {
      ++failed;
      t["status"] = "failed";
      t["error_code"] = s.error_code;
      t["error"] = s.error;
      log << "process: " << s.trial_id << " failed: " << s.error_code << ": " << s.error << '\n';
    }
    trials.push_back(t);
  }
  json summary = {{"trials_total", slots.size()},
                  {"trials_ok", slots.size() - failed},
                  {"trials_failed", failed},
                  {"class_counts", class_counts},
                  {"config", cfg},
                  {"trials", trials}};
  write_json(config.output_dir / "summary.json", with_provenance(summary, provenance));
  write_zscore_csv(config.output_dir / "zscores.csv", zscores, provenance.comment());
  log << "process: " << slots.size() - failed << "/" << slots.size() << " trials ok\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

// --- evaluate ----------------------------------------------------------------------

void write_evaluation_artifacts(const fs::path& dir, const EvaluationReport& report, const std::vector<ZScorePair>& truth,
                                const std::vector<ZScorePair>& pred, const Provenance& provenance) {
  write_json(dir / "report.json", with_provenance(to_json(report), provenance));
  write_text(dir / "report_table.csv", "# " + provenance.comment() + "\n" + report_table_csv(report));

  std::ostringstream confusion;
  confusion << "# " << provenance.comment() << "\ntrue\\predicted";
  for (std::size_t c = 0; c < kGaitClassCount; ++c) confusion << ',' << to_string(static_cast<GaitClass>(c));
  confusion << '\n';
  for (std::size_t r = 0; r < kGaitClassCount; ++r) {
    confusion << to_string(static_cast<GaitClass>(r));
    for (std::size_t c = 0; c < kGaitClassCount; ++c) {
      confusion << ',' << report.multiclass.confusion(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    confusion << '\n';
  }
  write_text(dir / "confusion.csv", confusion.str());

  const auto comment = provenance.comment();
  write_text(dir / "bland_altman.svg", svg::bland_altman_plot(report, truth, pred, comment));
  write_text(dir / "calibration.svg", svg::calibration_plot(report, comment));
  write_text(dir / "roc.svg", svg::roc_plot(report, comment));
  write_text(dir / "per_bin.svg", svg::per_bin_plot(report, comment));
}

int cmd_evaluate(const EvaluateConfig& config, std::ostream& log) {
  auto read_pairs = [](const fs::path& p, ZSource source) {
    return read_zscore_csv(p, source);
  };
  const auto truth = load_config_file(config.truth, "truth file",
                                      [&](const fs::path& p) { return read_pairs(p, ZSource::GroundTruth); });
  const auto pred = load_config_file(config.predictions, "predictions file",
                                     [&](const fs::path& p) { return read_pairs(p, ZSource::Predictor); });
  std::vector<ZScorePair> train;
  std::vector<fs::path> inputs = {config.truth, config.predictions};
  if (!config.train_labels.empty()) {
    train = load_config_file(config.train_labels, "training labels",
                             [&](const fs::path& p) { return read_pairs(p, ZSource::GroundTruth); });
    inputs.push_back(config.train_labels);
  }
  if (config.output_dir.empty()) throw GaitError(ErrorCode::ConfigError, "output directory is required");
  const json cfg = {{"evaluation", to_json(config.evaluation)}, {"inputs", hash_files(inputs)}};
  const auto provenance = make_provenance("evaluate", cfg, config.seed);
  const auto report = evaluate(truth, pred, config.evaluation, train);
  write_evaluation_artifacts(config.output_dir, report, truth, pred, provenance);
  log << "evaluate: " << truth.size() << " pairs, report in " << config.output_dir.string() << '\n';
  return kExitOk;
}

// --- classify ----------------------------------------------------------------------

int cmd_classify(const ClassifyConfig& config, std::ostream& log) {
  const auto pairs = load_config_file(config.input, "z-score file",
                                      [](const fs::path& p) { return read_zscore_csv(p, ZSource::Predictor); });
  if (config.output_dir.empty()) throw GaitError(ErrorCode::ConfigError, "output directory is required");
  const json cfg = {{"boundary_mode", std::string(to_string(config.policy.boundary_mode))},
                    {"fallback", std::string(to_string(config.policy.fallback))},
                    {"screen_threshold", config.screen_threshold},
                    {"inputs", hash_files({config.input})}};
  const auto provenance = make_provenance("classify", cfg, config.seed);

  std::ostringstream csv;
  csv << "# " << provenance.comment() << "\ntrial_id,limb_side,knee_z,ankle_z,class,on_boundary,used_fallback,"
      << "excess_knee_flexion\n";
  std::map<std::string, long> counts;
  long boundary = 0;
  long fallback = 0;
  for (const auto& p : pairs) {
    const auto c = classify(p.knee_z, p.ankle_z, config.policy);
    csv << p.trial_id << ',' << to_string(p.limb_side) << ',' << format_double(p.knee_z) << ','
        << format_double(p.ankle_z) << ',' << to_string(c.label) << ',' << (c.on_boundary ? "true" : "false") << ','
        << (c.used_fallback ? "true" : "false") << ','
        << (flexion_screen(p.knee_z, config.screen_threshold) ? "true" : "false") << '\n';
    ++counts[std::string(to_string(c.label))];
    boundary += c.on_boundary;
    fallback += c.used_fallback;
  }
  write_text(config.output_dir / "classes.csv", csv.str());
  const json summary = {{"n", pairs.size()},
                        {"class_counts", counts},
                        {"boundary_flags", boundary},
                        {"fallbacks", fallback},
                        {"config", cfg}};
  write_json(config.output_dir / "classes_summary.json", with_provenance(summary, provenance));
  log << "classify: " << pairs.size() << " pairs\n";
  return kExitOk;
}

// --- crossval ----------------------------------------------------------------------

namespace {

struct FoldOutcome {
  double lambda = 0.0;
  std::size_t train_windows = 0;
  std::size_t validation_windows = 0;
  std::size_t test_windows = 0;
  bool leakage_free = true;
  std::vector<ZScorePair> trial_predictions;
  json model;
};

json aggregate_json(const std::vector<EvaluationReport>& reports, std::string& csv) {
  std::vector<std::string> names;
  std::map<std::string, std::vector<double>> values;
  for (const auto& report : reports) {
    for (const auto& [name, v] : scalar_metrics(report)) {
      if (!values.count(name)) names.push_back(name);
      auto& bucket = values[name];
      if (v) bucket.push_back(*v);
    }
  }
  json agg = json::object();
  csv += "metric,mean,sd,n\n";
  for (const auto& name : names) {
    const auto& v = values[name];
    json entry = {{"n", v.size()}, {"mean", nullptr}, {"sd", nullptr}};
    csv += name + ",";
    if (!v.empty()) {
      const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
      const double mean = x.mean();
      entry["mean"] = mean;
      csv += format_double(mean);
      if (v.size() > 1) {
        const double sd = std::sqrt((x.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
        entry["sd"] = sd;
        csv += "," + format_double(sd);
      } else {
        csv += ",";
      }
    } else {
      csv += ",";
    }
    csv += "," + std::to_string(v.size()) + "\n";
    agg[name] = entry;
  }
  return agg;
}

json scalars_json(const EvaluationReport& report) {
  json j = json::object();
  for (const auto& [name, v] : scalar_metrics(report)) j[name] = v ? json(*v) : json(nullptr);
  return j;
}

}  // namespace

int cmd_crossval(const CrossvalConfig& config, std::ostream& log) {
  const auto map = load_config_file(config.skeleton_map, "skeleton map", load_skeleton_map);
  const auto norm = load_config_file(config.normative, "normative stats", load_normative_stats);
  if (config.output_dir.empty()) throw GaitError(ErrorCode::ConfigError, "output directory is required");
  if (config.repeats < 1) throw GaitError(ErrorCode::ConfigError, "repeats must be at least 1");
  if (config.lambda_grid.empty()) throw GaitError(ErrorCode::ConfigError, "lambda grid is empty");
  const auto manifests = discover_trials(config.input_dir);
  if (manifests.empty()) throw GaitError(ErrorCode::ConfigError, "no trial manifests under " + config.input_dir.string());
  const auto truth_path = config.truth.empty() ? config.input_dir / "labels.csv" : config.truth;
  const auto truth_pairs = load_config_file(truth_path, "truth file",
                                            [](const fs::path& p) { return read_zscore_csv(p, ZSource::GroundTruth); });
  std::map<std::string, ZScorePair> truth_by_key;
  for (const auto& t : truth_pairs) truth_by_key[trial_key(t.trial_id, t.limb_side)] = t;

  auto inputs = dataset_files(manifests);
  inputs.push_back(truth_path);
  const json cfg = {{"options", to_json(config.options)},
                    {"windowing", {{"win_s", config.windowing.win_s}, {"stride_s", config.windowing.stride_s}}},
                    {"evaluation", to_json(config.evaluation)},
                    {"lambda_grid", config.lambda_grid},
                    {"folds", config.folds},
                    {"repeats", config.repeats},
                    {"predictor", "ridge"},
                    {"feature_schema", feature_schema_hash()},
                    {"inputs", hash_files(inputs)},
                    {"skeleton_map", to_json(map)},
                    {"normative", to_json(norm)}};
  const auto provenance = make_provenance("crossval", cfg, config.seed);

  // Trials -> windows.
  struct TrialSlot {
    std::optional<WindowSet> windows;
    std::optional<ZScorePair> truth;
    std::optional<ZScorePair> baseline;
    std::string trial_id;
    std::string error;
  };
  std::vector<TrialSlot> slots(manifests.size());
  parallel_for(manifests.size(), config.workers, [&](std::size_t i) {
    auto& slot = slots[i];
    slot.trial_id = manifests[i].stem().string();
    try {
      const auto seq = load_trial(manifests[i]);
      slot.trial_id = seq.info().trial_id;
      const auto it = truth_by_key.find(trial_key(seq.info().trial_id, seq.info().limb_side));
      if (it == truth_by_key.end()) throw GaitError(ErrorCode::IdMismatch, "no ground-truth row");
      const auto result = process_trial(seq, map, norm, config.options);
      slot.windows = make_windows(result.angles, it->second, config.windowing);
      slot.truth = it->second;
      slot.baseline = result.zscores;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  WindowSet all;
  std::vector<ZScorePair> truth;
  std::vector<ZScorePair> baseline;
  std::vector<std::string> subjects;
  json failures = json::array();
  for (const auto& s : slots) {
    if (!s.windows) {
      failures.push_back({{"trial_id", s.trial_id}, {"error", s.error}});
      log << "crossval: " << s.trial_id << " skipped: " << s.error << '\n';
      continue;
    }
    all.append(*s.windows);
    truth.push_back(*s.truth);
    baseline.push_back(*s.baseline);
    subjects.push_back(s.windows->windows.front().subject_id);
  }
  if (truth.empty()) throw GaitError(ErrorCode::TooFewSubjects, "no usable trials");

  const auto k = static_cast<std::size_t>(config.folds);
  std::vector<FoldPlan> plans;
  for (int r = 0; r < config.repeats; ++r) {
    plans.push_back(grouped_kfold(subjects, config.folds, config.seed + static_cast<std::uint64_t>(r)));
  }

  std::vector<FoldOutcome> outcomes(plans.size() * k);
  parallel_for(outcomes.size(), config.workers, [&](std::size_t idx) {
    const auto& fold = plans[idx / k].folds[idx % k];
    const auto train = select_subjects(all, fold.train);
    const auto validation = select_subjects(all, fold.validation);
    const auto test = select_subjects(all, fold.test);
    RidgePredictor predictor(config.lambda_grid);
    predictor.fit(train, validation);
    auto& out = outcomes[idx];
    out.lambda = predictor.model().lambda;
    out.train_windows = train.size();
    out.validation_windows = validation.size();
    out.test_windows = test.size();
    const std::set<std::string> test_subjects(fold.test.begin(), fold.test.end());
    for (const auto& w : train.windows) out.leakage_free &= !test_subjects.count(w.subject_id);
    for (const auto& w : validation.windows) out.leakage_free &= !test_subjects.count(w.subject_id);
    out.trial_predictions = average_pool(predictor.predict(test)).trials;
    out.model = predictor.to_json();
  });

  std::vector<EvaluationReport> reports;
  json repeats = json::array();
  bool leakage_free = true;
  for (std::size_t r = 0; r < plans.size(); ++r) {
    std::map<std::string, ZScorePair> by_key;
    json folds = json::array();
    for (std::size_t f = 0; f < k; ++f) {
      const auto& o = outcomes[r * k + f];
      leakage_free &= o.leakage_free;
      for (const auto& p : o.trial_predictions) by_key[trial_key(p.trial_id, p.limb_side)] = p;
      const auto& fold = plans[r].folds[f];
      folds.push_back({{"train_subjects", fold.train},
                       {"validation_subjects", fold.validation},
                       {"test_subjects", fold.test},
                       {"lambda", o.lambda},
                       {"train_windows", o.train_windows},
                       {"validation_windows", o.validation_windows},
                       {"test_windows", o.test_windows},
                       {"leakage_free", o.leakage_free}});
      write_json(config.output_dir / "models" / ("repeat" + std::to_string(r) + "_fold" + std::to_string(f) + ".json"),
                 with_provenance(o.model, provenance));
    }
    std::vector<ZScorePair> pred;
    for (const auto& t : truth) pred.push_back(by_key.at(trial_key(t.trial_id, t.limb_side)));
    const auto report = evaluate(truth, pred, config.evaluation, truth);
    const auto dir = config.output_dir / ("repeat" + std::to_string(r));
    write_evaluation_artifacts(dir, report, truth, pred, provenance);
    write_zscore_csv(dir / "predictions.csv", pred, provenance.comment());
    repeats.push_back({{"repeat", r}, {"seed", plans[r].seed}, {"folds", folds}, {"metrics", scalars_json(report)}});
    reports.push_back(report);
  }

  std::string aggregate_csv = "# " + provenance.comment() + "\n";
  const auto aggregate = aggregate_json(reports, aggregate_csv);
  const auto baseline_report = evaluate(truth, baseline, config.evaluation, truth);
  write_zscore_csv(config.output_dir / "biomech_baseline.csv", baseline, provenance.comment());
  write_zscore_csv(config.output_dir / "truth.csv", truth, provenance.comment());

  const std::set<std::string> unique_subjects(subjects.begin(), subjects.end());
  const json summary = {{"config", cfg},
                        {"n_trials", truth.size()},
                        {"n_subjects", unique_subjects.size()},
                        {"n_windows", all.size()},
                        {"skipped_trials", failures},
                        {"leakage_free", leakage_free},
                        {"repeats", repeats},
                        {"aggregate", aggregate},
                        {"biomech_baseline", scalars_json(baseline_report)}};
  write_json(config.output_dir / "crossval.json", with_provenance(summary, provenance));
  write_text(config.output_dir / "aggregate.csv", aggregate_csv);

  const auto& knee = aggregate["knee.r2"]["mean"];
  const auto& ankle = aggregate["ankle.r2"]["mean"];
  log << "crossval: " << truth.size() << " trials, " << unique_subjects.size() << " subjects, " << config.repeats
      << " x " << config.folds << "-fold; mean test r2 knee "
      << (knee.is_null() ? std::string("n/a") : format_double(knee.get<double>())) << ", ankle "
      << (ankle.is_null() ? std::string("n/a") : format_double(ankle.get<double>())) << '\n';
  return failures.empty() ? kExitOk : kExitPartial;
}

}  // namespace gaitkit
