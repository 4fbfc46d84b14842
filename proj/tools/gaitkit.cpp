#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "gaitkit/pipeline.hpp"

namespace {

using namespace gaitkit;

struct PolicyFlags {
  std::string boundary_mode = "strict";
  std::string fallback = "unclassified";

  ClassificationPolicy resolve() const {
    return {boundary_mode_from_string(boundary_mode), fallback_from_string(fallback)};
  }
};

struct ProcessFlags {
  std::string cycle_policy = "all-mean";
  PolicyFlags policy;
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& flags) {
  cmd->add_option("--boundary-mode", flags.boundary_mode, "Treatment of |z| = 1: strict or exclusive")
      ->check(CLI::IsMember({"strict", "exclusive"}))
      ->capture_default_str();
  cmd->add_option("--fallback", flags.fallback, "Uncovered z regions: unclassified or nearest_region")
      ->check(CLI::IsMember({"unclassified", "nearest_region"}))
      ->capture_default_str();
}

void add_process_flags(CLI::App* cmd, ProcessOptions& options, ProcessFlags& flags) {
  auto& pre = options.preprocess;
  cmd->add_option("--cutoff-hz", pre.filter.cutoff_hz, "Low-pass cutoff")->capture_default_str();
  cmd->add_option("--filter-order", pre.filter.order, "Butterworth order")->check(CLI::Range(1, 12))->capture_default_str();
  cmd->add_option("--ma-window", pre.ma_window, "Stature moving-average window, frames")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--reference-len-m", pre.reference_len_m, "Neck-sternum reference length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--cycle-policy", flags.cycle_policy, "all-mean or single-best")
      ->check(CLI::IsMember({"all-mean", "single-best"}))
      ->capture_default_str();
  cmd->add_option("--mirror-axis", options.mirror_axis, "Axis negated when mirroring right limbs")
      ->check(CLI::Range(0, 2))
      ->capture_default_str();
  add_policy_flags(cmd, flags.policy);
}

void add_eval_flags(CLI::App* cmd, EvaluationOptions& e) {
  cmd->add_option("--screen-threshold", e.screen_threshold, "Knee z above this screens positive")->capture_default_str();
  cmd->add_option("--bin-width", e.bin_width, "Per-bin and LDS bin width, z units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--min-bin-n", e.min_bin_n, "Smallest bin reported")->capture_default_str();
  cmd->add_option("--lds-sigma", e.lds_sigma_bins, "LDS kernel sd, bins")->capture_default_str();
  cmd->add_option("--calibration-bins", e.calibration_bins, "Equal-population calibration bins")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"gaitkit: markerless gait keypoints to joint angles, Rodda-Graham z-scores and evaluation"};
  app.set_config("--config", "", "TOML/INI file with flag values");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  int workers = 0;
  app.add_option("--seed", seed, "Seed recorded in every artifact; GAITKIT_SEED overrides")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads (0 = all cores)")->capture_default_str();

  // synth
  SynthConfig synth;
  std::string class_mix = "all";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--normative", synth.normative, "Normative stats JSON")->required();
  synth_cmd->add_option("--out", synth.output_dir, "Output dataset directory")->required();
  synth_cmd->add_option("--subjects", synth.cohort.n_subjects)->capture_default_str();
  synth_cmd->add_option("--trials", synth.cohort.trials_per_subject, "Trials per subject")->capture_default_str();
  synth_cmd->add_option("--class-mix", class_mix, "'all' or Class:share,...")->capture_default_str();
  synth_cmd->add_option("--margin", synth.cohort.margin, "Distance from class boundaries")->capture_default_str();
  synth_cmd->add_option("--trial-jitter", synth.cohort.trial_jitter)->capture_default_str();
  synth_cmd->add_option("--duration-s", synth.cohort.duration_s)->capture_default_str();
  synth_cmd->add_option("--rate-hz", synth.cohort.sample_rate_hz)->capture_default_str();
  synth_cmd->add_option("--noise-mm", synth.cohort.noise_mm)->check(CLI::NonNegativeNumber)->capture_default_str();
  synth_cmd->add_option("--min-cadence-hz", synth.cohort.min_cadence_hz)->capture_default_str();
  synth_cmd->add_option("--max-cadence-hz", synth.cohort.max_cadence_hz)->capture_default_str();

  // process
  ProcessConfig process;
  ProcessFlags process_flags;
  auto* process_cmd = app.add_subcommand("process", "Keypoints to angles, cycles, z-scores and classes");
  process_cmd->add_option("--input", process.input_dir, "Dataset directory")->required();
  process_cmd->add_option("--skeleton-map", process.skeleton_map)->required();
  process_cmd->add_option("--normative", process.normative)->required();
  process_cmd->add_option("--out", process.output_dir)->required();
  process_cmd->add_option("--screen-threshold", process.screen_threshold)->capture_default_str();
  add_process_flags(process_cmd, process.options, process_flags);

  // crossval
  CrossvalConfig crossval;
  ProcessFlags crossval_flags;
  PolicyFlags crossval_eval_policy;
  std::vector<double> lambda_grid;
  auto* crossval_cmd = app.add_subcommand("crossval", "Grouped k-fold ridge baseline with repeats");
  crossval_cmd->add_option("--input", crossval.input_dir, "Dataset directory")->required();
  crossval_cmd->add_option("--skeleton-map", crossval.skeleton_map)->required();
  crossval_cmd->add_option("--normative", crossval.normative)->required();
  crossval_cmd->add_option("--truth", crossval.truth, "Ground-truth z CSV (default <input>/labels.csv)");
  crossval_cmd->add_option("--out", crossval.output_dir)->required();
  crossval_cmd->add_option("--folds", crossval.folds)->check(CLI::Range(3, 100))->capture_default_str();
  crossval_cmd->add_option("--repeats", crossval.repeats)->check(CLI::PositiveNumber)->capture_default_str();
  crossval_cmd->add_option("--win-s", crossval.windowing.win_s)->check(CLI::PositiveNumber)->capture_default_str();
  crossval_cmd->add_option("--stride-s", crossval.windowing.stride_s)->check(CLI::PositiveNumber)->capture_default_str();
  crossval_cmd->add_option("--lambda-grid", lambda_grid, "Ridge penalties to search")->delimiter(',');
  add_process_flags(crossval_cmd, crossval.options, crossval_flags);
  add_eval_flags(crossval_cmd, crossval.evaluation);

  // evaluate
  EvaluateConfig evaluate_cfg;
  PolicyFlags evaluate_policy;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Full metric battery over truth and predictions");
  evaluate_cmd->add_option("--truth", evaluate_cfg.truth)->required();
  evaluate_cmd->add_option("--predictions", evaluate_cfg.predictions)->required();
  evaluate_cmd->add_option("--train-labels", evaluate_cfg.train_labels, "Labels for the LDS reference");
  evaluate_cmd->add_option("--out", evaluate_cfg.output_dir)->required();
  add_eval_flags(evaluate_cmd, evaluate_cfg.evaluation);
  add_policy_flags(evaluate_cmd, evaluate_policy);

  // classify
  ClassifyConfig classify_cfg;
  PolicyFlags classify_policy;
  auto* classify_cmd = app.add_subcommand("classify", "Rodda-Graham classes for a z-score table");
  classify_cmd->add_option("--input", classify_cfg.input)->required();
  classify_cmd->add_option("--out", classify_cfg.output_dir)->required();
  classify_cmd->add_option("--screen-threshold", classify_cfg.screen_threshold)->capture_default_str();
  add_policy_flags(classify_cmd, classify_policy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    seed = resolve_seed(seed);
    if (*synth_cmd) {
      synth.cohort.seed = seed;
      synth.cohort.class_mix = parse_class_mix(class_mix);
      return cmd_synth(synth, std::cerr);
    }
    if (*process_cmd) {
      process.seed = seed;
      process.workers = workers;
      process.options.cycle_policy = cycle_policy_from_string(process_flags.cycle_policy);
      process.options.policy = process_flags.policy.resolve();
      return cmd_process(process, std::cerr);
    }
    if (*crossval_cmd) {
      crossval.seed = seed;
      crossval.workers = workers;
      crossval.options.cycle_policy = cycle_policy_from_string(crossval_flags.cycle_policy);
      crossval.options.policy = crossval_flags.policy.resolve();
      crossval.evaluation.policy = crossval.options.policy;
      if (!lambda_grid.empty()) crossval.lambda_grid = lambda_grid;
      return cmd_crossval(crossval, std::cerr);
    }
    if (*evaluate_cmd) {
      evaluate_cfg.seed = seed;
      evaluate_cfg.evaluation.policy = evaluate_policy.resolve();
      return cmd_evaluate(evaluate_cfg, std::cerr);
    }
    if (*classify_cmd) {
      classify_cfg.seed = seed;
      classify_cfg.policy = classify_policy.resolve();
      return cmd_classify(classify_cfg, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
