#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaitkit/classify.hpp"
#include "gaitkit/types.hpp"

namespace gaitkit {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// --- Agreement ---------------------------------------------------------------

struct RegressionMetrics {
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

/// r2 = 1 - SS_res / SS_tot. Throws ZeroVariance when the truth is constant.
RegressionMetrics regression_metrics(const VectorRef& truth, const VectorRef& pred);

/// Concordance correlation with population (1/n) moments.
double ccc(const VectorRef& truth, const VectorRef& pred);
double pearson(const VectorRef& x, const VectorRef& y);

struct BlandAltman {
  double bias = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
};

/// Differences pred - truth; limits are bias +- 1.96 sample sd.
BlandAltman bland_altman(const VectorRef& truth, const VectorRef& pred);
/// "bias = -0.16, LoA = [-4.06, 3.74]" with typographic minus signs.
std::string format_bland_altman(const BlandAltman& ba);

// --- Binary screening --------------------------------------------------------

/// Probability that a random positive outranks a random negative, ties 1/2.
double auroc(const std::vector<bool>& labels, const VectorRef& scores);
/// Step-wise average precision: sum over thresholds of dRecall * precision.
double auprc(const std::vector<bool>& labels, const VectorRef& scores);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};
std::vector<RocPoint> roc_curve(const std::vector<bool>& labels, const VectorRef& scores);

struct BinaryMetrics {
  double threshold = 1.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double auroc = 0.5;
  double auprc = 0.0;
};

/// Point metrics count score > threshold as positive. Throws SingleClass
/// when the labels hold only one class.
BinaryMetrics binary_metrics(const std::vector<bool>& labels, const VectorRef& scores, double threshold);

// --- Seven-class -------------------------------------------------------------

struct ClassMetrics {
  GaitClass cls = GaitClass::Normal;
  long support = 0;
  long predicted = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;
  std::optional<double> auprc;
};

using ConfusionMatrix = Eigen::Matrix<long, kGaitClassCount, kGaitClassCount>;

struct MulticlassMetrics {
  ConfusionMatrix confusion = ConfusionMatrix::Zero();  // rows true, cols predicted
  std::array<ClassMetrics, kGaitClassCount> per_class{};
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  std::optional<double> macro_auroc;
  std::optional<double> macro_auprc;
};

/// Classes come from applying `policy` to both pair lists. One-vs-rest
/// AUROC/AUPRC score each prediction by minus its distance to the class
/// region. Macro point metrics average over classes present in truth or
/// prediction; macro AUROC/AUPRC over classes where they are defined.
MulticlassMetrics multiclass_metrics(const std::vector<ZScorePair>& truth, const std::vector<ZScorePair>& pred,
                                     const ClassificationPolicy& policy = {});

// --- Stratification ----------------------------------------------------------

struct StratumMetrics {
  long n = 0;
  std::optional<double> r2;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> ccc;
  double accuracy3 = 0.0;
};

StratumMetrics stratum_metrics(const VectorRef& truth, const VectorRef& pred);

/// Hard when 0.5 < |true z| < 1.5.
inline bool is_hard_case(double true_z) { return std::abs(true_z) > 0.5 && std::abs(true_z) < 1.5; }

/// (easy, hard); an empty stratum is absent.
std::pair<std::optional<StratumMetrics>, std::optional<StratumMetrics>> stratify_boundary(const VectorRef& truth,
                                                                                          const VectorRef& pred);

// --- Label density -----------------------------------------------------------

/// Gaussian-smoothed histogram over bins [k*w, (k+1)*w). Index i of
/// `density` is bin `first_bin + i`; the range is padded by the kernel radius
/// so total mass equals the label count.
struct LdsDensity {
  double bin_width = 0.5;
  double sigma_bins = 2.0;
  long first_bin = 0;
  Eigen::VectorXd density;

  double at_bin(long bin) const;
  double at(double z) const { return at_bin(bin_of(z)); }
  long bin_of(double z) const { return static_cast<long>(std::floor(z / bin_width)); }
  double inverse_at(double z, double epsilon = 1.0) const { return 1.0 / std::max(at(z), epsilon); }
};

/// Discrete Gaussian kernel over offsets -ceil(3 sigma) .. ceil(3 sigma), normalized.
Eigen::VectorXd gaussian_kernel(double sigma_bins);

LdsDensity lds_density(const VectorRef& labels, double bin_width = 0.5, double sigma_bins = 2.0);

struct BinStat {
  long bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  long n = 0;
  double mae = 0.0;
  double accuracy3 = 0.0;
  double inverse_density = 0.0;
};

struct PerBinAnalysis {
  double bin_width = 0.5;
  long min_n = 3;
  std::vector<BinStat> bins;  // only bins with n >= min_n
  std::optional<double> mae_vs_inverse_density_r;
};

PerBinAnalysis per_bin_analysis(const VectorRef& truth, const VectorRef& pred, double bin_width = 0.5, long min_n = 3,
                                double sigma_bins = 2.0);

// --- Calibration -------------------------------------------------------------

struct Calibration {
  Eigen::VectorXd true_means;
  Eigen::VectorXd pred_means;
  double slope = 0.0;
};

/// Sort by truth, split into n_bins equal-population bins (the remainder goes
/// one each to the leading bins) and regress bin-mean pred on bin-mean truth.
Calibration calibration_slope(const VectorRef& truth, const VectorRef& pred, int n_bins = 10);

/// Ordinary least-squares slope of y on x.
double ols_slope(const VectorRef& x, const VectorRef& y);

struct RecalibrationOptions {
  double bin_width = 0.5;
  double sigma_bins = 2.0;
  int neighborhood_bins = 3;
  double proximity_sigma_bins = 1.0;
  double density_floor = 1.0;
};

/// Moves each prediction to the weighted mean of candidates p + k*w,
/// k = -3..3, weighted by inverse training-label density times a Gaussian in
/// k. Constant density leaves predictions unchanged.
Eigen::VectorXd lds_recalibrate(const VectorRef& pred, const VectorRef& train_labels,
                                const RecalibrationOptions& options = {});

/// Reference predictor limited only by label imbalance: each value becomes
/// the Gaussian-weighted mean of the training labels around it.
Eigen::VectorXd density_biased_predictor(const VectorRef& truth, const VectorRef& train_labels, double sigma_z);

// --- Report ------------------------------------------------------------------

struct EvaluationOptions {
  ClassificationPolicy policy;
  double screen_threshold = 1.0;
  double bin_width = 0.5;
  long min_bin_n = 3;
  double lds_sigma_bins = 2.0;
  int calibration_bins = 10;
};

struct JointReport {
  Joint joint = Joint::Knee;
  long n = 0;
  std::optional<RegressionMetrics> regression;
  std::optional<double> ccc;
  std::optional<BlandAltman> bland_altman;
  std::optional<StratumMetrics> easy;
  std::optional<StratumMetrics> hard;
  PerBinAnalysis per_bin;
  std::optional<Calibration> calibration;
  std::optional<double> recalibrated_slope;
  std::optional<double> density_biased_slope;
};

struct EvaluationReport {
  long n = 0;
  JointReport knee;
  JointReport ankle;
  std::optional<BinaryMetrics> screen;
  std::vector<RocPoint> screen_roc;
  MulticlassMetrics multiclass;
  EvaluationOptions options;
};

/// Full battery over aligned (truth, prediction) pairs. `train_labels` feed
/// the label-density reference; when empty the truth labels are used.
EvaluationReport evaluate(const std::vector<ZScorePair>& truth, const std::vector<ZScorePair>& pred,
                          const EvaluationOptions& options = {}, const std::vector<ZScorePair>& train_labels = {});

nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const MulticlassMetrics& m);
nlohmann::json to_json(const BinaryMetrics& m);

/// Flattened scalar metrics ("knee.r2", "screen.auroc", ...) for aggregation
/// across repeated runs.
std::vector<std::pair<std::string, std::optional<double>>> scalar_metrics(const EvaluationReport& report);

/// Per-joint table rows: metric,knee,ankle.
std::string report_table_csv(const EvaluationReport& report);

}  // namespace gaitkit
