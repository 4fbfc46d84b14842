#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/kinematics.hpp"
#include "gaitkit/types.hpp"

namespace gaitkit {

/// Fixed-length slice of a trial's angle channels.
struct Window {
  std::string subject_id;
  std::string trial_id;
  LimbSide limb_side = LimbSide::Left;
  Eigen::Index start_frame = 0;
  Eigen::MatrixXd data;  // win_len x 24
};

/// Windows with the label each inherits from its parent trial. `labels` is
/// parallel to `windows`.
struct WindowSet {
  std::vector<Window> windows;
  std::vector<ZScorePair> labels;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  void append(const WindowSet& other);
};

struct WindowingOptions {
  double win_s = 1.5;
  double stride_s = 1.0;
};

/// Windows at offsets 0, stride, 2*stride, ...; a tail shorter than the
/// window is dropped. Throws TrialTooShort when nothing fits.
WindowSet make_windows(const JointAngleSeries& angles, const ZScorePair& label, const WindowingOptions& options = {});

/// floor((L - win) / stride) + 1, or 0 when L < win.
Eigen::Index window_count(Eigen::Index length, Eigen::Index win_len, Eigen::Index stride);

inline constexpr int kFeaturesPerChannel = 5;
inline constexpr int kFeatureCount = kFeaturesPerChannel * kAngleChannels;

/// Per channel: mean, population sd, min, max, range.
Eigen::RowVectorXd window_features(const Eigen::MatrixXd& window);
Eigen::MatrixXd feature_matrix(const WindowSet& set);
const std::vector<std::string>& feature_names();
std::string feature_schema_hash();

/// Closed-form ridge model for the (knee, ankle) targets with an unpenalized
/// intercept. Features are centered, never rescaled.
struct RidgeModel {
  Eigen::MatrixXd weights;    // features x 2
  Eigen::RowVector2d intercept = Eigen::RowVector2d::Zero();
  double lambda = 0.0;
  std::string feature_schema;

  Eigen::MatrixXd predict_features(const Eigen::MatrixXd& features) const;
};

RidgeModel fit_ridge_features(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda);
RidgeModel fit_ridge(const WindowSet& train, double lambda);

nlohmann::json to_json(const RidgeModel& model);
RidgeModel ridge_from_json(const nlohmann::json& j);

/// Window-level predictions and, once pooled, one entry per (trial, limb).
struct PredictionSet {
  std::vector<ZScorePair> windows;
  std::vector<std::string> window_subjects;
  std::vector<ZScorePair> trials;
};

PredictionSet predict(const RidgeModel& model, const WindowSet& windows);

/// Arithmetic mean of window predictions per (trial, limb), in order of first
/// appearance.
PredictionSet average_pool(const PredictionSet& preds);

Eigen::MatrixXd targets_of(const WindowSet& set);

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return grid;
}

/// Grid value with the lowest validation MSE over both joints; the smallest
/// lambda wins ties.
double select_lambda(const WindowSet& train, const WindowSet& validation, const std::vector<double>& grid);

/// Anything that maps windows to z-score predictions. Graph- or
/// attention-based models plug in here without pipeline changes.
class ZScorePredictor {
 public:
  virtual ~ZScorePredictor() = default;
  virtual void fit(const WindowSet& train, const WindowSet& validation) = 0;
  virtual PredictionSet predict(const WindowSet& windows) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

class RidgePredictor final : public ZScorePredictor {
 public:
  explicit RidgePredictor(std::vector<double> lambda_grid = default_lambda_grid()) : grid_(std::move(lambda_grid)) {}

  void fit(const WindowSet& train, const WindowSet& validation) override;
  PredictionSet predict(const WindowSet& windows) const override;
  nlohmann::json to_json() const override { return gaitkit::to_json(model_); }
  const RidgeModel& model() const { return model_; }

 private:
  std::vector<double> grid_;
  RidgeModel model_;
};

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

/// Subjects are shuffled with the seed and dealt into k groups. Fold f tests
/// group f, validates on group f+1 and trains on the remaining k-2 groups
/// (3:1:1 for k = 5).
FoldPlan grouped_kfold(const std::vector<std::string>& subject_ids, int k, std::uint64_t seed);

nlohmann::json to_json(const FoldPlan& plan);

/// Keeps the windows whose subject is in `subjects`.
WindowSet select_subjects(const WindowSet& set, const std::vector<std::string>& subjects);

}  // namespace gaitkit
