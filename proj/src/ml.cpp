#include "gaitkit/ml.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "gaitkit/io.hpp"

namespace gaitkit {

using nlohmann::json;

void WindowSet::append(const WindowSet& other) {
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

Eigen::Index window_count(Eigen::Index length, Eigen::Index win_len, Eigen::Index stride) {
  if (length < win_len) return 0;
  return (length - win_len) / stride + 1;
}

WindowSet make_windows(const JointAngleSeries& angles, const ZScorePair& label, const WindowingOptions& options) {
  const auto win_len = static_cast<Eigen::Index>(std::lround(options.win_s * angles.sample_rate_hz));
  const auto stride = static_cast<Eigen::Index>(std::lround(options.stride_s * angles.sample_rate_hz));
  if (win_len < 1 || stride < 1) throw GaitError(ErrorCode::ConfigError, "window and stride must span a frame");
  const auto count = window_count(angles.num_frames(), win_len, stride);
  if (count == 0) {
    throw GaitError(ErrorCode::TrialTooShort, std::to_string(angles.num_frames()) + " frames, window needs " +
                                                  std::to_string(win_len));
  }
  WindowSet set;
  set.windows.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index w = 0; w < count; ++w) {
    Window window;
    window.subject_id = angles.info.subject_id;
    window.trial_id = angles.info.trial_id;
    window.limb_side = angles.info.limb_side;
    window.start_frame = w * stride;
    window.data = angles.values.middleRows(window.start_frame, win_len);
    set.windows.push_back(std::move(window));
    set.labels.push_back(label);
  }
  return set;
}

// ---------------------------------------------------------------------------

Eigen::RowVectorXd window_features(const Eigen::MatrixXd& window) {
  if (window.cols() != kAngleChannels || window.rows() < 1) {
    throw GaitError(ErrorCode::FeatureDimensionMismatch, "window must have 24 channels");
  }
  Eigen::RowVectorXd features(kFeatureCount);
  for (Eigen::Index c = 0; c < window.cols(); ++c) {
    const auto col = window.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    features.segment<kFeaturesPerChannel>(kFeaturesPerChannel * c) << mean, sd, lo, hi, hi - lo;
  }
  return features;
}

Eigen::MatrixXd feature_matrix(const WindowSet& set) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(set.size()), kFeatureCount);
  for (std::size_t i = 0; i < set.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = window_features(set.windows[i].data);
  return x;
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& channel : angle_channel_names()) {
      for (const char* stat : {"mean", "sd", "min", "max", "range"}) out.push_back(channel + ":" + stat);
    }
    return out;
  }();
  return names;
}

std::string feature_schema_hash() {
  std::string joined;
  for (const auto& name : feature_names()) joined += name + ";";
  return fnv1a_hex(joined);
}

Eigen::MatrixXd targets_of(const WindowSet& set) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(set.size()), 2);
  for (std::size_t i = 0; i < set.size(); ++i) {
    y(static_cast<Eigen::Index>(i), 0) = set.labels[i].knee_z;
    y(static_cast<Eigen::Index>(i), 1) = set.labels[i].ankle_z;
  }
  return y;
}

Eigen::MatrixXd RidgeModel::predict_features(const Eigen::MatrixXd& features) const {
  if (features.cols() != weights.rows()) {
    throw GaitError(ErrorCode::FeatureDimensionMismatch, "model expects " + std::to_string(weights.rows()) +
                                                             " features, got " + std::to_string(features.cols()));
  }
  return (features * weights).rowwise() + intercept;
}

namespace {

struct CenteredSvd {
  Eigen::RowVectorXd x_mean;
  Eigen::RowVectorXd y_mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd;
  Eigen::MatrixXd uty;  // U^T (Y - mean)
};

CenteredSvd centered_svd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  CenteredSvd out;
  out.x_mean = x.colwise().mean();
  out.y_mean = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - out.x_mean;
  out.svd.compute(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.uty = out.svd.matrixU().transpose() * (y.rowwise() - out.y_mean);
  return out;
}

RidgeModel solve(const CenteredSvd& c, Eigen::Index n_features, double lambda) {
  const auto& s = c.svd.singularValues();
  if (lambda == 0.0) {
    const double tol = std::max<double>(static_cast<double>(c.svd.rows()), static_cast<double>(n_features)) *
                       std::numeric_limits<double>::epsilon() * (s.size() ? s(0) : 0.0);
    const auto rank = (s.array() > tol).count();
    if (rank < n_features) {
      throw GaitError(ErrorCode::SingularSystem, "rank " + std::to_string(rank) + " < " +
                                                     std::to_string(n_features) + " features with lambda = 0");
    }
  }
  const Eigen::VectorXd shrink = s.array() / (s.array().square() + lambda);
  RidgeModel model;
  model.lambda = lambda;
  model.feature_schema = n_features == kFeatureCount ? feature_schema_hash() : std::string("custom");
  model.weights = c.svd.matrixV() * (shrink.asDiagonal() * c.uty);
  model.intercept = c.y_mean - c.x_mean * model.weights;
  return model;
}

}  // namespace

RidgeModel fit_ridge_features(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double lambda) {
  if (features.rows() < 2) throw GaitError(ErrorCode::TooFewSamples, "ridge needs at least 2 windows");
  if (targets.rows() != features.rows() || targets.cols() != 2) {
    throw GaitError(ErrorCode::LengthMismatch, "targets must be windows x 2");
  }
  if (!(lambda >= 0.0)) throw GaitError(ErrorCode::ConfigError, "lambda must be >= 0");
  return solve(centered_svd(features, targets), features.cols(), lambda);
}

RidgeModel fit_ridge(const WindowSet& train, double lambda) {
  return fit_ridge_features(feature_matrix(train), targets_of(train), lambda);
}

json to_json(const RidgeModel& model) {
  json j;
  j["kind"] = "ridge";
  j["lambda"] = model.lambda;
  j["feature_schema"] = model.feature_schema;
  j["n_features"] = model.weights.rows();
  j["intercept"] = {model.intercept(0), model.intercept(1)};
  std::vector<double> knee(model.weights.col(0).data(), model.weights.col(0).data() + model.weights.rows());
  std::vector<double> ankle(model.weights.col(1).data(), model.weights.col(1).data() + model.weights.rows());
  j["weights"] = {{"knee", knee}, {"ankle", ankle}};
  return j;
}

RidgeModel ridge_from_json(const json& j) {
  RidgeModel model;
  model.lambda = j.at("lambda").get<double>();
  model.feature_schema = j.at("feature_schema").get<std::string>();
  const auto intercept = j.at("intercept").get<std::vector<double>>();
  if (intercept.size() != 2) throw GaitError(ErrorCode::MissingField, "intercept needs 2 entries");
  model.intercept << intercept[0], intercept[1];
  const auto knee = j.at("weights").at("knee").get<std::vector<double>>();
  const auto ankle = j.at("weights").at("ankle").get<std::vector<double>>();
  if (knee.size() != ankle.size()) throw GaitError(ErrorCode::FeatureDimensionMismatch, "weight lengths differ");
  model.weights.resize(static_cast<Eigen::Index>(knee.size()), 2);
  for (std::size_t i = 0; i < knee.size(); ++i) {
    model.weights(static_cast<Eigen::Index>(i), 0) = knee[i];
    model.weights(static_cast<Eigen::Index>(i), 1) = ankle[i];
  }
  return model;
}

PredictionSet predict(const RidgeModel& model, const WindowSet& windows) {
  PredictionSet out;
  if (windows.empty()) return out;
  const Eigen::MatrixXd y = model.predict_features(feature_matrix(windows));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows.windows[i];
    ZScorePair p;
    p.knee_z = y(static_cast<Eigen::Index>(i), 0);
    p.ankle_z = y(static_cast<Eigen::Index>(i), 1);
    p.trial_id = w.trial_id;
    p.limb_side = w.limb_side;
    p.source = ZSource::Predictor;
    out.windows.push_back(std::move(p));
    out.window_subjects.push_back(w.subject_id);
  }
  return out;
}

PredictionSet average_pool(const PredictionSet& preds) {
  PredictionSet out = preds;
  out.trials.clear();
  std::map<std::pair<std::string, LimbSide>, std::size_t> slot;
  std::vector<std::size_t> counts;
  for (const auto& w : preds.windows) {
    const auto key = std::make_pair(w.trial_id, w.limb_side);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.trials.size()).first;
      ZScorePair t = w;
      t.knee_z = 0.0;
      t.ankle_z = 0.0;
      out.trials.push_back(t);
      counts.push_back(0);
    }
    out.trials[it->second].knee_z += w.knee_z;
    out.trials[it->second].ankle_z += w.ankle_z;
    ++counts[it->second];
  }
  for (std::size_t i = 0; i < out.trials.size(); ++i) {
    if (counts[i] == 0) throw GaitError(ErrorCode::EmptyTrial, "trial without windows");
    out.trials[i].knee_z /= static_cast<double>(counts[i]);
    out.trials[i].ankle_z /= static_cast<double>(counts[i]);
  }
  return out;
}

double select_lambda(const WindowSet& train, const WindowSet& validation, const std::vector<double>& grid) {
  if (grid.empty()) throw GaitError(ErrorCode::ConfigError, "empty lambda grid");
  if (validation.empty()) return grid.front();
  const auto x = feature_matrix(train);
  const auto svd = centered_svd(x, targets_of(train));
  const auto xv = feature_matrix(validation);
  const auto yv = targets_of(validation);
  double best_lambda = grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (const double lambda : grid) {
    const auto model = solve(svd, x.cols(), lambda);
    const double mse = (model.predict_features(xv) - yv).squaredNorm() / static_cast<double>(yv.size());
    if (mse < best_mse) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

void RidgePredictor::fit(const WindowSet& train, const WindowSet& validation) {
  model_ = fit_ridge(train, select_lambda(train, validation, grid_));
}

PredictionSet RidgePredictor::predict(const WindowSet& windows) const { return gaitkit::predict(model_, windows); }

// ---------------------------------------------------------------------------

FoldPlan grouped_kfold(const std::vector<std::string>& subject_ids, int k, std::uint64_t seed) {
  if (k < 3) throw GaitError(ErrorCode::ConfigError, "grouped k-fold needs k >= 3");
  const std::set<std::string> unique(subject_ids.begin(), subject_ids.end());
  std::vector<std::string> subjects(unique.begin(), unique.end());
  if (static_cast<int>(subjects.size()) < k) {
    throw GaitError(ErrorCode::TooFewSubjects, std::to_string(subjects.size()) + " subjects for " + std::to_string(k) +
                                                   " folds");
  }
  // Fisher-Yates on raw mt19937_64 output: identical on every standard library.
  std::mt19937_64 rng(seed);
  for (std::size_t i = subjects.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(subjects[i], subjects[j]);
  }
  // Group g validates the fold that tests group g - 1, so neighbouring groups
  // share a fold. Spreading the minority group size evenly keeps every
  // train:validation:test split within one subject of (k-2):1:1.
  const auto uk = static_cast<std::size_t>(k);
  const std::size_t base = subjects.size() / uk;
  const std::size_t extra = subjects.size() % uk;
  const bool spread_large = extra <= uk / 2;
  const std::size_t minority = spread_large ? extra : uk - extra;
  std::vector<std::size_t> sizes(uk, spread_large ? base : base + 1);
  for (std::size_t i = 0; i < minority; ++i) sizes[i * uk / minority] = spread_large ? base + 1 : base;
  std::vector<std::vector<std::string>> groups(uk);
  for (std::size_t g = 0, next = 0; g < uk; ++g) {
    groups[g].assign(subjects.begin() + static_cast<std::ptrdiff_t>(next),
                     subjects.begin() + static_cast<std::ptrdiff_t>(next + sizes[g]));
    next += sizes[g];
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  for (int f = 0; f < k; ++f) {
    Fold fold;
    for (int g = 0; g < k; ++g) {
      auto& members = groups[static_cast<std::size_t>(g)];
      auto& dest = g == f ? fold.test : (g == (f + 1) % k ? fold.validation : fold.train);
      dest.insert(dest.end(), members.begin(), members.end());
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.validation.begin(), fold.validation.end());
    std::sort(fold.test.begin(), fold.test.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

json to_json(const FoldPlan& plan) {
  json folds = json::array();
  for (const auto& f : plan.folds) folds.push_back({{"train", f.train}, {"validation", f.validation}, {"test", f.test}});
  return {{"k", plan.k}, {"seed", plan.seed}, {"folds", folds}};
}

WindowSet select_subjects(const WindowSet& set, const std::vector<std::string>& subjects) {
  const std::set<std::string> wanted(subjects.begin(), subjects.end());
  WindowSet out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (wanted.count(set.windows[i].subject_id)) {
      out.windows.push_back(set.windows[i]);
      out.labels.push_back(set.labels[i]);
    }
  }
  return out;
}

}  // namespace gaitkit
