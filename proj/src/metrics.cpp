#include "gaitkit/metrics.hpp"

#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "gaitkit/io.hpp"

namespace gaitkit {

using nlohmann::json;

namespace {

void check_lengths(const VectorRef& a, const VectorRef& b, Eigen::Index min_n) {
  if (a.size() != b.size()) {
    throw GaitError(ErrorCode::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < min_n) {
    throw GaitError(ErrorCode::TooFewSamples, "need at least " + std::to_string(min_n) + " samples");
  }
}

template <typename F>
auto try_metric(F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const GaitError&) {
    return std::nullopt;
  }
}

std::vector<std::size_t> order_by_score_desc(const VectorRef& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

std::pair<long, long> class_counts(const std::vector<bool>& labels) {
  const auto pos = static_cast<long>(std::count(labels.begin(), labels.end(), true));
  return {pos, static_cast<long>(labels.size()) - pos};
}

}  // namespace

RegressionMetrics regression_metrics(const VectorRef& truth, const VectorRef& pred) {
  check_lengths(truth, pred, 1);
  const Eigen::ArrayXd err = (pred - truth).array();
  const double ss_res = err.square().sum();
  const double ss_tot = (truth.array() - truth.mean()).square().sum();
  if (!(ss_tot > 0.0)) throw GaitError(ErrorCode::ZeroVariance, "truth is constant; r2 undefined");
  const auto n = static_cast<double>(truth.size());
  return {1.0 - ss_res / ss_tot, err.abs().sum() / n, std::sqrt(ss_res / n)};
}

double ccc(const VectorRef& truth, const VectorRef& pred) {
  check_lengths(truth, pred, 2);
  const double mt = truth.mean();
  const double mp = pred.mean();
  const Eigen::ArrayXd dt = truth.array() - mt;
  const Eigen::ArrayXd dp = pred.array() - mp;
  const double vt = dt.square().mean();
  const double vp = dp.square().mean();
  const double cov = (dt * dp).mean();
  const double denom = vt + vp + (mt - mp) * (mt - mp);
  if (!(denom > 0.0)) throw GaitError(ErrorCode::ZeroVariance, "both inputs constant and equal");
  return 2.0 * cov / denom;
}

double pearson(const VectorRef& x, const VectorRef& y) {
  check_lengths(x, y, 2);
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw GaitError(ErrorCode::ZeroVariance, "pearson r of a constant");
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

BlandAltman bland_altman(const VectorRef& truth, const VectorRef& pred) {
  check_lengths(truth, pred, 2);
  const Eigen::ArrayXd d = (pred - truth).array();
  const double bias = d.mean();
  const double sd = std::sqrt((d - bias).square().sum() / static_cast<double>(d.size() - 1));
  return {bias, bias - 1.96 * sd, bias + 1.96 * sd};
}

std::string format_bland_altman(const BlandAltman& ba) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", std::abs(v));
    // Negative zero after rounding prints without a sign.
    const bool negative = v < 0.0 && std::string(buf) != "0.00";
    return (negative ? std::string("−") : std::string()) + buf;
  };
  return "bias = " + fmt(ba.bias) + ", LoA = [" + fmt(ba.loa_low) + ", " + fmt(ba.loa_high) + "]";
}

// ---------------------------------------------------------------------------

std::vector<RocPoint> roc_curve(const std::vector<bool>& labels, const VectorRef& scores) {
  if (static_cast<Eigen::Index>(labels.size()) != scores.size()) {
    throw GaitError(ErrorCode::LengthMismatch, "labels and scores differ in length");
  }
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw GaitError(ErrorCode::SingleClass, "need both classes");
  const auto order = order_by_score_desc(scores);
  std::vector<RocPoint> points{{0.0, 0.0}};
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (labels[order[i]]) ++tp; else ++fp;
    const bool last_of_tie = i + 1 == order.size() || scores(static_cast<Eigen::Index>(order[i + 1])) !=
                                                          scores(static_cast<Eigen::Index>(order[i]));
    if (last_of_tie) points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
  }
  return points;
}

double auroc(const std::vector<bool>& labels, const VectorRef& scores) {
  const auto points = roc_curve(labels, scores);
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * 0.5 * (points[i].tpr + points[i - 1].tpr);
  }
  return area;
}

double auprc(const std::vector<bool>& labels, const VectorRef& scores) {
  if (static_cast<Eigen::Index>(labels.size()) != scores.size()) {
    throw GaitError(ErrorCode::LengthMismatch, "labels and scores differ in length");
  }
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw GaitError(ErrorCode::SingleClass, "need both classes");
  const auto order = order_by_score_desc(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (labels[order[i]]) ++tp; else ++fp;
    const bool last_of_tie = i + 1 == order.size() || scores(static_cast<Eigen::Index>(order[i + 1])) !=
                                                          scores(static_cast<Eigen::Index>(order[i]));
    if (!last_of_tie) continue;
    const double recall = static_cast<double>(tp) / pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

BinaryMetrics binary_metrics(const std::vector<bool>& labels, const VectorRef& scores, double threshold) {
  BinaryMetrics m;
  m.threshold = threshold;
  m.auroc = auroc(labels, scores);
  m.auprc = auprc(labels, scores);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores(static_cast<Eigen::Index>(i)) > threshold;
    if (labels[i]) {
      predicted ? ++m.tp : ++m.fn;
    } else {
      predicted ? ++m.fp : ++m.tn;
    }
  }
  auto ratio = [](long a, long b) { return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  m.accuracy = ratio(m.tp + m.tn, static_cast<long>(labels.size()));
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.specificity = ratio(m.tn, m.tn + m.fp);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------

MulticlassMetrics multiclass_metrics(const std::vector<ZScorePair>& truth, const std::vector<ZScorePair>& pred,
                                     const ClassificationPolicy& policy) {
  if (truth.size() != pred.size()) throw GaitError(ErrorCode::LengthMismatch, "truth and predictions differ in length");
  MulticlassMetrics m;
  std::vector<GaitClass> true_cls(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    true_cls[i] = rodda_graham(truth[i], policy);
    const auto p = rodda_graham(pred[i], policy);
    ++m.confusion(static_cast<Eigen::Index>(true_cls[i]), static_cast<Eigen::Index>(p));
  }
  const long total = m.confusion.sum();
  m.accuracy = total > 0 ? static_cast<double>(m.confusion.trace()) / static_cast<double>(total) : 0.0;

  double f1_sum = 0.0, precision_sum = 0.0, recall_sum = 0.0;
  int present = 0;
  double auroc_sum = 0.0, auprc_sum = 0.0;
  int scored = 0;
  for (std::size_t c = 0; c < kGaitClassCount; ++c) {
    auto& cm = m.per_class[c];
    const auto idx = static_cast<Eigen::Index>(c);
    cm.cls = static_cast<GaitClass>(c);
    cm.support = m.confusion.row(idx).sum();
    cm.predicted = m.confusion.col(idx).sum();
    const long tp = m.confusion(idx, idx);
    cm.precision = cm.predicted > 0 ? static_cast<double>(tp) / static_cast<double>(cm.predicted) : 0.0;
    cm.recall = cm.support > 0 ? static_cast<double>(tp) / static_cast<double>(cm.support) : 0.0;
    cm.f1 = cm.precision + cm.recall > 0.0 ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall) : 0.0;
    if (cm.support > 0 || cm.predicted > 0) {
      f1_sum += cm.f1;
      precision_sum += cm.precision;
      recall_sum += cm.recall;
      ++present;
    }
    if (cm.cls == GaitClass::Unclassified || cm.support == 0 || cm.support == total) continue;
    std::vector<bool> labels(truth.size());
    Eigen::VectorXd scores(static_cast<Eigen::Index>(truth.size()));
    for (std::size_t i = 0; i < truth.size(); ++i) {
      labels[i] = true_cls[i] == cm.cls;
      scores(static_cast<Eigen::Index>(i)) = -distance_to_region(pred[i].knee_z, pred[i].ankle_z, cm.cls);
    }
    cm.auroc = auroc(labels, scores);
    cm.auprc = auprc(labels, scores);
    auroc_sum += *cm.auroc;
    auprc_sum += *cm.auprc;
    ++scored;
  }
  if (present > 0) {
    m.macro_f1 = f1_sum / present;
    m.macro_precision = precision_sum / present;
    m.macro_recall = recall_sum / present;
  }
  if (scored > 0) {
    m.macro_auroc = auroc_sum / scored;
    m.macro_auprc = auprc_sum / scored;
  }
  return m;
}

// ---------------------------------------------------------------------------

StratumMetrics stratum_metrics(const VectorRef& truth, const VectorRef& pred) {
  check_lengths(truth, pred, 1);
  StratumMetrics s;
  s.n = truth.size();
  const Eigen::ArrayXd err = (pred - truth).array();
  s.mae = err.abs().mean();
  s.rmse = std::sqrt(err.square().mean());
  s.r2 = try_metric([&] { return regression_metrics(truth, pred).r2; });
  s.ccc = try_metric([&] { return ccc(truth, pred); });
  long hits = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) hits += three_class(truth(i)) == three_class(pred(i));
  s.accuracy3 = static_cast<double>(hits) / static_cast<double>(s.n);
  return s;
}

std::pair<std::optional<StratumMetrics>, std::optional<StratumMetrics>> stratify_boundary(const VectorRef& truth,
                                                                                          const VectorRef& pred) {
  check_lengths(truth, pred, 1);
  std::vector<double> et, ep, ht, hp;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (is_hard_case(truth(i))) {
      ht.push_back(truth(i));
      hp.push_back(pred(i));
    } else {
      et.push_back(truth(i));
      ep.push_back(pred(i));
    }
  }
  auto block = [](const std::vector<double>& t, const std::vector<double>& p) -> std::optional<StratumMetrics> {
    if (t.empty()) return std::nullopt;
    const Eigen::Map<const Eigen::VectorXd> tv(t.data(), static_cast<Eigen::Index>(t.size()));
    const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
    return stratum_metrics(tv, pv);
  };
  return {block(et, ep), block(ht, hp)};
}

// ---------------------------------------------------------------------------

double LdsDensity::at_bin(long bin) const {
  const long i = bin - first_bin;
  if (i < 0 || i >= density.size()) return 0.0;
  return density(i);
}

Eigen::VectorXd gaussian_kernel(double sigma_bins) {
  if (!(sigma_bins > 0.0)) return Eigen::VectorXd::Ones(1);
  const auto radius = static_cast<Eigen::Index>(std::ceil(3.0 * sigma_bins));
  Eigen::VectorXd k(2 * radius + 1);
  for (Eigen::Index i = -radius; i <= radius; ++i) {
    k(i + radius) = std::exp(-0.5 * static_cast<double>(i * i) / (sigma_bins * sigma_bins));
  }
  return k / k.sum();
}

LdsDensity lds_density(const VectorRef& labels, double bin_width, double sigma_bins) {
  if (labels.size() == 0) throw GaitError(ErrorCode::TooFewSamples, "no labels");
  if (!(bin_width > 0.0)) throw GaitError(ErrorCode::ConfigError, "bin width must be positive");
  LdsDensity out;
  out.bin_width = bin_width;
  out.sigma_bins = sigma_bins;
  const Eigen::VectorXd kernel = gaussian_kernel(sigma_bins);
  const long radius = static_cast<long>(kernel.size() / 2);
  long lo = std::numeric_limits<long>::max();
  long hi = std::numeric_limits<long>::min();
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const long b = out.bin_of(labels(i));
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  out.first_bin = lo - radius;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(hi - lo + 1 + 2 * radius);
  for (Eigen::Index i = 0; i < labels.size(); ++i) hist(out.bin_of(labels(i)) - out.first_bin) += 1.0;
  out.density = Eigen::VectorXd::Zero(hist.size());
  for (Eigen::Index i = 0; i < hist.size(); ++i) {
    if (hist(i) == 0.0) continue;
    for (Eigen::Index k = 0; k < kernel.size(); ++k) {
      const Eigen::Index j = i + k - radius;
      if (j >= 0 && j < hist.size()) out.density(j) += hist(i) * kernel(k);
    }
  }
  return out;
}

PerBinAnalysis per_bin_analysis(const VectorRef& truth, const VectorRef& pred, double bin_width, long min_n,
                                double sigma_bins) {
  check_lengths(truth, pred, 1);
  PerBinAnalysis out;
  out.bin_width = bin_width;
  out.min_n = min_n;
  const auto density = lds_density(truth, bin_width, sigma_bins);
  std::map<long, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < truth.size(); ++i) members[density.bin_of(truth(i))].push_back(i);
  for (const auto& [bin, idx] : members) {
    if (static_cast<long>(idx.size()) < min_n) continue;
    BinStat s;
    s.bin = bin;
    s.lo = static_cast<double>(bin) * bin_width;
    s.hi = s.lo + bin_width;
    s.n = static_cast<long>(idx.size());
    double abs_err = 0.0;
    long hits = 0;
    for (const auto i : idx) {
      abs_err += std::abs(pred(i) - truth(i));
      hits += three_class(truth(i)) == three_class(pred(i));
    }
    s.mae = abs_err / static_cast<double>(s.n);
    s.accuracy3 = static_cast<double>(hits) / static_cast<double>(s.n);
    s.inverse_density = 1.0 / std::max(density.at_bin(bin), 1e-12);
    out.bins.push_back(s);
  }
  if (out.bins.size() >= 2) {
    Eigen::VectorXd mae(static_cast<Eigen::Index>(out.bins.size()));
    Eigen::VectorXd inv(mae.size());
    for (std::size_t i = 0; i < out.bins.size(); ++i) {
      mae(static_cast<Eigen::Index>(i)) = out.bins[i].mae;
      inv(static_cast<Eigen::Index>(i)) = out.bins[i].inverse_density;
    }
    out.mae_vs_inverse_density_r = try_metric([&] { return pearson(mae, inv); });
  }
  return out;
}

// ---------------------------------------------------------------------------

double ols_slope(const VectorRef& x, const VectorRef& y) {
  check_lengths(x, y, 2);
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const double sxx = dx.square().sum();
  if (!(sxx > 0.0)) throw GaitError(ErrorCode::ZeroVariance, "slope of a constant regressor");
  return (dx * (y.array() - y.mean())).sum() / sxx;
}

Calibration calibration_slope(const VectorRef& truth, const VectorRef& pred, int n_bins) {
  check_lengths(truth, pred, 1);
  if (n_bins < 2 || truth.size() < n_bins) {
    throw GaitError(ErrorCode::TooFewSamples, std::to_string(truth.size()) + " samples for " +
                                                  std::to_string(n_bins) + " bins");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(truth.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return truth(a) < truth(b); });
  Calibration out;
  out.true_means.resize(n_bins);
  out.pred_means.resize(n_bins);
  const Eigen::Index base = truth.size() / n_bins;
  const Eigen::Index extra = truth.size() % n_bins;
  Eigen::Index pos = 0;
  for (Eigen::Index b = 0; b < n_bins; ++b) {
    const Eigen::Index count = base + (b < extra ? 1 : 0);
    double st = 0.0, sp = 0.0;
    for (Eigen::Index k = 0; k < count; ++k) {
      const auto i = order[static_cast<std::size_t>(pos + k)];
      st += truth(i);
      sp += pred(i);
    }
    out.true_means(b) = st / static_cast<double>(count);
    out.pred_means(b) = sp / static_cast<double>(count);
    pos += count;
  }
  out.slope = ols_slope(out.true_means, out.pred_means);
  return out;
}

Eigen::VectorXd lds_recalibrate(const VectorRef& pred, const VectorRef& train_labels,
                                const RecalibrationOptions& options) {
  const auto density = lds_density(train_labels, options.bin_width, options.sigma_bins);
  Eigen::VectorXd out(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    double weight_sum = 0.0;
    double value_sum = 0.0;
    for (int k = -options.neighborhood_bins; k <= options.neighborhood_bins; ++k) {
      const double candidate = pred(i) + k * options.bin_width;
      const double proximity =
          std::exp(-0.5 * k * k / (options.proximity_sigma_bins * options.proximity_sigma_bins));
      const double w = proximity * density.inverse_at(candidate, options.density_floor);
      weight_sum += w;
      value_sum += w * candidate;
    }
    out(i) = value_sum / weight_sum;
  }
  return out;
}

Eigen::VectorXd density_biased_predictor(const VectorRef& truth, const VectorRef& train_labels, double sigma_z) {
  if (train_labels.size() == 0) throw GaitError(ErrorCode::TooFewSamples, "no training labels");
  if (!(sigma_z > 0.0)) throw GaitError(ErrorCode::ConfigError, "kernel width must be positive");
  Eigen::VectorXd out(truth.size());
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const Eigen::ArrayXd logw = -0.5 * ((train_labels.array() - truth(i)) / sigma_z).square();
    const Eigen::ArrayXd w = (logw - logw.maxCoeff()).exp();
    out(i) = (w * train_labels.array()).sum() / w.sum();
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

JointReport joint_report(Joint joint, const Eigen::VectorXd& t, const Eigen::VectorXd& p, const Eigen::VectorXd& train,
                         const EvaluationOptions& options) {
  JointReport r;
  r.joint = joint;
  r.n = t.size();
  r.regression = try_metric([&] { return regression_metrics(t, p); });
  r.ccc = try_metric([&] { return ccc(t, p); });
  r.bland_altman = try_metric([&] { return bland_altman(t, p); });
  const auto [easy, hard] = stratify_boundary(t, p);
  r.easy = easy;
  r.hard = hard;
  r.per_bin = per_bin_analysis(t, p, options.bin_width, options.min_bin_n, options.lds_sigma_bins);
  r.calibration = try_metric([&] { return calibration_slope(t, p, options.calibration_bins); });
  if (r.calibration) {
    RecalibrationOptions recal;
    recal.bin_width = options.bin_width;
    recal.sigma_bins = options.lds_sigma_bins;
    const Eigen::VectorXd recalibrated = lds_recalibrate(p, train, recal);
    r.recalibrated_slope = try_metric([&] { return calibration_slope(t, recalibrated, options.calibration_bins).slope; });
    const Eigen::VectorXd reference =
        density_biased_predictor(t, train, options.lds_sigma_bins * options.bin_width);
    r.density_biased_slope = try_metric([&] { return calibration_slope(t, reference, options.calibration_bins).slope; });
  }
  return r;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json to_json(const RegressionMetrics& m) { return {{"r2", m.r2}, {"mae", m.mae}, {"rmse", m.rmse}}; }

json to_json(const StratumMetrics& s) {
  return {{"n", s.n}, {"r2", opt(s.r2)}, {"mae", s.mae}, {"rmse", s.rmse}, {"ccc", opt(s.ccc)},
          {"accuracy3", s.accuracy3}};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const JointReport& r) {
  json j;
  j["n"] = r.n;
  if (r.regression) {
    j["r2"] = r.regression->r2;
    j["mae"] = r.regression->mae;
    j["rmse"] = r.regression->rmse;
  } else {
    j["r2"] = nullptr;
    j["mae"] = nullptr;
    j["rmse"] = nullptr;
  }
  j["ccc"] = opt(r.ccc);
  if (r.bland_altman) {
    j["bland_altman"] = {{"bias", r.bland_altman->bias},
                         {"loa_low", r.bland_altman->loa_low},
                         {"loa_high", r.bland_altman->loa_high},
                         {"summary", format_bland_altman(*r.bland_altman)}};
  } else {
    j["bland_altman"] = nullptr;
  }
  j["strata"] = {{"easy", r.easy ? to_json(*r.easy) : json(nullptr)},
                 {"hard", r.hard ? to_json(*r.hard) : json(nullptr)}};
  json bins = json::array();
  for (const auto& b : r.per_bin.bins) {
    bins.push_back({{"bin", b.bin},
                    {"lo", b.lo},
                    {"hi", b.hi},
                    {"n", b.n},
                    {"mae", b.mae},
                    {"accuracy3", b.accuracy3},
                    {"inverse_density", b.inverse_density}});
  }
  j["per_bin"] = {{"bin_width", r.per_bin.bin_width},
                  {"min_n", r.per_bin.min_n},
                  {"bins", bins},
                  {"mae_vs_inverse_density_r", opt(r.per_bin.mae_vs_inverse_density_r)}};
  if (r.calibration) {
    j["calibration"] = {{"true_means", vec_json(r.calibration->true_means)},
                        {"pred_means", vec_json(r.calibration->pred_means)},
                        {"slope", r.calibration->slope},
                        {"lds_recalibrated_slope", opt(r.recalibrated_slope)},
                        {"density_biased_reference_slope", opt(r.density_biased_slope)}};
  } else {
    j["calibration"] = nullptr;
  }
  return j;
}

}  // namespace

json to_json(const BinaryMetrics& m) {
  return {{"threshold", m.threshold}, {"tp", m.tp},           {"fp", m.fp},
          {"tn", m.tn},               {"fn", m.fn},           {"accuracy", m.accuracy},
          {"precision", m.precision}, {"recall", m.recall},   {"specificity", m.specificity},
          {"f1", m.f1},               {"auroc", m.auroc},     {"auprc", m.auprc}};
}

json to_json(const MulticlassMetrics& m) {
  json j;
  json labels = json::array();
  for (std::size_t c = 0; c < kGaitClassCount; ++c) labels.push_back(std::string(to_string(static_cast<GaitClass>(c))));
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
    std::vector<long> row(m.confusion.cols());
    for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) row[static_cast<std::size_t>(c)] = m.confusion(r, c);
    rows.push_back(row);
  }
  j["labels"] = labels;
  j["confusion"] = rows;
  json per_class = json::array();
  for (const auto& c : m.per_class) {
    per_class.push_back({{"class", std::string(to_string(c.cls))},
                         {"support", c.support},
                         {"predicted", c.predicted},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"auroc", opt(c.auroc)},
                         {"auprc", opt(c.auprc)}});
  }
  j["per_class"] = per_class;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_auroc"] = opt(m.macro_auroc);
  j["macro_auprc"] = opt(m.macro_auprc);
  return j;
}

EvaluationReport evaluate(const std::vector<ZScorePair>& truth, const std::vector<ZScorePair>& pred,
                          const EvaluationOptions& options, const std::vector<ZScorePair>& train_labels) {
  if (truth.size() != pred.size()) {
    throw GaitError(ErrorCode::IdMismatch, std::to_string(truth.size()) + " truth rows vs " +
                                               std::to_string(pred.size()) + " predictions");
  }
  if (truth.empty()) throw GaitError(ErrorCode::TooFewSamples, "nothing to evaluate");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].trial_id != pred[i].trial_id || truth[i].limb_side != pred[i].limb_side) {
      throw GaitError(ErrorCode::IdMismatch, "row " + std::to_string(i) + ": truth '" + truth[i].trial_id + "/" +
                                                 std::string(to_string(truth[i].limb_side)) + "' vs prediction '" +
                                                 pred[i].trial_id + "/" + std::string(to_string(pred[i].limb_side)) +
                                                 "'");
    }
  }
  const auto n = static_cast<Eigen::Index>(truth.size());
  Eigen::VectorXd tk(n), ta(n), pk(n), pa(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    tk(i) = truth[u].knee_z;
    ta(i) = truth[u].ankle_z;
    pk(i) = pred[u].knee_z;
    pa(i) = pred[u].ankle_z;
  }
  const auto& reference = train_labels.empty() ? truth : train_labels;
  Eigen::VectorXd rk(static_cast<Eigen::Index>(reference.size()));
  Eigen::VectorXd ra(rk.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rk(static_cast<Eigen::Index>(i)) = reference[i].knee_z;
    ra(static_cast<Eigen::Index>(i)) = reference[i].ankle_z;
  }

  EvaluationReport report;
  report.n = n;
  report.options = options;
  report.knee = joint_report(Joint::Knee, tk, pk, rk, options);
  report.ankle = joint_report(Joint::Ankle, ta, pa, ra, options);

  std::vector<bool> flexed(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) flexed[i] = flexion_screen(truth[i].knee_z, options.screen_threshold);
  report.screen = try_metric([&] { return binary_metrics(flexed, pk, options.screen_threshold); });
  if (report.screen) report.screen_roc = roc_curve(flexed, pk);
  report.multiclass = multiclass_metrics(truth, pred, options.policy);
  return report;
}

json to_json(const EvaluationReport& report) {
  json j;
  j["n"] = report.n;
  j["knee"] = to_json(report.knee);
  j["ankle"] = to_json(report.ankle);
  j["screen"] = report.screen ? to_json(*report.screen) : json(nullptr);
  j["multiclass"] = to_json(report.multiclass);
  j["options"] = {{"boundary_mode", std::string(to_string(report.options.policy.boundary_mode))},
                  {"fallback", std::string(to_string(report.options.policy.fallback))},
                  {"screen_threshold", report.options.screen_threshold},
                  {"bin_width", report.options.bin_width},
                  {"min_bin_n", report.options.min_bin_n},
                  {"lds_sigma_bins", report.options.lds_sigma_bins},
                  {"calibration_bins", report.options.calibration_bins}};
  j["notes"] = {
      "ccc uses population moments: 2 cov / (var_t + var_p + (mean_t - mean_p)^2)",
      "bland-altman limits use the sample sd (n - 1): bias +- 1.96 sd",
      "auprc is step-wise average precision",
      "multiclass auroc scores each class by minus the distance to its z-region",
      "lds recalibration is a weighted-neighborhood instantiation; reference slopes are not comparable across kernels",
  };
  return j;
}

std::vector<std::pair<std::string, std::optional<double>>> scalar_metrics(const EvaluationReport& report) {
  std::vector<std::pair<std::string, std::optional<double>>> out;
  for (const auto* joint : {&report.knee, &report.ankle}) {
    const std::string p = joint->joint == Joint::Knee ? "knee." : "ankle.";
    out.emplace_back(p + "r2", joint->regression ? std::optional(joint->regression->r2) : std::nullopt);
    out.emplace_back(p + "mae", joint->regression ? std::optional(joint->regression->mae) : std::nullopt);
    out.emplace_back(p + "rmse", joint->regression ? std::optional(joint->regression->rmse) : std::nullopt);
    out.emplace_back(p + "ccc", joint->ccc);
    out.emplace_back(p + "bias", joint->bland_altman ? std::optional(joint->bland_altman->bias) : std::nullopt);
    out.emplace_back(p + "calibration_slope",
                     joint->calibration ? std::optional(joint->calibration->slope) : std::nullopt);
  }
  const auto& s = report.screen;
  out.emplace_back("screen.accuracy", s ? std::optional(s->accuracy) : std::nullopt);
  out.emplace_back("screen.f1", s ? std::optional(s->f1) : std::nullopt);
  out.emplace_back("screen.precision", s ? std::optional(s->precision) : std::nullopt);
  out.emplace_back("screen.recall", s ? std::optional(s->recall) : std::nullopt);
  out.emplace_back("screen.specificity", s ? std::optional(s->specificity) : std::nullopt);
  out.emplace_back("screen.auroc", s ? std::optional(s->auroc) : std::nullopt);
  out.emplace_back("screen.auprc", s ? std::optional(s->auprc) : std::nullopt);
  out.emplace_back("multiclass.accuracy", report.multiclass.accuracy);
  out.emplace_back("multiclass.macro_f1", report.multiclass.macro_f1);
  out.emplace_back("multiclass.macro_auroc", report.multiclass.macro_auroc);
  return out;
}

std::string report_table_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "metric,knee,ankle\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  const auto scalars = scalar_metrics(report);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto name = scalars[i].first.substr(scalars[i].first.find('.') + 1);
    out << name << ',' << cell(scalars[i].second) << ',' << cell(scalars[i + 6].second) << '\n';
  }
  return out.str();
}

}  // namespace gaitkit
