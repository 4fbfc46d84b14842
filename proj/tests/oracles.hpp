#pragma once

// Deliberately naive reference implementations: plain loops, no shared code
// with the library.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

namespace gaitkit::oracle {

using Vec = std::vector<double>;

inline double mean(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double mae(const Vec& t, const Vec& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += std::fabs(p[i] - t[i]);
  return s / static_cast<double>(t.size());
}

inline double rmse(const Vec& t, const Vec& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return std::sqrt(s / static_cast<double>(t.size()));
}

inline double r2(const Vec& t, const Vec& p) {
  const double m = mean(t);
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    res += (t[i] - p[i]) * (t[i] - p[i]);
    tot += (t[i] - m) * (t[i] - m);
  }
  return 1.0 - res / tot;
}

inline double ccc(const Vec& t, const Vec& p) {
  const double n = static_cast<double>(t.size());
  const double mt = mean(t), mp = mean(p);
  double vt = 0.0, vp = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    vt += (t[i] - mt) * (t[i] - mt) / n;
    vp += (p[i] - mp) * (p[i] - mp) / n;
    cov += (t[i] - mt) * (p[i] - mp) / n;
  }
  return 2.0 * cov / (vt + vp + (mt - mp) * (mt - mp));
}

inline double pearson(const Vec& x, const Vec& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct Ba {
  double bias, low, high;
};

inline Ba bland_altman(const Vec& t, const Vec& p) {
  Vec d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = p[i] - t[i];
  const double b = mean(d);
  double ss = 0.0;
  for (double x : d) ss += (x - b) * (x - b);
  const double sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
  return {b, b - 1.96 * sd, b + 1.96 * sd};
}

// Probability that a random positive outranks a random negative, ties 1/2.
inline double auroc_pairwise(const std::vector<bool>& labels, const Vec& scores) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Step-wise average precision: sum over distinct thresholds of
// (recall gain) x precision, predicting positive when score >= threshold.
inline double auprc_stepwise(const std::vector<bool>& labels, const Vec& scores) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  long positives = 0;
  for (bool l : labels) positives += l;
  double ap = 0.0, previous_recall = 0.0;
  for (double th : thresholds) {
    long tp = 0, fp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (scores[i] >= th) (labels[i] ? tp : fp) += 1;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  return ap;
}

inline double calibration_slope(const Vec& t, const Vec& p, int n_bins) {
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  const std::size_t base = t.size() / static_cast<std::size_t>(n_bins);
  const std::size_t extra = t.size() % static_cast<std::size_t>(n_bins);
  Vec xs, ys;
  std::size_t next = 0;
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      sx += t[order[next + k]];
      sy += p[order[next + k]];
    }
    next += size;
    xs.push_back(sx / static_cast<double>(size));
    ys.push_back(sy / static_cast<double>(size));
  }
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace gaitkit::oracle
