#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaitkit/metrics.hpp"

namespace gaitkit::svg {

enum class SeriesKind { Points, Line };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  SeriesKind kind = SeriesKind::Points;
  std::string color = "#1f77b4";
};

struct RefLine {
  double value = 0.0;
  std::string label;
  std::string color = "#888888";
  bool dashed = true;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<RefLine> hlines;
  std::vector<RefLine> vlines;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  bool identity_line = false;
};

/// Panels laid out left to right. `comment` goes into an XML comment and a
/// <metadata> element.
std::string render(const std::vector<Panel>& panels, const std::string& comment);

// Plot builders for the evaluation report. All coordinates are in z units.

std::string bland_altman_plot(const EvaluationReport& report, const std::vector<ZScorePair>& truth,
                              const std::vector<ZScorePair>& pred, const std::string& comment);
std::string calibration_plot(const EvaluationReport& report, const std::string& comment);
std::string roc_plot(const EvaluationReport& report, const std::string& comment);
std::string per_bin_plot(const EvaluationReport& report, const std::string& comment);

}  // namespace gaitkit::svg
