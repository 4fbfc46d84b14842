#include "gaitkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gaitkit::svg {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 360.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Keeps "--" out of XML comments.
std::string comment_safe(const std::string& text) {
  std::string out = text;
  for (auto pos = out.find("--"); pos != std::string::npos; pos = out.find("--")) out.replace(pos, 2, "- -");
  return out;
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {-1.0, 1.0};
  if (hi - lo < 1e-9) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12; t += step) out.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
  return out;
}

void draw_panel(std::ostringstream& out, const Panel& panel, double x0) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : panel.series) {
    for (const double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (const double v : s.y) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  for (const auto& h : panel.hlines) ylo = std::min(ylo, h.value), yhi = std::max(yhi, h.value);
  for (const auto& v : panel.vlines) xlo = std::min(xlo, v.value), xhi = std::max(xhi, v.value);
  auto [ax, bx] = panel.x_range ? *panel.x_range : padded_range(xlo, xhi);
  auto [ay, by] = panel.y_range ? *panel.y_range : padded_range(ylo, yhi);
  if (panel.identity_line && !panel.x_range && !panel.y_range) {
    ax = ay = std::min(ax, ay);
    bx = by = std::max(bx, by);
  }

  const double pw = kPanelW - kLeft - kRight;
  const double ph = kPanelH - kTop - kBottom;
  auto sx = [&](double x) { return x0 + kLeft + (x - ax) / (bx - ax) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - ay) / (by - ay)) * ph; };
  auto inside_x = [&](double x) { return x >= ax && x <= bx; };
  auto inside_y = [&](double y) { return y >= ay && y <= by; };

  out << "<g>\n";
  out << "<text x=\"" << num(x0 + kPanelW / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(panel.title) << "</text>\n";
  out << "<rect x=\"" << num(x0 + kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (const double t : ticks(ax, bx)) {
    out << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
        << num(kTop + ph + 5) << "\" stroke=\"#000000\"/>";
    out << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\" font-size=\"10\">"
        << num(t) << "</text>\n";
  }
  for (const double t : ticks(ay, by)) {
    out << "<line x1=\"" << num(x0 + kLeft - 5) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(x0 + kLeft)
        << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#000000\"/>";
    out << "<text x=\"" << num(x0 + kLeft - 8) << "\" y=\"" << num(sy(t) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
        << num(t) << "</text>\n";
  }
  out << "<text x=\"" << num(x0 + kLeft + pw / 2) << "\" y=\"" << num(kPanelH - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  out << "<text x=\"" << num(x0 + 14) << "\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 " << num(x0 + 14) << ' ' << num(kTop + ph / 2) << ")\">" << escape(panel.y_label)
      << "</text>\n";

  if (panel.identity_line) {
    const double lo = std::max(ax, ay);
    const double hi = std::min(bx, by);
    if (hi > lo) {
      out << "<line x1=\"" << num(sx(lo)) << "\" y1=\"" << num(sy(lo)) << "\" x2=\"" << num(sx(hi)) << "\" y2=\""
          << num(sy(hi)) << "\" stroke=\"#bbbbbb\"/>\n";
    }
  }
  for (const auto& h : panel.hlines) {
    if (!inside_y(h.value)) continue;
    out << "<line x1=\"" << num(x0 + kLeft) << "\" y1=\"" << num(sy(h.value)) << "\" x2=\"" << num(x0 + kLeft + pw)
        << "\" y2=\"" << num(sy(h.value)) << "\" stroke=\"" << h.color << '"'
        << (h.dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>";
    out << "<text x=\"" << num(x0 + kLeft + pw - 2) << "\" y=\"" << num(sy(h.value) - 3)
        << "\" text-anchor=\"end\" font-size=\"9\" fill=\"" << h.color << "\">" << escape(h.label) << "</text>\n";
  }
  for (const auto& v : panel.vlines) {
    if (!inside_x(v.value)) continue;
    out << "<line x1=\"" << num(sx(v.value)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(sx(v.value)) << "\" y2=\""
        << num(kTop + ph) << "\" stroke=\"" << v.color << '"' << (v.dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>";
    out << "<text x=\"" << num(sx(v.value) + 2) << "\" y=\"" << num(kTop + 10) << "\" font-size=\"9\" fill=\""
        << v.color << "\">" << escape(v.label) << "</text>\n";
  }
  double legend_y = kTop + 14;
  for (const auto& s : panel.series) {
    const auto n = std::min(s.x.size(), s.y.size());
    if (s.kind == SeriesKind::Line) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
      out << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        out << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color
            << "\" fill-opacity=\"0.7\"/>\n";
      }
    }
    if (!s.label.empty()) {
      out << "<text x=\"" << num(x0 + kLeft + 6) << "\" y=\"" << num(legend_y) << "\" font-size=\"10\" fill=\""
          << s.color << "\">" << escape(s.label) << "</text>\n";
      legend_y += 12;
    }
  }
  out << "</g>\n";
}

std::vector<RefLine> z_boundaries() {
  return {{-1.0, "z=-1", "#cc4444", true}, {1.0, "z=+1", "#cc4444", true}};
}

const JointReport& joint_of(const EvaluationReport& report, int j) { return j == 0 ? report.knee : report.ankle; }

std::string joint_name(int j) { return j == 0 ? "Knee" : "Ankle"; }

}  // namespace

std::string render(const std::vector<Panel>& panels, const std::string& comment) {
  std::ostringstream out;
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- " << comment_safe(comment) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(kPanelH)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(kPanelH) << "\" font-family=\"sans-serif\">\n";
  out << "<metadata>" << escape(comment) << "</metadata>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(out, panels[i], kPanelW * static_cast<double>(i));
  out << "</svg>\n";
  return out.str();
}

std::string bland_altman_plot(const EvaluationReport& report, const std::vector<ZScorePair>& truth,
                              const std::vector<ZScorePair>& pred, const std::string& comment) {
  std::vector<Panel> panels;
  for (int j = 0; j < 2; ++j) {
    const auto joint = j == 0 ? Joint::Knee : Joint::Ankle;
    Panel p;
    p.title = joint_name(j) + " z agreement";
    p.x_label = "mean of true and predicted z";
    p.y_label = "predicted - true z";
    Series s;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      s.x.push_back(0.5 * (truth[i][joint] + pred[i][joint]));
      s.y.push_back(pred[i][joint] - truth[i][joint]);
    }
    p.series.push_back(std::move(s));
    if (const auto& ba = joint_of(report, j).bland_altman) {
      p.hlines.push_back({ba->bias, "bias " + num(ba->bias), "#333333", false});
      p.hlines.push_back({ba->loa_low, "LoA " + num(ba->loa_low), "#ff7f0e", true});
      p.hlines.push_back({ba->loa_high, "LoA " + num(ba->loa_high), "#ff7f0e", true});
      p.title += " (" + format_bland_altman(*ba) + ")";
    }
    p.vlines = z_boundaries();
    panels.push_back(std::move(p));
  }
  return render(panels, comment);
}

std::string calibration_plot(const EvaluationReport& report, const std::string& comment) {
  std::vector<Panel> panels;
  for (int j = 0; j < 2; ++j) {
    const auto& jr = joint_of(report, j);
    Panel p;
    p.title = joint_name(j) + " calibration";
    p.x_label = "bin mean true z";
    p.y_label = "bin mean predicted z";
    p.identity_line = true;
    p.vlines = z_boundaries();
    p.hlines = z_boundaries();
    if (jr.calibration) {
      const auto& c = *jr.calibration;
      Series s;
      s.label = "slope " + num(c.slope);
      s.x.assign(c.true_means.data(), c.true_means.data() + c.true_means.size());
      s.y.assign(c.pred_means.data(), c.pred_means.data() + c.pred_means.size());
      Series line = s;
      line.label.clear();
      line.kind = SeriesKind::Line;
      p.series.push_back(std::move(s));
      p.series.push_back(std::move(line));
    }
    panels.push_back(std::move(p));
  }
  return render(panels, comment);
}

std::string roc_plot(const EvaluationReport& report, const std::string& comment) {
  Panel p;
  p.title = "Knee flexion screen (true z > threshold)";
  p.x_label = "false positive rate";
  p.y_label = "true positive rate";
  p.x_range = {0.0, 1.0};
  p.y_range = {0.0, 1.0};
  p.identity_line = true;
  if (report.screen) {
    Series s;
    s.kind = SeriesKind::Line;
    s.label = "AUROC " + num(report.screen->auroc);
    for (const auto& pt : report.screen_roc) {
      s.x.push_back(pt.fpr);
      s.y.push_back(pt.tpr);
    }
    p.series.push_back(std::move(s));
  } else {
    p.title += " - undefined, one class only";
  }
  return render({p}, comment);
}

std::string per_bin_plot(const EvaluationReport& report, const std::string& comment) {
  std::vector<Panel> panels;
  for (int j = 0; j < 2; ++j) {
    const auto& pb = joint_of(report, j).per_bin;
    Panel p;
    p.title = joint_name(j) + " error by true-z bin";
    p.x_label = "bin centre (true z)";
    p.y_label = "MAE / normalized inverse density";
    Series mae{"MAE", {}, {}, SeriesKind::Line, "#1f77b4"};
    Series inv{"inverse LDS density (scaled)", {}, {}, SeriesKind::Line, "#2ca02c"};
    double max_inv = 0.0;
    double max_mae = 0.0;
    for (const auto& b : pb.bins) {
      max_inv = std::max(max_inv, b.inverse_density);
      max_mae = std::max(max_mae, b.mae);
    }
    for (const auto& b : pb.bins) {
      const double centre = 0.5 * (b.lo + b.hi);
      mae.x.push_back(centre);
      mae.y.push_back(b.mae);
      inv.x.push_back(centre);
      inv.y.push_back(max_inv > 0.0 ? b.inverse_density / max_inv * std::max(max_mae, 1e-9) : 0.0);
    }
    Series pts = mae;
    pts.label.clear();
    pts.kind = SeriesKind::Points;
    p.series = {std::move(mae), std::move(pts), std::move(inv)};
    p.vlines = z_boundaries();
    panels.push_back(std::move(p));
  }
  return render(panels, comment);
}

}  // namespace gaitkit::svg
