// Acceptance battery. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gaitkit/pipeline.hpp"
#include "gaitkit/rotation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gaitkit;
using gaitkit::testing::run_cli;
using gaitkit::testing::slurp;
using gaitkit::testing::source_path;
using gaitkit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NormativeStats shipped_norm() { return load_normative_stats(source_path("config/normative_placeholder.json")); }

// --- 1: class table ----------------------------------------------------------------

constexpr std::array<double, 9> kGrid = {-3, -2, -1.5, -0.5, 0, 0.5, 1.5, 2, 3};
// Rows by knee z, columns by ankle z.
constexpr std::array<const char*, 9> kTable = {
    "TTTRRRUUU", "TTTRRRUUU", "TTTRRRUUU", "TTTNNNKKK", "TTTNNNKKK",
    "TTTNNNKKK", "JJJAAACCC", "JJJAAACCC", "JJJAAACCC",
};
// Same table by band: below -1, within [-1, 1], above 1.
constexpr std::array<const char*, 3> kBands = {"TRU", "TNK", "JAC"};

GaitClass letter(char c) {
  switch (c) {
    case 'N': return GaitClass::Normal;
    case 'T': return GaitClass::TrueEquinus;
    case 'R': return GaitClass::Recurvatum;
    case 'K': return GaitClass::AnkleCrouch;
    case 'J': return GaitClass::Jump;
    case 'A': return GaitClass::ApparentEquinus;
    case 'C': return GaitClass::Crouch;
    default: return GaitClass::Unclassified;
  }
}

int band(double z) { return z < -1.0 ? 0 : (z > 1.0 ? 2 : 1); }

Outcome criterion1() {
  const auto t0 = Clock::now();
  int wrong = 0, flagged = 0, boundary_points = 0, boundary_wrong = 0;
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    for (std::size_t j = 0; j < kGrid.size(); ++j) {
      const auto c = classify(kGrid[i], kGrid[j]);
      wrong += c.label != letter(kTable[i][j]) || c.on_boundary;
    }
  }
  std::vector<double> edge(kGrid.begin(), kGrid.end());
  edge.insert(edge.end(), {-1.0, 1.0});
  for (double k : edge) {
    for (double a : edge) {
      if (std::abs(k) != 1.0 && std::abs(a) != 1.0) continue;
      ++boundary_points;
      const auto c = classify(k, a);
      flagged += c.on_boundary;
      boundary_wrong += c.label != letter(kBands[band(k)][band(a)]);
    }
  }
  const double t = seconds_since(t0);
  return {wrong == 0 && boundary_wrong == 0 && flagged == boundary_points && t < 1.0,
          fmt("grid mismatches %d/81, boundary mismatches %d/%d, flagged %d/%d, %.3f s", wrong, boundary_wrong,
              boundary_points, flagged, boundary_points, t)};
}

// --- 2: z recovery from synthetic offsets ------------------------------------------

Outcome criterion2() {
  const auto norm = shipped_norm();
  const std::array<double, 5> offsets = {-3, -1, 0, 1, 3};
  struct Case {
    double k, a, noise;
  };
  std::vector<Case> cases;
  for (double noise : {0.0, 5.0}) {
    for (double k : offsets) {
      for (double a : offsets) cases.push_back({k, a, noise});
    }
  }
  std::vector<double> err(cases.size());
  const auto t0 = Clock::now();
  parallel_for(cases.size(), 0, [&](std::size_t i) {
    SynthSpec spec;
    spec.knee_offset_sigma = cases[i].k;
    spec.ankle_offset_sigma = cases[i].a;
    spec.noise_mm = cases[i].noise;
    spec.seed = 100 + i;
    const auto trial = generate_trial(spec, norm);
    const auto z = process_trial(trial.sequence, SkeletonMap::standard(), norm, {}).zscores;
    err[i] = std::max(std::abs(z.knee_z - cases[i].k), std::abs(z.ankle_z - cases[i].a));
  });
  const double t = seconds_since(t0);
  double clean = 0.0, noisy = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    double& worst = cases[i].noise > 0 ? noisy : clean;
    worst = std::max(worst, err[i]);
  }
  return {clean <= 0.2 && noisy <= 0.5 && t < 30.0,
          fmt("%zu trials, max |dz| clean %.4f (<= 0.2), 5 mm %.4f (<= 0.5), %.2f s", cases.size(), clean, noisy, t)};
}

// --- 3: Euler round trips ------------------------------------------------------------

Outcome criterion3() {
  std::mt19937_64 rng(3);
  constexpr int n = 10000;
  int locked = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix3d r = gaitkit::testing::random_rotation(rng);
    const auto e = euler_xyz(r);
    if (e.gimbal_locked) {
      ++locked;
      continue;
    }
    const auto back = euler_xyz(compose_xyz(e.alpha, e.beta, e.gamma));
    auto diff = [](double x, double y) { return std::abs(std::remainder(x - y, 360.0)); };
    worst = std::max({worst, diff(e.alpha, back.alpha), diff(e.beta, back.beta), diff(e.gamma, back.gamma)});
    // The decomposition must also reproduce the input matrix.
    const double mat = (compose_xyz(e.alpha, e.beta, e.gamma) - r).cwiseAbs().maxCoeff();
    worst = std::max(worst, mat * 180.0 / std::numbers::pi);
  }
  const double locked_frac = static_cast<double>(locked) / n;
  return {worst <= 1e-6 && locked_frac < 1e-3,
          fmt("%d rotations, max error %.3e deg (<= 1e-6), gimbal-locked %.4f%% (< 0.1%%)", n, worst, locked_frac * 100)};
}

// --- 4: low-pass ------------------------------------------------------------------------

double through_lowpass(double freq_hz) {
  constexpr double rate = 60.0;
  constexpr Eigen::Index n = 600;
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, 3);
  std::vector<long> ids(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    coords(i, 0) = std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate);
    ids[static_cast<std::size_t>(i)] = i;
  }
  const KeypointSequence seq({"p"}, coords, Mask::Constant(n, 1, true), ids, rate, {});
  const auto out = lowpass(seq, FilterSpec{});
  // Amplitude by projection on sin/cos over an interior span of whole periods.
  double s = 0.0, c = 0.0;
  const Eigen::Index lo = 120, hi = 480;
  for (Eigen::Index i = lo; i < hi; ++i) {
    const double w = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate;
    s += out.coords()(i, 0) * std::sin(w);
    c += out.coords()(i, 0) * std::cos(w);
  }
  return 2.0 * std::hypot(s, c) / static_cast<double>(hi - lo);
}

Outcome criterion4() {
  const double high = through_lowpass(20.0);
  const double low = through_lowpass(1.0);
  return {high < 0.01 && std::abs(low - 1.0) <= 0.02,
          fmt("20 Hz gain %.3e (< 0.01), 1 Hz gain %.6f (within 0.02 of 1)", high, low)};
}

// --- 5: metrics against brute-force oracles -------------------------------------------

Outcome criterion5() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int fixture = 0; fixture < 100; ++fixture) {
    const int n = 20 + static_cast<int>(rng() % 181);
    oracle::Vec t(n), p(n);
    std::vector<bool> labels(n);
    const bool ties = fixture % 2 == 0;
    for (int i = 0; i < n; ++i) {
      t[i] = 1.5 * standard_normal(rng);
      p[i] = 0.7 * t[i] + 0.2 + 0.6 * standard_normal(rng);
      if (ties) p[i] = std::round(p[i] * 4.0) / 4.0;
      labels[i] = t[i] > 0.5;
    }
    labels[0] = true;
    labels[1] = false;
    const Eigen::Map<const Eigen::VectorXd> tv(t.data(), n), pv(p.data(), n);
    const auto reg = regression_metrics(tv, pv);
    const auto ba = bland_altman(tv, pv);
    const auto oba = oracle::bland_altman(t, p);
    const std::array<double, 10> d = {
        reg.r2 - oracle::r2(t, p),
        reg.mae - oracle::mae(t, p),
        reg.rmse - oracle::rmse(t, p),
        ccc(tv, pv) - oracle::ccc(t, p),
        ba.bias - oba.bias,
        ba.loa_low - oba.low,
        ba.loa_high - oba.high,
        auroc(labels, pv) - oracle::auroc_pairwise(labels, p),
        auprc(labels, pv) - oracle::auprc_stepwise(labels, p),
        calibration_slope(tv, pv, 10).slope - oracle::calibration_slope(t, p, 10),
    };
    for (double x : d) worst = std::max(worst, std::abs(x));
  }
  return {worst <= 1e-9, fmt("100 fixtures x 10 quantities, max |library - oracle| %.3e (<= 1e-9)", worst)};
}

// --- 6: calibration slope of affine predictors -----------------------------------------

Outcome criterion6() {
  std::mt19937_64 rng(6);
  Eigen::VectorXd t(200);
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = 2.0 * standard_normal(rng);
  double worst = 0.0;
  std::string per;
  for (double a : {0.0, 0.5, 0.56, 0.81, 1.0}) {
    const Eigen::VectorXd p = (a * t.array() + 0.3).matrix();
    const double slope = calibration_slope(t, p, 10).slope;
    worst = std::max(worst, std::abs(slope - a));
    per += fmt(" %.2f->%.12f", a, slope);
  }
  return {worst <= 1e-9, fmt("max |slope - a| %.3e (<= 1e-9);%s", worst, per.c_str())};
}

// --- 7: grouped folds ------------------------------------------------------------------------

Outcome criterion7() {
  std::mt19937_64 rng(7);
  int leaks = 0, ratio_misses = 0, coverage_misses = 0;
  for (int cohort = 0; cohort < 100; ++cohort) {
    const int n_subjects = 5 + static_cast<int>(rng() % 96);
    std::vector<std::string> trial_subjects;
    for (int s = 0; s < n_subjects; ++s) {
      const int trials = 1 + static_cast<int>(rng() % 4);
      for (int t = 0; t < trials; ++t) trial_subjects.push_back("P" + std::to_string(s));
    }
    const auto plan = grouped_kfold(trial_subjects, 5, rng());
    std::map<std::string, int> tested;
    const double n = n_subjects;
    for (const auto& fold : plan.folds) {
      std::set<std::string> seen;
      std::size_t total = 0;
      for (const auto* part : {&fold.train, &fold.validation, &fold.test}) {
        seen.insert(part->begin(), part->end());
        total += part->size();
      }
      leaks += seen.size() != total || seen.size() != static_cast<std::size_t>(n_subjects);
      for (const auto& s : fold.test) ++tested[s];
      ratio_misses += std::abs(static_cast<double>(fold.train.size()) - 0.6 * n) > 1.0 ||
                      std::abs(static_cast<double>(fold.validation.size()) - 0.2 * n) > 1.0 ||
                      std::abs(static_cast<double>(fold.test.size()) - 0.2 * n) > 1.0;
    }
    coverage_misses += tested.size() != static_cast<std::size_t>(n_subjects);
    for (const auto& [s, k] : tested) coverage_misses += k != 1;
  }
  return {leaks == 0 && ratio_misses == 0 && coverage_misses == 0,
          fmt("100 cohorts x 5 folds: leaking folds %d, folds off 3:1:1 by > 1 subject %d, coverage errors %d", leaks,
              ratio_misses, coverage_misses)};
}

// --- 8: window counts -----------------------------------------------------------------------------

Outcome criterion8() {
  int wrong = 0;
  for (Eigen::Index length = 0; length <= 1000; ++length) {
    const Eigen::Index expected = length < 90 ? 0 : (length - 90) / 60 + 1;
    wrong += window_count(length, 90, 60) != expected;
    if (length < 89) continue;
    JointAngleSeries angles;
    angles.values = Eigen::MatrixXd::Zero(length, kAngleChannels);
    angles.info = {"S", "T", LimbSide::Left};
    Eigen::Index made = 0;
    try {
      made = static_cast<Eigen::Index>(make_windows(angles, {}).size());
    } catch (const GaitError& e) {
      if (e.code() != ErrorCode::TrialTooShort) ++wrong;
    }
    wrong += made != expected;
  }
  return {wrong == 0, fmt("L = 0..1000 (windows built for 89..1000): %d mismatches", wrong)};
}

// --- 9: crossval on a noise-free cohort -------------------------------------------------------------

Outcome criterion9() {
  TempDir dir("accept9");
  std::ostringstream log;
  const auto t0 = Clock::now();
  SynthConfig synth;
  synth.cohort.n_subjects = 40;
  synth.cohort.trials_per_subject = 3;
  synth.cohort.class_mix = parse_class_mix("all");
  synth.cohort.seed = 9;
  synth.normative = source_path("config/normative_placeholder.json");
  synth.output_dir = dir / "ds";
  cmd_synth(synth, log);
  CrossvalConfig cv;
  cv.input_dir = synth.output_dir;
  cv.skeleton_map = source_path("config/skeleton_map.json");
  cv.normative = synth.normative;
  cv.output_dir = dir / "cv";
  cv.seed = 9;
  const int code = cmd_crossval(cv, log);
  const double t = seconds_since(t0);
  const auto result = read_json(cv.output_dir / "crossval.json");
  double knee = 1.0, ankle = 1.0, screen = 1.0, acc = 1.0;
  for (const auto& r : result["repeats"]) {
    const auto& m = r["metrics"];
    knee = std::min(knee, m["knee.r2"].get<double>());
    ankle = std::min(ankle, m["ankle.r2"].get<double>());
    screen = std::min(screen, m["screen.auroc"].get<double>());
    acc = std::min(acc, m["multiclass.accuracy"].get<double>());
  }
  return {code == kExitOk && knee > 0.9 && ankle > 0.9 && screen > 0.95 && acc > 0.8 && t < 300.0 &&
              result["leakage_free"].get<bool>(),
          fmt("worst of %zu repeats: knee R2 %.6f, ankle R2 %.6f, AUROC %.4f, 7-class acc %.4f; %.1f s",
              result["repeats"].size(), knee, ankle, screen, acc, t)};
}

// --- 10: byte-identical reruns through the CLI ------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

Outcome criterion10() {
  TempDir dir("accept10");
  const std::string map = "'" + source_path("config/skeleton_map.json").string() + "'";
  const std::string norm = "'" + source_path("config/normative_placeholder.json").string() + "'";
  auto run = [&](const std::string& tag, const std::string& workers) {
    const auto root = dir / tag;
    const std::string r = "'" + root.string() + "'";
    const std::string common = "--seed 10 --workers " + workers + " ";
    int code = 0;
    code |= run_cli(common + "synth --normative " + norm + " --out " + r + "/ds --subjects 10 --trials 2 " +
                    "--duration-s 6 --class-mix all --noise-mm 3");
    code |= run_cli(common + "process --input " + r + "/ds --skeleton-map " + map + " --normative " + norm +
                    " --out " + r + "/proc");
    code |= run_cli(common + "crossval --input " + r + "/ds --skeleton-map " + map + " --normative " + norm +
                    " --repeats 2 --out " + r + "/cv");
    code |= run_cli(common + "evaluate --truth " + r + "/ds/labels.csv --predictions " + r +
                    "/cv/repeat0/predictions.csv --out " + r + "/eval");
    code |= run_cli(common + "classify --input " + r + "/proc/zscores.csv --out " + r + "/cls");
    return code;
  };
  const int code_a = run("a", "0");
  const int code_b = run("b", "1");
  const auto a = tree(dir / "a");
  const auto b = tree(dir / "b");
  int differing = 0, unstamped = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    differing += it == b.end() || it->second != bytes;
    unstamped += bytes.find("config_hash") == std::string::npos;
  }
  differing += static_cast<int>(b.size()) - static_cast<int>(a.size());
  return {code_a == 0 && code_b == 0 && differing == 0 && unstamped == 0 && !a.empty(),
          fmt("%zu files per run, %d differ, %d missing config_hash, exit codes %d/%d", a.size(), differing, unstamped,
              code_a, code_b)};
}

}  // namespace

int main() {
  const std::array<std::pair<const char*, std::function<Outcome()>>, 10> criteria = {{
      {"AC1 class table grid and strict boundaries", criterion1},
      {"AC2 z recovery from synthetic offsets", criterion2},
      {"AC3 Euler round trips", criterion3},
      {"AC4 low-pass attenuation", criterion4},
      {"AC5 metrics vs brute-force oracles", criterion5},
      {"AC6 calibration slope of affine predictors", criterion6},
      {"AC7 grouped folds: leakage and 3:1:1", criterion7},
      {"AC8 window counts", criterion8},
      {"AC9 crossval on noise-free cohort", criterion9},
      {"AC10 byte-identical reruns", criterion10},
  }};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
