#include "gaitkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace gaitkit {

namespace {

void check_filter(const FilterSpec& spec, double sample_rate_hz) {
  if (spec.order < 1) throw GaitError(ErrorCode::CutoffAboveNyquist, "filter order must be >= 1");
  if (!(spec.cutoff_hz > 0.0) || !(spec.cutoff_hz < sample_rate_hz / 2.0)) {
    throw GaitError(ErrorCode::CutoffAboveNyquist,
                    "cutoff " + std::to_string(spec.cutoff_hz) + " Hz not in (0, fs/2) for fs=" +
                        std::to_string(sample_rate_hz));
  }
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  check_filter({order, cutoff_hz, FilterMode::ZeroPhase}, sample_rate_hz);
  const double fs2 = 2.0 * sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);

  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    const std::complex<double> pole = warped * std::polar(1.0, theta);
    const std::complex<double> zpole = (fs2 + pole) / (fs2 - pole);
    Biquad s;
    s.a1 = -2.0 * zpole.real();
    s.a2 = std::norm(zpole);
    const double gain = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = gain;
    s.b1 = 2.0 * gain;
    s.b2 = gain;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double zpole = (fs2 - warped) / (fs2 + warped);
    Biquad s;
    s.a1 = -zpole;
    const double gain = (1.0 - zpole) / 2.0;
    s.b0 = gain;
    s.b1 = gain;
    sections.push_back(s);
  }
  return sections;
}

double butterworth_power_response(int order, double cutoff_hz, double sample_rate_hz, double f) {
  const double ratio = std::tan(std::numbers::pi * f / sample_rate_hz) /
                       std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  return 1.0 / (1.0 + std::pow(ratio, 2.0 * order));
}

Eigen::VectorXd sosfilt(const std::vector<Biquad>& sections, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd y = x;
  if (y.size() == 0) return y;
  for (const auto& s : sections) {
    const double u = y(0);
    double z2 = (s.b2 - s.a2) * u;
    double z1 = (s.b1 - s.a1) * u + z2;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(i) = out;
    }
  }
  return y;
}

Eigen::VectorXd sosfiltfilt(const std::vector<Biquad>& sections, const Eigen::Ref<const Eigen::VectorXd>& x,
                            Eigen::Index padlen) {
  const Eigen::Index n = x.size();
  padlen = std::clamp<Eigen::Index>(padlen, 0, std::max<Eigen::Index>(n - 1, 0));
  Eigen::VectorXd ext(n + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) {
    ext(i) = 2.0 * x(0) - x(padlen - i);
    ext(n + padlen + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(padlen, n) = x;

  Eigen::VectorXd forward = sosfilt(sections, ext);
  Eigen::VectorXd backward = sosfilt(sections, forward.reverse());
  return backward.reverse().segment(padlen, n);
}

Eigen::VectorXd moving_average(const Eigen::Ref<const Eigen::VectorXd>& x, int window) {
  const Eigen::Index n = x.size();
  window = std::max(window, 1);
  const Eigen::Index before = window / 2;
  const Eigen::Index after = window - 1 - before;
  Eigen::VectorXd prefix(n + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + x(i);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - before);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + after);
    out(i) = (prefix(hi + 1) - prefix(lo)) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

KeypointSequence drop_empty_frames(const KeypointSequence& seq) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index f = 0; f < seq.num_frames(); ++f) {
    bool empty = true;
    for (Eigen::Index l = 0; l < seq.num_landmarks() && empty; ++l) {
      if (seq.is_valid(f, l) && !seq.position(f, l).isZero(0.0)) empty = false;
    }
    if (!empty) keep.push_back(f);
  }
  if (keep.empty()) throw GaitError(ErrorCode::AllFramesEmpty, "every frame is empty");
  if (static_cast<Eigen::Index>(keep.size()) == seq.num_frames()) return seq;

  const auto rows = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd coords(rows, seq.coords().cols());
  Mask valid(rows, seq.num_landmarks());
  std::vector<long> ids(keep.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto f = keep[static_cast<std::size_t>(r)];
    coords.row(r) = seq.coords().row(f);
    valid.row(r) = seq.valid().row(f);
    ids[static_cast<std::size_t>(r)] = seq.frame_ids()[static_cast<std::size_t>(f)];
  }
  return seq.with_coords(std::move(coords), std::move(valid), std::move(ids));
}

KeypointSequence interpolate_gaps(const KeypointSequence& seq) {
  Eigen::MatrixXd coords = seq.coords();
  const auto& ids = seq.frame_ids();
  const Eigen::Index n = seq.num_frames();
  for (Eigen::Index l = 0; l < seq.num_landmarks(); ++l) {
    std::vector<Eigen::Index> observed;
    for (Eigen::Index f = 0; f < n; ++f) {
      if (seq.is_valid(f, l)) observed.push_back(f);
    }
    if (observed.empty()) {
      throw GaitError(ErrorCode::LandmarkNeverObserved,
                      "landmark '" + seq.landmark_names()[static_cast<std::size_t>(l)] + "' has no valid sample");
    }
    auto block = coords.middleCols<3>(3 * l);
    for (Eigen::Index f = 0; f < observed.front(); ++f) block.row(f) = block.row(observed.front());
    for (Eigen::Index f = observed.back() + 1; f < n; ++f) block.row(f) = block.row(observed.back());
    for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
      const auto lo = observed[k];
      const auto hi = observed[k + 1];
      if (hi - lo < 2) continue;
      const double t0 = static_cast<double>(ids[static_cast<std::size_t>(lo)]);
      const double t1 = static_cast<double>(ids[static_cast<std::size_t>(hi)]);
      const Eigen::RowVector3d p0 = block.row(lo);
      const Eigen::RowVector3d p1 = block.row(hi);
      for (Eigen::Index f = lo + 1; f < hi; ++f) {
        const double w = (static_cast<double>(ids[static_cast<std::size_t>(f)]) - t0) / (t1 - t0);
        block.row(f) = (1.0 - w) * p0 + w * p1;
      }
    }
  }
  return seq.with_coords(std::move(coords), Mask::Constant(n, seq.num_landmarks(), true), ids);
}

KeypointSequence lowpass(const KeypointSequence& seq, const FilterSpec& spec) {
  check_filter(spec, seq.sample_rate_hz());
  if (!seq.fully_valid()) throw GaitError(ErrorCode::InvalidSequence, "lowpass needs a fully valid sequence");
  if (seq.num_frames() <= 3 * spec.order) {
    throw GaitError(ErrorCode::SequenceTooShort, std::to_string(seq.num_frames()) + " frames, need more than " +
                                                     std::to_string(3 * spec.order));
  }
  const auto sections = butterworth_lowpass(spec.order, spec.cutoff_hz, seq.sample_rate_hz());
  const Eigen::Index padlen = 3 * (spec.order + 1);
  Eigen::MatrixXd coords(seq.coords().rows(), seq.coords().cols());
  for (Eigen::Index c = 0; c < coords.cols(); ++c) {
    coords.col(c) = spec.mode == FilterMode::ZeroPhase ? sosfiltfilt(sections, seq.coords().col(c), padlen)
                                                       : sosfilt(sections, seq.coords().col(c));
  }
  return seq.with_coords(std::move(coords), seq.valid(), seq.frame_ids());
}

KeypointSequence hip_center(const KeypointSequence& seq, const SkeletonMap& map) {
  const auto left = seq.landmark_index(map.name(Role::LeftHip));
  const auto right = seq.landmark_index(map.name(Role::RightHip));
  if (!left || !right) throw GaitError(ErrorCode::MissingHipLandmarks, "hip landmarks not in sequence");
  Eigen::MatrixXd coords = seq.coords();
  for (Eigen::Index f = 0; f < seq.num_frames(); ++f) {
    if (!seq.is_valid(f, *left) || !seq.is_valid(f, *right)) {
      throw GaitError(ErrorCode::MissingHipLandmarks, "hip missing in frame " + std::to_string(f));
    }
    const Eigen::RowVector3d mid = 0.5 * (coords.block<1, 3>(f, 3 * *left) + coords.block<1, 3>(f, 3 * *right));
    for (Eigen::Index l = 0; l < seq.num_landmarks(); ++l) coords.block<1, 3>(f, 3 * l) -= mid;
  }
  return seq.with_coords(std::move(coords), seq.valid(), seq.frame_ids());
}

KeypointSequence stature_rescale(const KeypointSequence& seq, const SkeletonMap& map, double reference_len_m,
                                 int ma_window) {
  if (!(reference_len_m > 0.0)) throw GaitError(ErrorCode::DegenerateSegment, "reference length must be positive");
  const auto neck = seq.landmark_index(map.name(Role::BackNeck));
  const auto sternum = seq.landmark_index(map.name(Role::Sternum));
  if (!neck || !sternum) throw GaitError(ErrorCode::InvalidSkeletonMap, "backneck/sternum not in sequence");
  const Eigen::Index n = seq.num_frames();
  Eigen::VectorXd distance(n);
  for (Eigen::Index f = 0; f < n; ++f) {
    if (!seq.is_valid(f, *neck) || !seq.is_valid(f, *sternum)) {
      throw GaitError(ErrorCode::DegenerateSegment, "backneck/sternum missing in frame " + std::to_string(f));
    }
    distance(f) = (seq.position(f, *neck) - seq.position(f, *sternum)).norm();
  }
  const Eigen::VectorXd smoothed = moving_average(distance, ma_window);
  constexpr double kEpsilon = 1e-9;
  Eigen::MatrixXd coords = seq.coords();
  for (Eigen::Index f = 0; f < n; ++f) {
    if (!(smoothed(f) > kEpsilon)) {
      throw GaitError(ErrorCode::DegenerateSegment, "smoothed backneck-sternum distance vanishes at frame " +
                                                        std::to_string(f));
    }
    coords.row(f) *= reference_len_m / smoothed(f);
  }
  return seq.with_coords(std::move(coords), seq.valid(), seq.frame_ids());
}

PreprocessResult preprocess(const KeypointSequence& seq, const SkeletonMap& map, const PreprocessOptions& options) {
  map.resolve(seq);
  auto filtered = lowpass(interpolate_gaps(drop_empty_frames(seq)), options.filter);
  auto normalized = stature_rescale(hip_center(filtered, map), map, options.reference_len_m, options.ma_window);
  return {std::move(filtered), std::move(normalized)};
}

}  // namespace gaitkit
