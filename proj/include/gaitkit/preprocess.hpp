#pragma once

#include <Eigen/Core>

#include <vector>

#include "gaitkit/types.hpp"

namespace gaitkit {

enum class FilterMode { ZeroPhase, SinglePass };

struct FilterSpec {
  int order = 4;
  double cutoff_hz = 6.0;
  FilterMode mode = FilterMode::ZeroPhase;
};

/// Direct-form II transposed second-order section. First-order sections use
/// b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth low-pass via the bilinear transform with prewarping.
/// Each section is normalized to unit DC gain.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz);

/// Causal cascade filter with initial state matched to a constant input of x[0].
Eigen::VectorXd sosfilt(const std::vector<Biquad>& sections, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Forward-backward filtering with odd reflection padding of `padlen` samples
/// at each end. Output has the input's length and no phase shift.
Eigen::VectorXd sosfiltfilt(const std::vector<Biquad>& sections, const Eigen::Ref<const Eigen::VectorXd>& x,
                            Eigen::Index padlen);

/// Squared magnitude of the digital Butterworth response at frequency f.
double butterworth_power_response(int order, double cutoff_hz, double sample_rate_hz, double f);

KeypointSequence drop_empty_frames(const KeypointSequence& seq);
KeypointSequence interpolate_gaps(const KeypointSequence& seq);
KeypointSequence lowpass(const KeypointSequence& seq, const FilterSpec& spec);
/// Subtracts the midpoint of the left and right hip from every landmark.
KeypointSequence hip_center(const KeypointSequence& seq, const SkeletonMap& map);
KeypointSequence stature_rescale(const KeypointSequence& seq, const SkeletonMap& map, double reference_len_m,
                                 int ma_window = 30);

/// Centered moving average truncated at the ends.
Eigen::VectorXd moving_average(const Eigen::Ref<const Eigen::VectorXd>& x, int window);

struct PreprocessOptions {
  FilterSpec filter;
  double reference_len_m = 0.18;
  int ma_window = 30;
};

struct PreprocessResult {
  /// After drop, interpolate and lowpass; still in the capture frame. Gait
  /// events are detected on this stage because centering removes progression.
  KeypointSequence filtered;
  /// After hip-centering and stature rescaling. Angles are computed here.
  KeypointSequence normalized;
};

/// drop -> interpolate -> lowpass -> hip_center -> rescale.
PreprocessResult preprocess(const KeypointSequence& seq, const SkeletonMap& map, const PreprocessOptions& options);

}  // namespace gaitkit
