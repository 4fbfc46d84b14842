#pragma once

#include <Eigen/Core>

#include <string_view>

#include "gaitkit/types.hpp"

namespace gaitkit {

/// How |z| == 1 exactly is treated. The rule table uses strict inequalities,
/// so exact threshold values match no row under Exclusive; Strict folds them
/// into the normal band.
enum class BoundaryMode { Strict, Exclusive };
/// What to return when no rule matches.
enum class Fallback { Unclassified, NearestRegion };

struct ClassificationPolicy {
  BoundaryMode boundary_mode = BoundaryMode::Strict;
  Fallback fallback = Fallback::Unclassified;
};

std::string_view to_string(BoundaryMode mode);
std::string_view to_string(Fallback fallback);
BoundaryMode boundary_mode_from_string(std::string_view s);
Fallback fallback_from_string(std::string_view s);

struct Classification {
  GaitClass label = GaitClass::Unclassified;
  /// Either coordinate sat exactly on a +-1 threshold.
  bool on_boundary = false;
  /// No rule matched and the fallback decided the label.
  bool used_fallback = false;
};

Classification classify(double knee_z, double ankle_z, const ClassificationPolicy& policy = {});

inline GaitClass rodda_graham(const ZScorePair& z, const ClassificationPolicy& policy = {}) {
  return classify(z.knee_z, z.ankle_z, policy).label;
}

/// Excess knee flexion: z strictly above the threshold.
inline bool flexion_screen(double knee_z, double threshold = 1.0) { return knee_z > threshold; }

/// Axis-aligned box of a rule row in (knee, ankle) z-space, closed at the
/// thresholds and unbounded where the rule is one-sided.
struct Region {
  double knee_lo, knee_hi, ankle_lo, ankle_hi;
};

Region region_of(GaitClass cls);

/// Euclidean distance from (knee, ankle) to a class region; zero inside.
double distance_to_region(double knee_z, double ankle_z, GaitClass cls);

/// Region centroid with unbounded sides truncated at +-3.
Eigen::Vector2d region_centroid(GaitClass cls);

/// Three-way band used by the per-bin analysis: -1 (z < -1), 0, +1 (z > 1).
int three_class(double z);

}  // namespace gaitkit
