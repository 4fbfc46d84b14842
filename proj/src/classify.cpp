#include "gaitkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gaitkit {

std::string_view to_string(BoundaryMode mode) { return mode == BoundaryMode::Strict ? "strict" : "exclusive"; }
std::string_view to_string(Fallback fallback) {
  return fallback == Fallback::Unclassified ? "unclassified" : "nearest_region";
}

BoundaryMode boundary_mode_from_string(std::string_view s) {
  if (s == "strict") return BoundaryMode::Strict;
  if (s == "exclusive") return BoundaryMode::Exclusive;
  throw GaitError(ErrorCode::ConfigError, "unknown boundary mode '" + std::string(s) + "'");
}

Fallback fallback_from_string(std::string_view s) {
  if (s == "unclassified") return Fallback::Unclassified;
  if (s == "nearest_region" || s == "nearest-region") return Fallback::NearestRegion;
  throw GaitError(ErrorCode::ConfigError, "unknown fallback '" + std::string(s) + "'");
}

Classification classify(double knee_z, double ankle_z, const ClassificationPolicy& policy) {
  const bool strict = policy.boundary_mode == BoundaryMode::Strict;
  // Under Strict the normal band is closed, so "below +1" includes +1.
  auto within = [&](double z) { return strict ? std::abs(z) <= 1.0 : std::abs(z) < 1.0; };
  auto below_upper = [&](double z) { return strict ? z <= 1.0 : z < 1.0; };
  auto above = [](double z) { return z > 1.0; };
  auto below = [](double z) { return z < -1.0; };

  Classification out;
  out.on_boundary = std::abs(knee_z) == 1.0 || std::abs(ankle_z) == 1.0;

  if (within(knee_z) && within(ankle_z)) {
    out.label = GaitClass::Normal;
  } else if (below_upper(knee_z) && below(ankle_z)) {
    out.label = GaitClass::TrueEquinus;
  } else if (above(knee_z) && below(ankle_z)) {
    out.label = GaitClass::Jump;
  } else if (above(knee_z) && within(ankle_z)) {
    out.label = GaitClass::ApparentEquinus;
  } else if (above(knee_z) && above(ankle_z)) {
    out.label = GaitClass::Crouch;
  } else if (within(knee_z) && above(ankle_z)) {
    out.label = GaitClass::AnkleCrouch;
  } else if (below(knee_z) && within(ankle_z)) {
    out.label = GaitClass::Recurvatum;
  } else {
    out.used_fallback = true;
    out.label = GaitClass::Unclassified;
    if (policy.fallback == Fallback::NearestRegion) {
      const Eigen::Vector2d point(knee_z, ankle_z);
      double best = std::numeric_limits<double>::infinity();
      for (const auto cls : kRuleClasses) {
        const double d = (point - region_centroid(cls)).norm();
        if (d < best) {
          best = d;
          out.label = cls;
        }
      }
    }
  }
  return out;
}

Region region_of(GaitClass cls) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (cls) {
    case GaitClass::Normal: return {-1.0, 1.0, -1.0, 1.0};
    case GaitClass::TrueEquinus: return {-inf, 1.0, -inf, -1.0};
    case GaitClass::Jump: return {1.0, inf, -inf, -1.0};
    case GaitClass::ApparentEquinus: return {1.0, inf, -1.0, 1.0};
    case GaitClass::Crouch: return {1.0, inf, 1.0, inf};
    case GaitClass::AnkleCrouch: return {-1.0, 1.0, 1.0, inf};
    case GaitClass::Recurvatum: return {-inf, -1.0, -1.0, 1.0};
    case GaitClass::Unclassified: break;
  }
  throw GaitError(ErrorCode::ConfigError, "Unclassified has no region");
}

double distance_to_region(double knee_z, double ankle_z, GaitClass cls) {
  const auto r = region_of(cls);
  const double dk = std::max({r.knee_lo - knee_z, 0.0, knee_z - r.knee_hi});
  const double da = std::max({r.ankle_lo - ankle_z, 0.0, ankle_z - r.ankle_hi});
  return std::hypot(dk, da);
}

Eigen::Vector2d region_centroid(GaitClass cls) {
  const auto r = region_of(cls);
  auto clip = [](double v) { return std::clamp(v, -3.0, 3.0); };
  return {0.5 * (clip(r.knee_lo) + clip(r.knee_hi)), 0.5 * (clip(r.ankle_lo) + clip(r.ankle_hi))};
}

int three_class(double z) {
  if (z < -1.0) return -1;
  if (z > 1.0) return 1;
  return 0;
}

}  // namespace gaitkit
